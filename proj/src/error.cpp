// Copyright 2026 The reidkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reid/error.hpp"

namespace reid {

const char* category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kDimension: return "dimension";
    case ErrorCategory::kInvalidArgument: return "invalid-argument";
    case ErrorCategory::kDegenerateInput: return "degenerate-input";
    case ErrorCategory::kNonFinite: return "non-finite";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kMissingBlob: return "missing-blob";
    case ErrorCategory::kDuplicateId: return "duplicate-id";
  }
  return "unknown";
}

}  // namespace reid
