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

#pragma once

#include <stdexcept>
#include <string>

namespace reid {

// Every library failure derives from Error; the category lets the CLI map
// failures to exit codes and lets tests assert on the precise failure kind.
enum class ErrorCategory {
  kDimension,       // shape / length mismatch, empty inputs
  kInvalidArgument, // out-of-range ids, bad hyper-parameters
  kDegenerateInput, // near-zero vectors, single-class datasets
  kNonFinite,       // NaN / Inf where a finite value is required
  kFormat,          // malformed file contents, bad magic, bad schema
  kMissingBlob,     // referenced file does not exist
  kDuplicateId,     // repeated image id in a record set
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define REID_DEFINE_ERROR(Name, Category)                       \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(Category, what) {} \
  };

REID_DEFINE_ERROR(DimensionError, ErrorCategory::kDimension)
REID_DEFINE_ERROR(InvalidArgument, ErrorCategory::kInvalidArgument)
REID_DEFINE_ERROR(DegenerateInput, ErrorCategory::kDegenerateInput)
REID_DEFINE_ERROR(NonFiniteError, ErrorCategory::kNonFinite)
REID_DEFINE_ERROR(FormatError, ErrorCategory::kFormat)
REID_DEFINE_ERROR(MissingBlobError, ErrorCategory::kMissingBlob)
REID_DEFINE_ERROR(DuplicateIdError, ErrorCategory::kDuplicateId)

#undef REID_DEFINE_ERROR

const char* category_name(ErrorCategory category) noexcept;

}  // namespace reid
