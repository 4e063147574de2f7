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

// Binary sidecar formats. Every multi-byte value is little-endian and every
// float is IEEE-754 binary32 on disk; values are widened to double on load.
//
//   RIDHMAP1  u32 channels, u32 height, u32 width, then channel-major,
//             row-major f32 values
//   RIDDIST1  u32 rows, u32 cols, then row-major f32 values
//   RIDEMBD1  u32 count, u32 dim, u32 has_orientation (0/1), then per record
//             dim f32 features followed by 8 f32 orientation likelihoods when
//             has_orientation is 1
//   RIDFUSE1  config block (see write_fusion_checkpoint), then every layer
//             tensor in declaration order as f32
//
// Decoders reject bad magics, truncated payloads and trailing bytes with
// FormatError.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "reid/fusion.hpp"
#include "reid/heatmaps.hpp"
#include "reid/matrix.hpp"
#include "reid/orientation.hpp"

namespace reid {

using Bytes = std::vector<std::uint8_t>;

Bytes encode_heatmap(const HeatmapStack& stack);
HeatmapStack decode_heatmap(std::span<const std::uint8_t> bytes);

struct HeatmapHeader {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};
// Reads and validates only the header (and the file size).
HeatmapHeader read_heatmap_header(const std::filesystem::path& path);

Bytes encode_distance(const Matrix& distances);
Matrix decode_distance(std::span<const std::uint8_t> bytes);

struct EmbeddingBlob {
  std::size_t dim = 0;
  std::vector<std::vector<double>> features;
  // Empty, or one likelihood vector per feature row.
  std::vector<std::array<double, kNumOrientations>> orientation;
};

struct EmbeddingHeader {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  bool has_orientation = false;
};

Bytes encode_embeddings(const EmbeddingBlob& blob);
EmbeddingBlob decode_embeddings(std::span<const std::uint8_t> bytes);
EmbeddingHeader read_embedding_header(const std::filesystem::path& path);

Bytes encode_fusion_checkpoint(const FusionHead& head);
FusionHead decode_fusion_checkpoint(std::span<const std::uint8_t> bytes);

// File helpers. read_file throws MissingBlobError when the path is absent.
Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace reid
