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

// Dataset manifest: line-oriented text naming every image's metadata and the
// binary sidecars holding its tensors.
//
//   reid-manifest 1
//   feature_dim=<D>
//   local_dim=<L>                      (optional, 0 = no local features)
//   heatmap=<channels>x<height>x<width> (optional)
//   record image=<id> identity=<int> camera=<int> features=<path>#<row>
//          [orientation=<name>] [local=<path>#<row>] [heatmap=<path>]
//          [keypoints=<path>]
//
// A record is one line; fields are space-separated key=value pairs. Paths are
// relative to the manifest's directory. '#' at the start of a line begins a
// comment. Heatmap coordinates and key-point files use x = column, y = row,
// both 0-indexed.
//
// Key-point files hold one line per annotated key-point:
//   <keypoint id 1..20> <x> <y> <visible 0|1>
// Key-points that are not listed are invisible.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reid/evaluation.hpp"
#include "reid/fusion.hpp"
#include "reid/heatmaps.hpp"
#include "reid/orientation.hpp"
#include "reid/retrieval.hpp"

namespace reid {

inline constexpr int kManifestSchemaVersion = 1;

struct BlobRow {
  std::string path;  // as written in the manifest
  std::size_t row = 0;

  friend bool operator==(const BlobRow&, const BlobRow&) = default;
};

struct ManifestRecord {
  std::string image_id;
  int identity = 0;
  int camera = 0;
  std::optional<Orientation> orientation;
  BlobRow features;
  std::optional<BlobRow> local;
  std::optional<std::string> heatmap;
  std::optional<std::string> keypoints;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct HeatmapGeometry {
  std::size_t channels = kNumKeypoints;
  std::size_t height = kDefaultMapSize;
  std::size_t width = kDefaultMapSize;

  friend bool operator==(const HeatmapGeometry&, const HeatmapGeometry&) = default;
};

struct DatasetManifest {
  int schema_version = kManifestSchemaVersion;
  std::size_t feature_dim = 0;
  std::size_t local_dim = 0;
  std::optional<HeatmapGeometry> heatmap;
  std::vector<ManifestRecord> records;
  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.schema_version == b.schema_version && a.feature_dim == b.feature_dim &&
           a.local_dim == b.local_dim && a.heatmap == b.heatmap && a.records == b.records;
  }
};

// Parses without touching referenced files.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
std::string format_manifest(const DatasetManifest& manifest);

// Parses and validates eagerly: duplicate image ids (DuplicateIdError),
// absent sidecars (MissingBlobError), wrong feature / heatmap dimensions or
// out-of-range rows (DimensionError), malformed text (FormatError).
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Materialized data. Features come from the `features` rows; orientation
// likelihoods are attached when the embedding blob carries them.
std::vector<EmbeddingRecord> load_embeddings(const DatasetManifest& manifest);
HeatmapStack load_heatmap(const DatasetManifest& manifest, const ManifestRecord& record);

struct KeypointAnnotation {
  std::vector<Keypoint> points;  // kNumKeypoints entries, index = id - 1
  std::vector<bool> visible;
};
KeypointAnnotation load_keypoints(const std::filesystem::path& path);
std::string format_keypoints(const KeypointAnnotation& annotation);

// Fusion training samples: features as f_g, local rows as f_l, labels as the
// dense rank of each identity among the manifest's distinct identities.
std::vector<FusionSample> load_fusion_samples(const DatasetManifest& manifest,
                                              std::size_t* num_classes = nullptr);

}  // namespace reid
