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
// Scratch directories and a small on-disk dataset for I/O and CLI tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "reid/blob_io.hpp"
#include "reid/manifest.hpp"
#include "reid/random.hpp"

namespace reid_test {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("reid-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// `count` records over `identities` identities with 6-d features, 4-d local
// features, orientation likelihoods, 21x8x8 heatmaps and key-point files.
inline reid::DatasetManifest write_dataset(const std::filesystem::path& dir, std::size_t count,
                                           std::size_t identities, std::uint64_t seed) {
  reid::Rng rng(seed);
  reid::EmbeddingBlob features{6, {}, {}}, local{4, {}, {}};
  reid::DatasetManifest m;
  m.feature_dim = 6;
  m.local_dim = 4;
  m.heatmap = reid::HeatmapGeometry{21, 8, 8};
  m.base_dir = dir;
  for (std::size_t i = 0; i < count; ++i) {
    const int id = static_cast<int>(i % identities);
    std::vector<double> f(6), l(4);
    for (std::size_t d = 0; d < 6; ++d) f[d] = (d == static_cast<std::size_t>(id) % 6 ? 2.0 : 0.0) + 0.3 * rng.normal();
    for (std::size_t d = 0; d < 4; ++d) l[d] = (d == static_cast<std::size_t>(id) % 4 ? 1.0 : 0.0) + 0.3 * rng.normal();
    features.features.push_back(f);
    local.features.push_back(l);
    std::array<double, 8> p{};
    const std::size_t o = rng.uniform_below(8);
    for (std::size_t k = 0; k < 8; ++k) p[k] = k == o ? 0.65 : 0.05;
    features.orientation.push_back(p);

    reid::HeatmapStack hm(21, 8, 8);
    reid::KeypointAnnotation kp{std::vector<reid::Keypoint>(20), std::vector<bool>(20, false)};
    for (std::size_t c = 0; c < 20; ++c) {
      const std::size_t x = rng.uniform_below(8), y = rng.uniform_below(8);
      hm.at(c, y, x) = 1.0;
      if (c % 3 != 0) {
        kp.points[c] = {static_cast<double>(x) + (c % 2 ? 1.0 : 0.0), static_cast<double>(y)};
        kp.visible[c] = true;
      }
    }
    const std::string hname = "hm" + std::to_string(i) + ".bin";
    const std::string kname = "kp" + std::to_string(i) + ".txt";
    reid::write_file(dir / hname, reid::encode_heatmap(hm));
    const auto text = reid::format_keypoints(kp);
    reid::write_file(dir / kname, std::vector<std::uint8_t>(text.begin(), text.end()));

    reid::ManifestRecord r;
    r.image_id = "img" + std::to_string(i);
    r.identity = 100 + id;
    r.camera = static_cast<int>(i % 3);
    r.orientation = reid::orientation_from_index(static_cast<int>(o));
    r.features = {"features.bin", i};
    r.local = reid::BlobRow{"local.bin", i};
    r.heatmap = hname;
    r.keypoints = kname;
    m.records.push_back(r);
  }
  reid::write_file(dir / "features.bin", reid::encode_embeddings(features));
  reid::write_file(dir / "local.bin", reid::encode_embeddings(local));
  reid::save_manifest(m, dir / "manifest.txt");
  return m;
}

}  // namespace reid_test
