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

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "reid/blob_io.hpp"
#include "reid/error.hpp"
#include "reid/manifest.hpp"

using reid::Bytes;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("heatmap blob layout and round trip") {
  reid::HeatmapStack s(2, 1, 3, {0.5, 1, 2, -1, 0.25, 8});
  const Bytes b = reid::encode_heatmap(s);
  REQUIRE(b.size() == 8 + 12 + 6 * 4);
  CHECK(std::memcmp(b.data(), "RIDHMAP1", 8) == 0);
  CHECK(b[8] == 2);   // channels, little-endian
  CHECK(b[12] == 1);  // height
  CHECK(b[16] == 3);  // width
  float first;
  std::memcpy(&first, b.data() + 20, 4);
  CHECK(first == 0.5f);
  CHECK(reid::decode_heatmap(b) == s);
  CHECK(reid::encode_heatmap(reid::decode_heatmap(b)) == b);
}

TEST_CASE("decoders reject malformed input") {
  reid::HeatmapStack s(1, 2, 2, 1.0);
  Bytes b = reid::encode_heatmap(s);
  Bytes bad_magic = b;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(reid::decode_heatmap(bad_magic), reid::FormatError);
  CHECK_THROWS_AS(reid::decode_heatmap(Bytes(b.begin(), b.end() - 1)), reid::FormatError);
  Bytes trailing = b;
  trailing.push_back(0);
  CHECK_THROWS_AS(reid::decode_heatmap(trailing), reid::FormatError);
  Bytes huge = b;
  huge[8] = huge[9] = huge[10] = huge[11] = 0xff;
  CHECK_THROWS_AS(reid::decode_heatmap(huge), reid::FormatError);
  CHECK_THROWS_AS(reid::decode_distance(b), reid::FormatError);
  CHECK_THROWS_AS(reid::decode_embeddings(Bytes{}), reid::FormatError);
  CHECK_THROWS_AS(reid::decode_fusion_checkpoint(b), reid::FormatError);
}

TEST_CASE("distance blob round trip") {
  reid::Matrix d(2, 3, {0, 0.25, 1.5, 2, 0.125, 1});
  const auto b = reid::encode_distance(d);
  CHECK(std::memcmp(b.data(), "RIDDIST1", 8) == 0);
  CHECK(reid::decode_distance(b) == d);
}

TEST_CASE("embedding blob round trip with and without orientation") {
  reid::EmbeddingBlob e{3, {{1, 2, 3}, {0.5, 0.25, -1}}, {}};
  CHECK(reid::decode_embeddings(reid::encode_embeddings(e)).features == e.features);
  e.orientation = {{0.125, 0, 0, 0, 0, 0, 0, 0.875}, {1, 0, 0, 0, 0, 0, 0, 0}};
  const auto back = reid::decode_embeddings(reid::encode_embeddings(e));
  CHECK(back.orientation == e.orientation);
  CHECK(back.dim == 3);
  reid::EmbeddingBlob wrong{3, {{1, 2}}, {}};
  CHECK_THROWS_AS(reid::encode_embeddings(wrong), reid::DimensionError);
}

TEST_CASE("fusion checkpoint round trip at single precision") {
  reid::FusionConfig c;
  c.global_dim = 3;
  c.local_dim = 2;
  c.hidden = {4, 3};
  c.num_classes = 3;
  c.learning_rate = 2.5e-3;
  c.epochs = 7;
  c.seed = 11;
  const auto head = reid::FusionHead::initialize(c);
  const auto bytes = reid::encode_fusion_checkpoint(head);
  CHECK(std::memcmp(bytes.data(), "RIDFUSE1", 8) == 0);
  const auto back = reid::decode_fusion_checkpoint(bytes);
  CHECK(back.config().hidden == c.hidden);
  CHECK(back.config().learning_rate == c.learning_rate);
  CHECK(back.config().seed == 11);
  const auto p = head.parameters(), q = back.parameters();
  REQUIRE(p.size() == q.size());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == static_cast<double>(static_cast<float>(p[i])));
  CHECK(reid::encode_fusion_checkpoint(back) == bytes);
}

TEST_CASE("manifest text round trip") {
  reid::DatasetManifest m;
  m.feature_dim = 4;
  m.local_dim = 2;
  m.heatmap = reid::HeatmapGeometry{21, 56, 56};
  reid::ManifestRecord r;
  r.image_id = "0002_c002_00030600_0";
  r.identity = 2;
  r.camera = 2;
  r.orientation = reid::Orientation::kLeftRear;
  r.features = {"f.bin", 0};
  r.local = reid::BlobRow{"l.bin", 3};
  r.heatmap = "h/0.bin";
  m.records.push_back(r);
  r.image_id = "b";
  r.orientation.reset();
  r.local.reset();
  r.heatmap.reset();
  r.keypoints = "k.txt";
  m.records.push_back(r);
  const auto text = reid::format_manifest(m);
  CHECK(reid::parse_manifest(text, "/x") == m);
  CHECK(reid::format_manifest(reid::parse_manifest(text, "/x")) == text);
}

TEST_CASE("manifest parse errors") {
  CHECK_THROWS_AS(reid::parse_manifest("", "."), reid::FormatError);
  CHECK_THROWS_AS(reid::parse_manifest("reid-manifest 2\nfeature_dim=3\n", "."), reid::FormatError);
  CHECK_THROWS_AS(reid::parse_manifest("reid-manifest 1\n", "."), reid::FormatError);
  const std::string head = "reid-manifest 1\nfeature_dim=3\n";
  CHECK_NOTHROW(reid::parse_manifest(head + "# comment\n", "."));
  CHECK_THROWS_AS(reid::parse_manifest(head + "record image=a identity=1 camera=1\n", "."),
                  reid::FormatError);
  CHECK_THROWS_AS(
      reid::parse_manifest(head + "record image=a identity=x camera=1 features=f#0\n", "."),
      reid::FormatError);
  CHECK_THROWS_AS(
      reid::parse_manifest(head + "record image=a identity=1 camera=1 features=f#0 color=red\n", "."),
      reid::FormatError);
  CHECK_THROWS_AS(
      reid::parse_manifest(head + "record image=a identity=1 camera=1 features=f\n", "."),
      reid::FormatError);
  CHECK_THROWS_AS(reid::parse_manifest(head + "record image=a identity=1 camera=1 features=f#0 "
                                              "orientation=up\n", "."),
                  reid::FormatError);
}

TEST_CASE("load_manifest validates sidecars eagerly") {
  reid_test::ScratchDir dir("io");
  const auto m = reid_test::write_dataset(dir.path(), 6, 3, 1);
  const auto loaded = reid::load_manifest(dir.path() / "manifest.txt");
  CHECK(loaded == m);

  const auto records = reid::load_embeddings(loaded);
  REQUIRE(records.size() == 6);
  CHECK(records[4].identity == 101);
  CHECK(records[4].orientation.has_value());
  CHECK(reid::load_heatmap(loaded, loaded.records[2]).channels() == 21);
  const auto kp = reid::load_keypoints(loaded.resolve(*loaded.records[0].keypoints));
  CHECK(kp.points.size() == 20);
  CHECK_FALSE(kp.visible[0]);
  CHECK(kp.visible[1]);

  std::size_t classes = 0;
  const auto samples = reid::load_fusion_samples(loaded, &classes);
  CHECK(classes == 3);
  CHECK(samples[4].label == 1);
  CHECK(samples[4].local.size() == 4);

  const std::string base = reid::format_manifest(m);
  auto variant = [&](const std::string& from, const std::string& to) {
    std::string t = base;
    const auto pos = t.find(from);
    REQUIRE(pos != std::string::npos);
    t.replace(pos, from.size(), to);
    write_text(dir / "variant.txt", t);
    return dir.path() / "variant.txt";
  };
  CHECK_THROWS_AS(reid::load_manifest(variant("image=img1 ", "image=img0 ")), reid::DuplicateIdError);
  CHECK_THROWS_AS(reid::load_manifest(variant("hm3.bin", "nothere.bin")), reid::MissingBlobError);
  CHECK_THROWS_AS(reid::load_manifest(variant("kp3.txt", "nothere.txt")), reid::MissingBlobError);
  CHECK_THROWS_AS(reid::load_manifest(variant("feature_dim=6", "feature_dim=5")), reid::DimensionError);
  CHECK_THROWS_AS(reid::load_manifest(variant("features.bin#5", "features.bin#6")), reid::DimensionError);
  CHECK_THROWS_AS(reid::load_manifest(variant("heatmap=21x8x8", "heatmap=20x8x8")), reid::DimensionError);
  CHECK_THROWS_AS(reid::load_manifest(dir.path() / "absent.txt"), reid::MissingBlobError);
}

TEST_CASE("key-point file format") {
  reid_test::ScratchDir dir("kp");
  write_text(dir / "a.txt", "3 1.5 2 1\n20 0 0 0\n");
  const auto kp = reid::load_keypoints(dir.path() / "a.txt");
  CHECK(kp.visible[2]);
  CHECK(kp.points[2].x == 1.5);
  CHECK_FALSE(kp.visible[19]);
  write_text(dir / "b.txt", "21 0 0 1\n");
  CHECK_THROWS_AS(reid::load_keypoints(dir.path() / "b.txt"), reid::FormatError);
  write_text(dir / "c.txt", "1 0 0 2\n");
  CHECK_THROWS_AS(reid::load_keypoints(dir.path() / "c.txt"), reid::FormatError);
  write_text(dir / "d.txt", "1 0 0\n");
  CHECK_THROWS_AS(reid::load_keypoints(dir.path() / "d.txt"), reid::FormatError);
}
