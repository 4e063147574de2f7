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

#include "reid/blob_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "reid/error.hpp"

namespace reid {
namespace {

constexpr std::string_view kHeatmapMagic = "RIDHMAP1";
constexpr std::string_view kDistanceMagic = "RIDDIST1";
constexpr std::string_view kEmbeddingMagic = "RIDEMBD1";
constexpr std::string_view kFusionMagic = "RIDFUSE1";

class ByteWriter {
 public:
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32s(std::span<const double> vs) {
    for (double v : vs) f32(v);
  }
  Bytes take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view what)
      : bytes_(bytes), what_(what) {}

  void magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0) {
      throw FormatError(std::string(what_) + ": bad magic, expected " + std::string(m));
    }
    pos_ += m.size();
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f32s(std::span<double> dst) {
    need(dst.size() * 4);
    for (double& v : dst) v = f32();
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void finish() const {
    if (remaining() != 0) {
      throw FormatError(std::string(what_) + ": " + std::to_string(remaining()) +
                        " trailing bytes");
    }
  }
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(std::string(what_) + ": truncated payload");
  }
  // Element-count check that cannot overflow on hostile headers.
  void need_f32(unsigned __int128 elements) const {
    if (elements * 4 > remaining()) throw FormatError(std::string(what_) + ": truncated payload");
  }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw DimensionError(std::string(what) + " exceeds 32-bit range");
  return static_cast<std::uint32_t>(v);
}

Bytes read_prefix(const std::filesystem::path& path, std::size_t n, std::uintmax_t& file_size) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw MissingBlobError("missing file: " + path.string());
  }
  file_size = std::filesystem::file_size(path, ec);
  std::ifstream in(path, std::ios::binary);
  Bytes out(n);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n));
  out.resize(static_cast<std::size_t>(in.gcount()));
  return out;
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw MissingBlobError("missing file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

Bytes encode_heatmap(const HeatmapStack& stack) {
  ByteWriter w;
  w.magic(kHeatmapMagic);
  w.u32(checked_u32(stack.channels(), "channels"));
  w.u32(checked_u32(stack.height(), "height"));
  w.u32(checked_u32(stack.width(), "width"));
  w.f32s(stack.values());
  return w.take();
}

HeatmapStack decode_heatmap(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "heatmap blob");
  r.magic(kHeatmapMagic);
  const std::size_t c = r.u32(), h = r.u32(), wd = r.u32();
  if (c == 0 || h == 0 || wd == 0) throw FormatError("heatmap blob: zero dimension");
  r.need_f32(static_cast<unsigned __int128>(c) * h * wd);
  std::vector<double> values(c * h * wd);
  r.f32s(values);
  r.finish();
  return HeatmapStack(c, h, wd, std::move(values));
}

HeatmapHeader read_heatmap_header(const std::filesystem::path& path) {
  std::uintmax_t size = 0;
  const Bytes head = read_prefix(path, kHeatmapMagic.size() + 12, size);
  ByteReader r(head, "heatmap blob");
  r.magic(kHeatmapMagic);
  HeatmapHeader h{r.u32(), r.u32(), r.u32()};
  const std::uintmax_t expected = kHeatmapMagic.size() + 12 +
                                  std::uintmax_t{4} * h.channels * h.height * h.width;
  if (size != expected) throw FormatError("heatmap blob: size mismatch in " + path.string());
  return h;
}

Bytes encode_distance(const Matrix& distances) {
  ByteWriter w;
  w.magic(kDistanceMagic);
  w.u32(checked_u32(distances.rows(), "rows"));
  w.u32(checked_u32(distances.cols(), "cols"));
  w.f32s(distances.data());
  return w.take();
}

Matrix decode_distance(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "distance blob");
  r.magic(kDistanceMagic);
  const std::size_t rows = r.u32(), cols = r.u32();
  r.need_f32(static_cast<unsigned __int128>(rows) * cols);
  Matrix m(rows, cols);
  r.f32s(m.data());
  r.finish();
  return m;
}

Bytes encode_embeddings(const EmbeddingBlob& blob) {
  const bool has_ori = !blob.orientation.empty();
  if (has_ori && blob.orientation.size() != blob.features.size()) {
    throw DimensionError("embedding blob: orientation rows do not match feature rows");
  }
  ByteWriter w;
  w.magic(kEmbeddingMagic);
  w.u32(checked_u32(blob.features.size(), "count"));
  w.u32(checked_u32(blob.dim, "dim"));
  w.u32(has_ori ? 1 : 0);
  for (std::size_t i = 0; i < blob.features.size(); ++i) {
    if (blob.features[i].size() != blob.dim) {
      throw DimensionError("embedding blob: row " + std::to_string(i) + " has wrong dim");
    }
    w.f32s(blob.features[i]);
    if (has_ori) w.f32s(blob.orientation[i]);
  }
  return w.take();
}

EmbeddingBlob decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "embedding blob");
  r.magic(kEmbeddingMagic);
  const std::size_t count = r.u32();
  EmbeddingBlob blob;
  blob.dim = r.u32();
  const std::uint32_t flag = r.u32();
  if (flag > 1) throw FormatError("embedding blob: bad orientation flag");
  const std::size_t stride = blob.dim + (flag ? kNumOrientations : 0);
  r.need_f32(static_cast<unsigned __int128>(count) * stride);
  blob.features.assign(count, std::vector<double>(blob.dim));
  if (flag) blob.orientation.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    r.f32s(blob.features[i]);
    if (flag) r.f32s(blob.orientation[i]);
  }
  r.finish();
  return blob;
}

EmbeddingHeader read_embedding_header(const std::filesystem::path& path) {
  std::uintmax_t size = 0;
  const Bytes head = read_prefix(path, kEmbeddingMagic.size() + 12, size);
  ByteReader r(head, "embedding blob");
  r.magic(kEmbeddingMagic);
  EmbeddingHeader h;
  h.count = r.u32();
  h.dim = r.u32();
  const std::uint32_t flag = r.u32();
  if (flag > 1) throw FormatError("embedding blob: bad orientation flag");
  h.has_orientation = flag == 1;
  const std::uintmax_t stride = h.dim + (h.has_orientation ? kNumOrientations : 0);
  if (size != kEmbeddingMagic.size() + 12 + 4 * stride * h.count) {
    throw FormatError("embedding blob: size mismatch in " + path.string());
  }
  return h;
}

// Config block: u32 global_dim, u32 local_dim, u32 num_classes,
// u32 hidden_count, u32 hidden[hidden_count], f64 learning_rate,
// u32 batch_size, u32 epochs, u64 seed, f64 alpha_init.
Bytes encode_fusion_checkpoint(const FusionHead& head) {
  const auto& c = head.config();
  ByteWriter w;
  w.magic(kFusionMagic);
  w.u32(checked_u32(c.global_dim, "global_dim"));
  w.u32(checked_u32(c.local_dim, "local_dim"));
  w.u32(checked_u32(c.num_classes, "num_classes"));
  w.u32(checked_u32(c.hidden.size(), "hidden count"));
  for (std::size_t width : c.hidden) w.u32(checked_u32(width, "hidden width"));
  w.f64(c.learning_rate);
  w.u32(checked_u32(c.batch_size, "batch_size"));
  w.u32(checked_u32(c.epochs, "epochs"));
  w.u64(c.seed);
  w.f64(c.alpha_init);
  w.f32s(head.parameters());
  return w.take();
}

FusionHead decode_fusion_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "fusion checkpoint");
  r.magic(kFusionMagic);
  FusionConfig c;
  c.global_dim = r.u32();
  c.local_dim = r.u32();
  c.num_classes = r.u32();
  const std::size_t hidden_count = r.u32();
  r.need_f32(hidden_count);
  c.hidden.resize(hidden_count);
  for (auto& width : c.hidden) width = r.u32();
  c.learning_rate = r.f64();
  c.batch_size = r.u32();
  c.epochs = r.u32();
  c.seed = r.u64();
  c.alpha_init = r.f64();
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("fusion checkpoint: invalid config: ") + e.what());
  }
  unsigned __int128 count = 0;
  unsigned __int128 fan_in = static_cast<unsigned __int128>(c.global_dim) + c.local_dim;
  for (std::size_t width : c.hidden) {
    count += fan_in * width + width;
    fan_in = width;
  }
  count += fan_in * c.num_classes + c.num_classes + 1;
  r.need_f32(count);
  std::vector<double> params(fusion_parameter_count(c));
  r.f32s(params);
  FusionHead head = FusionHead::initialize(c);
  r.finish();
  head.set_parameters(params);
  return head;
}

}  // namespace reid
