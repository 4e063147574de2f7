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

#include "reid/manifest.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "reid/blob_io.hpp"
#include "reid/error.hpp"

namespace reid {
namespace {

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(what + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

BlobRow parse_blob_row(std::string_view text, const std::string& what) {
  const auto hash = text.rfind('#');
  if (hash == std::string_view::npos || hash == 0) {
    throw FormatError(what + ": expected <path>#<row>, got '" + std::string(text) + "'");
  }
  return BlobRow{std::string(text.substr(0, hash)),
                 parse_number<std::size_t>(text.substr(hash + 1), what)};
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::pair<std::string_view, std::string_view> split_kv(std::string_view token, std::size_t line_no) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw FormatError("manifest line " + std::to_string(line_no) + ": expected key=value, got '" +
                      std::string(token) + "'");
  }
  return {token.substr(0, eq), token.substr(eq + 1)};
}

HeatmapGeometry parse_geometry(std::string_view text) {
  HeatmapGeometry g;
  const auto x1 = text.find('x');
  const auto x2 = text.find('x', x1 == std::string_view::npos ? x1 : x1 + 1);
  if (x1 == std::string_view::npos || x2 == std::string_view::npos) {
    throw FormatError("manifest: heatmap geometry must be <channels>x<height>x<width>");
  }
  g.channels = parse_number<std::size_t>(text.substr(0, x1), "heatmap channels");
  g.height = parse_number<std::size_t>(text.substr(x1 + 1, x2 - x1 - 1), "heatmap height");
  g.width = parse_number<std::size_t>(text.substr(x2 + 1), "heatmap width");
  if (g.channels == 0 || g.height == 0 || g.width == 0) {
    throw FormatError("manifest: heatmap geometry must be positive");
  }
  return g;
}

ManifestRecord parse_record(std::span<const std::string_view> tokens, std::size_t line_no) {
  ManifestRecord rec;
  bool has_image = false, has_identity = false, has_camera = false, has_features = false;
  const std::string where = "manifest line " + std::to_string(line_no);
  for (auto token : tokens) {
    const auto [key, value] = split_kv(token, line_no);
    if (key == "image") {
      rec.image_id = std::string(value);
      has_image = true;
    } else if (key == "identity") {
      rec.identity = parse_number<int>(value, where + " identity");
      has_identity = true;
    } else if (key == "camera") {
      rec.camera = parse_number<int>(value, where + " camera");
      has_camera = true;
    } else if (key == "features") {
      rec.features = parse_blob_row(value, where + " features");
      has_features = true;
    } else if (key == "orientation") {
      try {
        rec.orientation = parse_orientation(value);
      } catch (const InvalidArgument& e) {
        throw FormatError(where + ": " + e.what());
      }
    } else if (key == "local") {
      rec.local = parse_blob_row(value, where + " local");
    } else if (key == "heatmap") {
      rec.heatmap = std::string(value);
    } else if (key == "keypoints") {
      rec.keypoints = std::string(value);
    } else {
      throw FormatError(where + ": unknown record field '" + std::string(key) + "'");
    }
  }
  if (!has_image || !has_identity || !has_camera || !has_features) {
    throw FormatError(where + ": record needs image, identity, camera and features");
  }
  return rec;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  bool seen_dim = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].starts_with('#')) continue;
    if (!seen_header) {
      if (tokens.size() != 2 || tokens[0] != "reid-manifest") {
        throw FormatError("manifest: missing 'reid-manifest <version>' header");
      }
      m.schema_version = parse_number<int>(tokens[1], "manifest schema version");
      if (m.schema_version != kManifestSchemaVersion) {
        throw FormatError("manifest: unsupported schema version " + std::to_string(m.schema_version));
      }
      seen_header = true;
      continue;
    }
    if (tokens[0] == "record") {
      m.records.push_back(parse_record(std::span(tokens).subspan(1), line_no));
      continue;
    }
    if (tokens.size() != 1) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": unexpected content");
    }
    const auto [key, value] = split_kv(tokens[0], line_no);
    if (key == "feature_dim") {
      m.feature_dim = parse_number<std::size_t>(value, "feature_dim");
      seen_dim = true;
    } else if (key == "local_dim") {
      m.local_dim = parse_number<std::size_t>(value, "local_dim");
    } else if (key == "heatmap") {
      m.heatmap = parse_geometry(value);
    } else {
      throw FormatError("manifest: unknown header field '" + std::string(key) + "'");
    }
  }
  if (!seen_header) throw FormatError("manifest: empty file");
  if (!seen_dim || m.feature_dim == 0) throw FormatError("manifest: feature_dim must be set");
  return m;
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "reid-manifest " << m.schema_version << "\n";
  out << "feature_dim=" << m.feature_dim << "\n";
  if (m.local_dim > 0) out << "local_dim=" << m.local_dim << "\n";
  if (m.heatmap) {
    out << "heatmap=" << m.heatmap->channels << "x" << m.heatmap->height << "x" << m.heatmap->width
        << "\n";
  }
  for (const auto& r : m.records) {
    out << "record image=" << r.image_id << " identity=" << r.identity << " camera=" << r.camera
        << " features=" << r.features.path << "#" << r.features.row;
    if (r.orientation) out << " orientation=" << orientation_name(*r.orientation);
    if (r.local) out << " local=" << r.local->path << "#" << r.local->row;
    if (r.heatmap) out << " heatmap=" << *r.heatmap;
    if (r.keypoints) out << " keypoints=" << *r.keypoints;
    out << "\n";
  }
  return out.str();
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const Bytes raw = read_file(path);
  DatasetManifest m = parse_manifest(std::string(raw.begin(), raw.end()), path.parent_path());

  std::unordered_set<std::string> ids;
  std::map<std::string, EmbeddingHeader> blobs;
  auto header_of = [&](const std::string& rel) -> const EmbeddingHeader& {
    auto it = blobs.find(rel);
    if (it == blobs.end()) it = blobs.emplace(rel, read_embedding_header(m.resolve(rel))).first;
    return it->second;
  };
  auto check_row = [&](const BlobRow& ref, std::size_t dim, const std::string& image,
                       const char* what) {
    const auto& h = header_of(ref.path);
    if (h.dim != dim) {
      throw DimensionError(std::string(what) + " blob " + ref.path + " has dim " +
                           std::to_string(h.dim) + ", manifest declares " + std::to_string(dim) +
                           " (record " + image + ")");
    }
    if (ref.row >= h.count) {
      throw DimensionError(std::string(what) + " row " + std::to_string(ref.row) +
                           " out of range for " + ref.path + " (record " + image + ")");
    }
  };

  for (const auto& r : m.records) {
    if (!ids.insert(r.image_id).second) throw DuplicateIdError("duplicate image id " + r.image_id);
    check_row(r.features, m.feature_dim, r.image_id, "feature");
    if (r.local) {
      if (m.local_dim == 0) throw FormatError("manifest: local rows present but local_dim unset");
      check_row(*r.local, m.local_dim, r.image_id, "local");
    }
    if (r.heatmap) {
      if (!m.heatmap) throw FormatError("manifest: heatmap blobs present but geometry unset");
      const auto h = read_heatmap_header(m.resolve(*r.heatmap));
      if (h.channels != m.heatmap->channels || h.height != m.heatmap->height ||
          h.width != m.heatmap->width) {
        throw DimensionError("heatmap blob " + *r.heatmap + " is " + std::to_string(h.channels) +
                             "x" + std::to_string(h.height) + "x" + std::to_string(h.width) +
                             ", manifest declares " + std::to_string(m.heatmap->channels) + "x" +
                             std::to_string(m.heatmap->height) + "x" +
                             std::to_string(m.heatmap->width));
      }
    }
    if (r.keypoints) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(m.resolve(*r.keypoints), ec)) {
        throw MissingBlobError("missing key-point file: " + m.resolve(*r.keypoints).string());
      }
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string text = format_manifest(manifest);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

class BlobCache {
 public:
  explicit BlobCache(const DatasetManifest& m) : m_(m) {}
  const EmbeddingBlob& get(const std::string& rel) {
    auto it = cache_.find(rel);
    if (it == cache_.end()) it = cache_.emplace(rel, decode_embeddings(read_file(m_.resolve(rel)))).first;
    return it->second;
  }

 private:
  const DatasetManifest& m_;
  std::map<std::string, EmbeddingBlob> cache_;
};

const std::vector<double>& row_of(BlobCache& cache, const BlobRow& ref, std::size_t dim) {
  const auto& blob = cache.get(ref.path);
  if (blob.dim != dim || ref.row >= blob.features.size()) {
    throw DimensionError("embedding blob " + ref.path + ": row or dim mismatch");
  }
  return blob.features[ref.row];
}

}  // namespace

std::vector<EmbeddingRecord> load_embeddings(const DatasetManifest& manifest) {
  BlobCache cache(manifest);
  std::vector<EmbeddingRecord> out;
  out.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    EmbeddingRecord rec;
    rec.image_id = r.image_id;
    rec.identity = r.identity;
    rec.camera = r.camera;
    rec.feature = row_of(cache, r.features, manifest.feature_dim);
    const auto& blob = cache.get(r.features.path);
    if (!blob.orientation.empty()) {
      rec.orientation = OrientationLikelihood::from_weights(blob.orientation[r.features.row]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

HeatmapStack load_heatmap(const DatasetManifest& manifest, const ManifestRecord& record) {
  if (!record.heatmap) throw InvalidArgument("record " + record.image_id + " has no heatmap");
  return decode_heatmap(read_file(manifest.resolve(*record.heatmap)));
}

KeypointAnnotation load_keypoints(const std::filesystem::path& path) {
  const Bytes raw = read_file(path);
  std::istringstream in(std::string(raw.begin(), raw.end()));
  KeypointAnnotation a;
  a.points.assign(kNumKeypoints, Keypoint{});
  a.visible.assign(kNumKeypoints, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].starts_with('#')) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (tokens.size() != 4) throw FormatError(where + ": expected '<id> <x> <y> <visible>'");
    const int id = parse_number<int>(tokens[0], where);
    if (id < 1 || id > static_cast<int>(kNumKeypoints)) {
      throw FormatError(where + ": key-point id outside 1..20");
    }
    const auto k = static_cast<std::size_t>(id - 1);
    a.points[k] = Keypoint{parse_number<double>(tokens[1], where), parse_number<double>(tokens[2], where)};
    const int vis = parse_number<int>(tokens[3], where);
    if (vis != 0 && vis != 1) throw FormatError(where + ": visibility must be 0 or 1");
    a.visible[k] = vis == 1;
  }
  return a;
}

std::string format_keypoints(const KeypointAnnotation& a) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    out << (k + 1) << " " << a.points[k].x << " " << a.points[k].y << " " << (a.visible[k] ? 1 : 0)
        << "\n";
  }
  return out.str();
}

std::vector<FusionSample> load_fusion_samples(const DatasetManifest& manifest,
                                              std::size_t* num_classes) {
  if (manifest.local_dim == 0) throw FormatError("manifest: fusion training needs local_dim");
  std::set<int> identities;
  for (const auto& r : manifest.records) identities.insert(r.identity);
  std::map<int, std::size_t> label_of;
  for (int id : identities) label_of.emplace(id, label_of.size());
  if (num_classes != nullptr) *num_classes = label_of.size();

  BlobCache cache(manifest);
  std::vector<FusionSample> out;
  out.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    if (!r.local) throw FormatError("record " + r.image_id + " has no local feature row");
    out.push_back(FusionSample{row_of(cache, r.features, manifest.feature_dim),
                               row_of(cache, *r.local, manifest.local_dim), label_of.at(r.identity)});
  }
  return out;
}

}  // namespace reid
