// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbf/classifier.hpp"
#include "cbf/core.hpp"
#include "cbf/loop.hpp"

namespace cbf {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

enum class DType : std::uint8_t { F32 = 0, I8 = 1 };

/// CBFT tensor: "CBFT", u32 version, u32 ndim, ndim x u32 dims, u8 dtype,
/// then the row-major payload. Everything little-endian.
struct Tensor {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::F32;
  std::vector<float> f32;
  std::vector<std::int8_t> i8;

  std::size_t element_count() const;
};

inline constexpr std::uint32_t kTensorVersion = 1;

std::string encode_tensor(const Tensor& t);
/// Throws ErrorKind::Format on any structural problem.
Tensor decode_tensor(std::string_view bytes);
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& t);

/// [H, W, C] float32.
Tensor image_tensor(const RasterImage& image);
RasterImage image_from_tensor(const Tensor& t);

/// [H, W, n] float32.
Tensor probmap_tensor(const ProbMap& probs);

/// Accepts [H, W, n] float32 rows whose sums lie within 1e-3 of one and
/// renormalizes them; anything else throws ErrorKind::Format.
ProbMap ingest_probmap(const Tensor& t, std::size_t n_classes);

/// [2, H, W] int8: shadow plane then elevation plane.
Tensor extra_tensor(const ExtraChannels& extra);
ExtraChannels extra_from_tensor(const Tensor& t);

/// Display color per class id, cycling a fixed palette.
std::array<std::uint8_t, 3> class_color(ClassId id);

/// Binary PGM (P5, maxval 255) plus `<path>.palette` with lines "id name r g b".
void write_label_raster(const std::filesystem::path& path, const LabelMap& labels);
/// Reads a PGM label raster. Without a taxonomy one is built from the
/// palette sidecar; with one, the sidecar (if present) must agree.
LabelMap read_label_raster(const std::filesystem::path& path, TaxonomyPtr taxonomy = nullptr);

/// Lines "id name band" with `#` comments.
std::string serialize_taxonomy(const Taxonomy& taxonomy);
Taxonomy parse_taxonomy(std::string_view text);

/// Flat key-value configuration mirroring PipelineConfig, plus optional
/// taxonomy and rule file paths. Values may be quoted.
struct ConfigFile {
  PipelineConfig pipeline;
  std::optional<std::string> taxonomy_path;
  std::optional<std::string> rules_path;
};

/// Applies one key to the config; throws ErrorKind::Parameter for unknown
/// keys or bad values.
void apply_config_key(ConfigFile& cfg, std::string_view key, std::string_view value);
ConfigFile parse_config(std::string_view text);
std::string serialize_config(const ConfigFile& cfg);

/// Text checkpoint with dimensions, exact values and a checksum.
std::string serialize_params(const ClassifierParams& params);
ClassifierParams parse_params(std::string_view text);

/// Ordered key-value records (manifest, split files).
using KeyValues = std::vector<std::pair<std::string, std::string>>;
std::string serialize_key_values(const KeyValues& kv);
KeyValues parse_key_values(std::string_view text);
std::optional<std::string> lookup(const KeyValues& kv, std::string_view key);

std::string correction_log_csv(const CorrectionLog& log, const Taxonomy& taxonomy);

}  // namespace cbf
