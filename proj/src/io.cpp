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

#include "cbf/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cbf/error.hpp"
#include "detail/kv.hpp"

namespace cbf {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::size_t Tensor::element_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(b[at + i])) << (8 * i);
  return v;
}

[[noreturn]] void bad_tensor(const std::string& m) {
  throw Error(ErrorKind::Format, "tensor: " + m);
}

}  // namespace

std::string encode_tensor(const Tensor& t) {
  const std::size_t n = t.element_count();
  if ((t.dtype == DType::F32 ? t.f32.size() : t.i8.size()) != n)
    bad_tensor("payload length does not match the dimensions");
  std::string s = "CBFT";
  put_u32(s, kTensorVersion);
  put_u32(s, std::uint32_t(t.dims.size()));
  for (auto d : t.dims) put_u32(s, d);
  s.push_back(char(t.dtype));
  if (t.dtype == DType::F32) {
    for (float f : t.f32) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(s, bits);
    }
  } else {
    for (auto v : t.i8) s.push_back(char(v));
  }
  return s;
}

Tensor decode_tensor(std::string_view b) {
  if (b.size() < 13 || b.substr(0, 4) != "CBFT") bad_tensor("missing CBFT header");
  if (get_u32(b, 4) != kTensorVersion) bad_tensor("unsupported version " + std::to_string(get_u32(b, 4)));
  const std::uint32_t ndim = get_u32(b, 8);
  if (ndim == 0 || ndim > 8) bad_tensor("invalid rank " + std::to_string(ndim));
  std::size_t at = 12;
  if (b.size() < at + 4 * std::size_t(ndim) + 1) bad_tensor("truncated header");
  Tensor t;
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < ndim; ++i, at += 4) {
    t.dims.push_back(get_u32(b, at));
    n *= t.dims.back();
    if (n > (std::size_t(1) << 34)) bad_tensor("dimensions too large");
  }
  const auto tag = std::uint8_t(b[at++]);
  if (tag > 1) bad_tensor("unknown dtype " + std::to_string(tag));
  t.dtype = DType(tag);
  const std::size_t width = t.dtype == DType::F32 ? 4 : 1;
  if (b.size() - at != n * width) bad_tensor("payload length does not match the dimensions");
  if (t.dtype == DType::F32) {
    t.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i, at += 4) {
      const std::uint32_t bits = get_u32(b, at);
      std::memcpy(&t.f32[i], &bits, 4);
    }
  } else {
    t.i8.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.i8[i] = std::int8_t(b[at + i]);
  }
  return t;
}

Tensor read_tensor(const fs::path& path) { return decode_tensor(read_text(path)); }

void write_tensor(const fs::path& path, const Tensor& t) { write_text(path, encode_tensor(t)); }

Tensor image_tensor(const RasterImage& image) {
  return Tensor{{std::uint32_t(image.height()), std::uint32_t(image.width()),
                 std::uint32_t(image.channels())},
                DType::F32, image.data(), {}};
}

RasterImage image_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dtype != DType::F32) bad_tensor("an image must be [H, W, C] float32");
  return RasterImage(int(t.dims[1]), int(t.dims[0]), int(t.dims[2]), t.f32);
}

Tensor probmap_tensor(const ProbMap& probs) {
  return Tensor{{std::uint32_t(probs.height()), std::uint32_t(probs.width()),
                 std::uint32_t(probs.classes())},
                DType::F32, probs.probs(), {}};
}

ProbMap ingest_probmap(const Tensor& t, std::size_t n_classes) {
  if (t.dims.size() != 3 || t.dtype != DType::F32)
    bad_tensor("a probability map must be [H, W, n] float32");
  const std::size_t n = t.dims[2];
  if (n == 0 || (n_classes && n != n_classes))
    bad_tensor("probability map has " + std::to_string(n) + " classes, expected " +
               std::to_string(n_classes));
  std::vector<float> probs = t.f32;
  const std::size_t pixels = std::size_t(t.dims[0]) * t.dims[1];
  for (std::size_t p = 0; p < pixels; ++p) {
    float* row = probs.data() + p * n;
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(row[c]) || row[c] < 0.0f || row[c] > 1.0f + 1e-3f)
        bad_tensor("pixel " + std::to_string(p) + " has an entry outside [0,1]");
      sum += row[c];
    }
    if (std::fabs(sum - 1.0) > 1e-3)
      bad_tensor("pixel " + std::to_string(p) + " sums to " + std::to_string(sum));
    for (std::size_t c = 0; c < n; ++c) row[c] = std::min(1.0f, float(row[c] / sum));
  }
  return ProbMap(int(t.dims[1]), int(t.dims[0]), int(n), std::move(probs));
}

Tensor extra_tensor(const ExtraChannels& extra) {
  extra.validate();
  Tensor t{{2, std::uint32_t(extra.height), std::uint32_t(extra.width)}, DType::I8, {}, {}};
  t.i8 = extra.shadow;
  t.i8.insert(t.i8.end(), extra.elevation.begin(), extra.elevation.end());
  return t;
}

ExtraChannels extra_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[0] != 2 || t.dtype != DType::I8)
    bad_tensor("extra channels must be [2, H, W] int8");
  ExtraChannels e;
  e.height = int(t.dims[1]);
  e.width = int(t.dims[2]);
  const std::size_t n = std::size_t(e.width) * std::size_t(e.height);
  e.shadow.assign(t.i8.begin(), t.i8.begin() + std::ptrdiff_t(n));
  e.elevation.assign(t.i8.begin() + std::ptrdiff_t(n), t.i8.end());
  e.validate();
  return e;
}

std::array<std::uint8_t, 3> class_color(ClassId id) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette{{
      {34, 139, 34}, {181, 137, 84}, {128, 128, 128}, {200, 40, 40}, {30, 90, 200}, {230, 230, 250},
      {250, 210, 0}, {255, 255, 255}, {140, 60, 160}, {0, 170, 170}, {255, 140, 0}, {90, 50, 20}}};
  return kPalette[std::size_t(id) % kPalette.size()];
}

namespace {

fs::path palette_path(const fs::path& raster) {
  fs::path p = raster;
  p += ".palette";
  return p;
}

}  // namespace

void write_label_raster(const fs::path& path, const LabelMap& labels) {
  if (!labels.taxonomy()) throw Error(ErrorKind::Taxonomy, "label map carries no taxonomy");
  if (labels.class_count() > 256) throw Error(ErrorKind::Format, "more than 256 classes");
  std::string s = "P5\n" + std::to_string(labels.width()) + " " + std::to_string(labels.height()) +
                  "\n255\n";
  s.reserve(s.size() + labels.pixel_count());
  for (std::size_t p = 0; p < labels.pixel_count(); ++p) s.push_back(char(std::uint8_t(labels[p])));
  write_text(path, s);
  std::string pal = "# id name r g b\n";
  for (const auto& c : labels.taxonomy()->classes()) {
    const auto rgb = class_color(c.id);
    pal += std::to_string(c.id) + " " + c.name + " " + std::to_string(rgb[0]) + " " +
           std::to_string(rgb[1]) + " " + std::to_string(rgb[2]) + "\n";
  }
  write_text(palette_path(path), pal);
}

LabelMap read_label_raster(const fs::path& path, TaxonomyPtr taxonomy) {
  const std::string b = read_text(path);
  const std::string where = "label raster '" + path.string() + "'";
  std::size_t at = 0;
  auto token = [&]() {
    for (;;) {
      while (at < b.size() && std::isspace(static_cast<unsigned char>(b[at]))) ++at;
      if (at < b.size() && b[at] == '#') {
        while (at < b.size() && b[at] != '\n') ++at;
        continue;
      }
      break;
    }
    const std::size_t s = at;
    while (at < b.size() && !std::isspace(static_cast<unsigned char>(b[at]))) ++at;
    return std::string_view(b).substr(s, at - s);
  };
  if (token() != "P5") throw Error(ErrorKind::Format, where + ": not a binary PGM");
  const int w = detail::parse_number<int>(token(), ErrorKind::Format, where);
  const int h = detail::parse_number<int>(token(), ErrorKind::Format, where);
  const int maxval = detail::parse_number<int>(token(), ErrorKind::Format, where);
  if (w <= 0 || h <= 0 || maxval != 255) throw Error(ErrorKind::Format, where + ": bad header");
  ++at;
  const std::size_t n = std::size_t(w) * std::size_t(h);
  if (b.size() < at || b.size() - at != n) throw Error(ErrorKind::Format, where + ": bad payload length");

  std::vector<std::pair<ClassId, std::string>> palette;
  if (fs::exists(palette_path(path))) {
    std::istringstream in(read_text(palette_path(path)));
    std::string line;
    while (std::getline(in, line)) {
      const auto f = detail::split_ws(detail::trim(line));
      if (f.empty() || f[0][0] == '#') continue;
      if (f.size() != 5) throw Error(ErrorKind::Format, where + ": malformed palette line");
      palette.emplace_back(detail::parse_number<ClassId>(f[0], ErrorKind::Format, where), f[1]);
    }
  }
  if (!taxonomy) {
    if (palette.empty()) throw Error(ErrorKind::Taxonomy, where + ": no palette and no taxonomy");
    std::vector<ClassInfo> classes;
    for (const auto& [id, name] : palette) classes.push_back({id, name, ElevationBand::Low});
    taxonomy = std::make_shared<const Taxonomy>(std::move(classes));
  } else {
    for (const auto& [id, name] : palette)
      if (id < 0 || std::size_t(id) >= taxonomy->size() || (*taxonomy)[id].name != name)
        throw Error(ErrorKind::Taxonomy, where + ": palette does not match the taxonomy");
  }
  std::vector<ClassId> labels(n);
  for (std::size_t p = 0; p < n; ++p) labels[p] = ClassId(std::uint8_t(b[at + p]));
  return LabelMap(w, h, std::move(labels), std::move(taxonomy));
}

std::string serialize_taxonomy(const Taxonomy& taxonomy) {
  std::string s = "# id name band\n";
  for (const auto& c : taxonomy.classes())
    s += std::to_string(c.id) + " " + c.name + " " + to_string(c.band) + "\n";
  return s;
}

Taxonomy parse_taxonomy(std::string_view text) {
  std::vector<ClassInfo> classes;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto f = detail::split_ws(detail::trim(line));
    if (f.empty()) continue;
    const std::string where = "taxonomy line " + std::to_string(line_no);
    if (f.size() != 3) throw Error(ErrorKind::Taxonomy, where + ": expected 'id name band'");
    classes.push_back({detail::parse_number<ClassId>(f[0], ErrorKind::Taxonomy, where), f[1],
                       parse_elevation_band(f[2])});
  }
  if (classes.empty()) throw Error(ErrorKind::Taxonomy, "taxonomy has no classes");
  return Taxonomy(std::move(classes));
}

namespace {

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_key(ConfigFile& cfg, std::string_view key, std::string_view raw) {
  using detail::parse_number;
  constexpr auto kP = ErrorKind::Parameter;
  const std::string value = unquote(detail::trim(raw));
  const std::string what = "config key '" + std::string(key) + "'";
  auto& p = cfg.pipeline;
  auto& t = p.training;
  if (key == "k_target") p.k_target = parse_number<int>(value, kP, what);
  else if (key == "compactness") p.compactness = parse_number<double>(value, kP, what);
  else if (key == "slic_iterations") p.slic_iterations = parse_number<int>(value, kP, what);
  else if (key == "f_t") p.f_t = parse_number<double>(value, kP, what);
  else if (key == "max_iterations") p.max_iterations = parse_number<int>(value, kP, what);
  else if (key == "convergence_epsilon") p.convergence_epsilon = parse_number<double>(value, kP, what);
  else if (key == "window_radius") p.window_radius = parse_number<int>(value, kP, what);
  else if (key == "hidden") p.hidden = parse_number<std::size_t>(value, kP, what);
  else if (key == "learning_rate") t.learning_rate = parse_number<double>(value, kP, what);
  else if (key == "adam_beta1") t.adam_beta1 = parse_number<double>(value, kP, what);
  else if (key == "adam_beta2") t.adam_beta2 = parse_number<double>(value, kP, what);
  else if (key == "adam_eps") t.adam_eps = parse_number<double>(value, kP, what);
  else if (key == "epochs") t.epochs = parse_number<int>(value, kP, what);
  else if (key == "batch") t.batch = parse_number<std::size_t>(value, kP, what);
  else if (key == "seed") p.seed = t.seed = parse_number<std::uint64_t>(value, kP, what);
  else if (key == "jobs") p.jobs = parse_number<int>(value, kP, what);
  else if (key == "taxonomy") cfg.taxonomy_path = value;
  else if (key == "rules") cfg.rules_path = value;
  else throw Error(kP, "unknown config key '" + std::string(key) + "'");
}

ConfigFile parse_config(std::string_view text) {
  ConfigFile cfg;
  for (const auto& e : detail::parse_kv(text, ErrorKind::Parameter)) {
    try {
      apply_config_key(cfg, e.key, e.value);
    } catch (const Error& err) {
      throw Error(err.kind(), "line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  cfg.pipeline.validate();
  return cfg;
}

std::string serialize_config(const ConfigFile& cfg) {
  const auto& p = cfg.pipeline;
  const auto& t = p.training;
  std::string s;
  auto kv = [&s](const char* k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
  kv("k_target", std::to_string(p.k_target));
  kv("compactness", fmt17(p.compactness));
  kv("slic_iterations", std::to_string(p.slic_iterations));
  kv("f_t", fmt17(p.f_t));
  kv("max_iterations", std::to_string(p.max_iterations));
  kv("convergence_epsilon", fmt17(p.convergence_epsilon));
  kv("window_radius", std::to_string(p.window_radius));
  kv("hidden", std::to_string(p.hidden));
  kv("learning_rate", fmt17(t.learning_rate));
  kv("adam_beta1", fmt17(t.adam_beta1));
  kv("adam_beta2", fmt17(t.adam_beta2));
  kv("adam_eps", fmt17(t.adam_eps));
  kv("epochs", std::to_string(t.epochs));
  kv("batch", std::to_string(t.batch));
  kv("seed", std::to_string(p.seed));
  kv("jobs", std::to_string(p.jobs));
  if (cfg.taxonomy_path) kv("taxonomy", "\"" + *cfg.taxonomy_path + "\"");
  if (cfg.rules_path) kv("rules", "\"" + *cfg.rules_path + "\"");
  return s;
}

namespace {

std::uint64_t checksum(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace

std::string serialize_params(const ClassifierParams& params) {
  std::string s = "CBFP 1\n";
  s += "feature_dim " + std::to_string(params.feature_dim()) + "\n";
  s += "classes " + std::to_string(params.n_classes()) + "\n";
  s += "hidden " + std::to_string(params.hidden()) + "\n";
  s += "values " + std::to_string(params.values().size()) + "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum(params.values())));
  s += std::string("checksum ") + buf + "\n";
  for (double v : params.values()) s += fmt17(v) + "\n";
  return s;
}

ClassifierParams parse_params(std::string_view text) {
  constexpr auto kF = ErrorKind::Format;
  std::istringstream in{std::string(text)};
  std::string line;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw Error(kF, std::string("checkpoint: missing '") + key + "'");
    const auto f = detail::split_ws(detail::trim(line));
    if (f.size() != 2 || f[0] != key) throw Error(kF, std::string("checkpoint: expected '") + key + "'");
    return f[1];
  };
  if (next("CBFP") != "1") throw Error(kF, "checkpoint: unsupported version");
  const auto d = detail::parse_number<std::size_t>(next("feature_dim"), kF, "checkpoint");
  const auto n = detail::parse_number<std::size_t>(next("classes"), kF, "checkpoint");
  const auto h = detail::parse_number<std::size_t>(next("hidden"), kF, "checkpoint");
  const auto count = detail::parse_number<std::size_t>(next("values"), kF, "checkpoint");
  const auto sum = next("checksum");
  if (d == 0 || n == 0 || d > 1u << 16 || n > 1u << 16 || h > 1u << 16)
    throw Error(kF, "checkpoint: implausible dimensions");
  ClassifierParams p(d, n, h);
  if (p.values().size() != count) throw Error(kF, "checkpoint: value count does not match dimensions");
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error(kF, "checkpoint: truncated");
    p.values()[i] = detail::parse_number<double>(line, kF, "checkpoint value");
  }
  while (std::getline(in, line))
    if (!detail::trim(line).empty()) throw Error(kF, "checkpoint: trailing data");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum(p.values())));
  if (sum != buf) throw Error(kF, "checkpoint: checksum mismatch");
  return p;
}

std::string serialize_key_values(const KeyValues& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += k + " = " + v + "\n";
  return s;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  for (auto& e : detail::parse_kv(text, ErrorKind::Format)) out.emplace_back(e.key, e.value);
  return out;
}

std::optional<std::string> lookup(const KeyValues& kv, std::string_view key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return std::nullopt;
}

std::string correction_log_csv(const CorrectionLog& log, const Taxonomy& taxonomy) {
  std::string s = "unit_id,old,new,rule_id\n";
  for (const auto& c : log.entries)
    s += std::to_string(c.unit) + "," + taxonomy[c.old_class].name + "," + taxonomy[c.new_class].name +
         "," + c.rule_id + "\n";
  return s;
}

}  // namespace cbf
