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

#include "cbf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <span>

#include "cbf/error.hpp"
#include "cbf/rng.hpp"
#include "detail/kv.hpp"

namespace cbf {

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Rectangle: return "rect";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Road: return "road";
  }
  return "?";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error(ErrorKind::Format, "unknown split '" + std::string(text) + "'");
}

void SceneSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "scene spec: " + m); };
  if (!taxonomy || taxonomy->empty()) fail("taxonomy is required");
  if (width <= 0 || height <= 0) fail("dimensions must be positive");
  const auto n = ClassId(taxonomy->size());
  auto check_class = [&](ClassId c) {
    if (c < 0 || c >= n) fail("class id " + std::to_string(c) + " outside the taxonomy");
  };
  check_class(background);
  if (colors.size() != taxonomy->size()) fail("one color per class is required");
  for (const auto& rgb : colors)
    for (float v : rgb)
      if (!(v >= 0.0f && v <= 1.0f)) fail("colors must lie in [0,1]");
  if (!(noise_sigma >= 0.0f)) fail("noise_sigma must be non-negative");
  if (max_retries < 1) fail("max_retries must be at least 1");
  bool any_shadow = false;
  std::set<ClassId> used{background};
  for (const auto& s : shapes) {
    check_class(s.cls);
    if (s.on) check_class(*s.on);
    if (s.count_min < 0 || s.count_min > s.count_max) fail("invalid count range");
    if (s.size_min < 1 || s.size_min > s.size_max) fail("invalid size range");
    if (s.look) check_class(*s.look);
    if (!(s.blend >= 0.0f && s.blend <= 1.0f)) fail("blend must lie in [0,1]");
    any_shadow |= s.casts_shadow;
    used.insert(s.cls);
  }
  if (any_shadow) {
    if (shadow.width < 1) fail("shadow width must be at least 1");
    if (shadow.dx == 0 && shadow.dy == 0) fail("shadow offset must be non-zero");
    if (!(shadow.factor > 0.0f && shadow.factor <= 1.0f)) fail("shadow factor must be in (0,1]");
  }
  for (auto a = used.begin(); a != used.end(); ++a)
    for (auto b = std::next(a); b != used.end(); ++b) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = double(colors[*a][c]) - double(colors[*b][c]);
        d2 += d * d;
      }
      if (std::sqrt(d2) < 3.0 * double(noise_sigma))
        fail("mean colors of '" + (*taxonomy)[*a].name + "' and '" + (*taxonomy)[*b].name +
             "' are closer than 3 sigma");
    }
}

namespace {

struct Placement {
  std::vector<std::uint32_t> pixels;
  std::vector<std::uint32_t> strip;
  bool fits = false;
};

/// Rectangles and ellipses are anchored at a random pixel of `anchors` when
/// it is non-empty, and anywhere in the frame otherwise.
Placement draw_shape(const ShapeSpec& s, int w, int h, std::span<const std::uint32_t> anchors,
                     Rng& rng) {
  Placement p;
  auto idx = [w](int x, int y) { return std::uint32_t(y) * std::uint32_t(w) + std::uint32_t(x); };
  switch (s.kind) {
    case ShapeKind::Road: {
      const int width = int(rng.uniform_int(s.size_min, s.size_max));
      const bool horizontal = rng.bernoulli(0.5);
      const int extent = horizontal ? h : w;
      if (width > extent) return p;
      const int o = int(rng.uniform_int(0, extent - width));
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int t = horizontal ? y : x;
          if (t >= o && t < o + width) p.pixels.push_back(idx(x, y));
        }
      break;
    }
    case ShapeKind::Rectangle:
    case ShapeKind::Ellipse: {
      const int sw = int(rng.uniform_int(s.size_min, s.size_max));
      const int sh = int(rng.uniform_int(s.size_min, s.size_max));
      if (sw > w || sh > h) return p;
      int x0, y0;
      if (anchors.empty()) {
        x0 = int(rng.uniform_int(0, w - sw));
        y0 = int(rng.uniform_int(0, h - sh));
      } else {
        const auto a = anchors[std::size_t(rng.uniform_int(0, std::int64_t(anchors.size()) - 1))];
        x0 = std::min(int(a % std::uint32_t(w)), w - sw);
        y0 = std::min(int(a / std::uint32_t(w)), h - sh);
      }
      const double cx = x0 + (sw - 1) / 2.0, cy = y0 + (sh - 1) / 2.0;
      const double rx = sw / 2.0, ry = sh / 2.0;
      for (int y = y0; y < y0 + sh; ++y)
        for (int x = x0; x < x0 + sw; ++x) {
          if (s.kind == ShapeKind::Ellipse) {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            if (u * u + v * v > 1.0) continue;
          }
          p.pixels.push_back(idx(x, y));
        }
      break;
    }
  }
  p.fits = !p.pixels.empty();
  return p;
}

bool add_strip(Placement& p, const ShadowSpec& sh, int w, int h) {
  std::vector<std::uint8_t> in(std::size_t(w) * std::size_t(h), 0);
  for (auto q : p.pixels) in[q] = 1;
  std::vector<std::uint8_t> seen(in.size(), 0);
  for (auto q : p.pixels) {
    const int x = int(q % std::uint32_t(w)), y = int(q / std::uint32_t(w));
    for (int k = 1; k <= sh.width; ++k) {
      const int sx = x + k * sh.dx, sy = y + k * sh.dy;
      if (sx < 0 || sy < 0 || sx >= w || sy >= h) return false;
      const auto t = std::uint32_t(sy) * std::uint32_t(w) + std::uint32_t(sx);
      if (!in[t] && !seen[t]) {
        seen[t] = 1;
        p.strip.push_back(t);
      }
    }
  }
  std::sort(p.strip.begin(), p.strip.end());
  return true;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.width, h = spec.height;
  const std::size_t n = std::size_t(w) * std::size_t(h);
  Rng rng(spec.seed);
  std::vector<ClassId> labels(n, spec.background);
  std::vector<std::uint8_t> reserved(n, 0), shadow(n, 0);
  std::vector<ClassId> look(n, spec.background);
  std::vector<float> blend(n, 0.0f);

  for (std::size_t si = 0; si < spec.shapes.size(); ++si) {
    const auto& s = spec.shapes[si];
    const int count = int(rng.uniform_int(s.count_min, s.count_max));
    for (int i = 0; i < count; ++i) {
      std::vector<std::uint32_t> anchors;
      if (s.on)
        for (std::uint32_t q = 0; q < n; ++q)
          if (labels[q] == *s.on && !reserved[q]) anchors.push_back(q);
      bool placed = false;
      for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
        Placement p = draw_shape(s, w, h, anchors, rng);
        if (!p.fits) continue;
        if (s.casts_shadow && !add_strip(p, spec.shadow, w, h)) continue;
        auto free_px = [&](std::uint32_t q) {
          return !reserved[q] && (!s.on || labels[q] == *s.on);
        };
        if (!std::all_of(p.pixels.begin(), p.pixels.end(), free_px) ||
            !std::all_of(p.strip.begin(), p.strip.end(), free_px))
          continue;
        for (auto q : p.pixels) {
          labels[q] = s.cls;
          look[q] = s.look.value_or(s.cls);
          blend[q] = s.look ? s.blend : 0.0f;
        }
        if (s.casts_shadow) {
          for (auto q : p.strip) shadow[q] = 1;
          auto reserve_around = [&](std::uint32_t q) {
            const int x = int(q % std::uint32_t(w)), y = int(q / std::uint32_t(w));
            for (int yy = std::max(0, y - 1); yy <= std::min(h - 1, y + 1); ++yy)
              for (int xx = std::max(0, x - 1); xx <= std::min(w - 1, x + 1); ++xx)
                reserved[std::size_t(yy) * w + xx] = 1;
          };
          for (auto q : p.pixels) reserve_around(q);
          for (auto q : p.strip) reserve_around(q);
        }
        placed = true;
      }
      if (!placed)
        throw Error(ErrorKind::Parameter, "could not place " + std::string(to_string(s.kind)) +
                                              " #" + std::to_string(i + 1) + " of '" +
                                              (*spec.taxonomy)[s.cls].name + "' (shape line " +
                                              std::to_string(si + 1) + ")");
    }
  }

  std::vector<float> data(n * 3);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& rgb = spec.colors[labels[p]];
    const auto& alt = spec.colors[look[p]];
    const float f = shadow[p] ? spec.shadow.factor : 1.0f;
    for (int c = 0; c < 3; ++c) {
      const float mean = (1.0f - blend[p]) * rgb[c] + blend[p] * alt[c];
      const double v = double(mean * f) + double(spec.noise_sigma) * rng.normal();
      data[p * 3 + c] = float(std::clamp(v, 0.0, 1.0));
    }
  }
  return Scene{RasterImage(w, h, 3, std::move(data)), LabelMap(w, h, std::move(labels), spec.taxonomy),
               std::move(shadow)};
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string serialize_scene_spec(const SceneSpec& spec) {
  spec.validate();
  const auto& t = *spec.taxonomy;
  std::string s = "# scene spec\n";
  s += "width = " + std::to_string(spec.width) + "\n";
  s += "height = " + std::to_string(spec.height) + "\n";
  s += "seed = " + std::to_string(spec.seed) + "\n";
  s += "background = " + t[spec.background].name + "\n";
  s += "noise_sigma = " + fmt(spec.noise_sigma) + "\n";
  s += "max_retries = " + std::to_string(spec.max_retries) + "\n";
  s += "# dx dy width factor\n";
  s += "shadow = " + std::to_string(spec.shadow.dx) + " " + std::to_string(spec.shadow.dy) + " " +
       std::to_string(spec.shadow.width) + " " + fmt(spec.shadow.factor) + "\n";
  for (const auto& c : t.classes()) {
    const auto& rgb = spec.colors[c.id];
    s += "color." + c.name + " = " + fmt(rgb[0]) + " " + fmt(rgb[1]) + " " + fmt(rgb[2]) + "\n";
  }
  s += "# kind class count_min count_max size_min size_max on shadow [look blend]\n";
  for (const auto& sh : spec.shapes) {
    s += std::string("shape = ") + to_string(sh.kind) + " " + t[sh.cls].name + " " +
         std::to_string(sh.count_min) + " " + std::to_string(sh.count_max) + " " +
         std::to_string(sh.size_min) + " " + std::to_string(sh.size_max) + " " +
         (sh.on ? t[*sh.on].name : std::string("-")) + " " + (sh.casts_shadow ? "1" : "0");
    if (sh.look) s += " " + t[*sh.look].name + " " + fmt(sh.blend);
    s += "\n";
  }
  return s;
}

SceneSpec parse_scene_spec(std::string_view text, TaxonomyPtr taxonomy) {
  using detail::parse_number;
  constexpr auto kFmt = ErrorKind::Format;
  if (!taxonomy) throw Error(ErrorKind::Parameter, "scene spec: taxonomy is required");
  SceneSpec spec;
  spec.taxonomy = taxonomy;
  spec.colors.assign(taxonomy->size(), {0.5f, 0.5f, 0.5f});
  for (const auto& e : detail::parse_kv(text, kFmt)) {
    const std::string where = "scene spec line " + std::to_string(e.line);
    const auto fields = detail::split_ws(e.value);
    if (e.key == "width") {
      spec.width = parse_number<int>(e.value, kFmt, where);
    } else if (e.key == "height") {
      spec.height = parse_number<int>(e.value, kFmt, where);
    } else if (e.key == "seed") {
      spec.seed = parse_number<std::uint64_t>(e.value, kFmt, where);
    } else if (e.key == "background") {
      spec.background = taxonomy->id_of(e.value);
    } else if (e.key == "noise_sigma") {
      spec.noise_sigma = parse_number<float>(e.value, kFmt, where);
    } else if (e.key == "max_retries") {
      spec.max_retries = parse_number<int>(e.value, kFmt, where);
    } else if (e.key == "shadow") {
      if (fields.size() != 4) throw Error(kFmt, where + ": shadow needs dx dy width factor");
      spec.shadow = {parse_number<int>(fields[0], kFmt, where),
                     parse_number<int>(fields[1], kFmt, where),
                     parse_number<int>(fields[2], kFmt, where),
                     parse_number<float>(fields[3], kFmt, where)};
    } else if (e.key.rfind("color.", 0) == 0) {
      const ClassId c = taxonomy->id_of(std::string_view(e.key).substr(6));
      if (fields.size() != 3) throw Error(kFmt, where + ": color needs three values");
      for (int k = 0; k < 3; ++k) spec.colors[c][k] = parse_number<float>(fields[k], kFmt, where);
    } else if (e.key == "shape") {
      if (fields.size() != 8 && fields.size() != 10)
        throw Error(kFmt, where + ": shape needs eight or ten fields");
      ShapeSpec sh;
      if (fields[0] == "rect") sh.kind = ShapeKind::Rectangle;
      else if (fields[0] == "ellipse") sh.kind = ShapeKind::Ellipse;
      else if (fields[0] == "road") sh.kind = ShapeKind::Road;
      else throw Error(kFmt, where + ": unknown shape kind '" + fields[0] + "'");
      sh.cls = taxonomy->id_of(fields[1]);
      sh.count_min = parse_number<int>(fields[2], kFmt, where);
      sh.count_max = parse_number<int>(fields[3], kFmt, where);
      sh.size_min = parse_number<int>(fields[4], kFmt, where);
      sh.size_max = parse_number<int>(fields[5], kFmt, where);
      if (fields[6] != "-") sh.on = taxonomy->id_of(fields[6]);
      if (fields[7] != "0" && fields[7] != "1") throw Error(kFmt, where + ": shadow flag must be 0 or 1");
      sh.casts_shadow = fields[7] == "1";
      if (fields.size() == 10) {
        sh.look = taxonomy->id_of(fields[8]);
        sh.blend = parse_number<float>(fields[9], kFmt, where);
      }
      spec.shapes.push_back(sh);
    } else {
      throw Error(kFmt, where + ": unknown key '" + e.key + "'");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec default_scene_spec(std::uint64_t seed, int size) {
  auto tax = std::make_shared<const Taxonomy>(Taxonomy::ucm8());
  const auto& t = *tax;
  SceneSpec spec;
  spec.width = spec.height = size;
  spec.taxonomy = tax;
  spec.seed = seed;
  spec.background = t.id_of("Vegetation");
  spec.colors.assign(t.size(), {0.5f, 0.5f, 0.5f});
  auto color = [&](const char* name, float r, float g, float b) {
    spec.colors[t.id_of(name)] = {r, g, b};
  };
  color("Vegetation", 0.20f, 0.50f, 0.20f);
  color("Ground", 0.62f, 0.52f, 0.34f);
  color("Pavement", 0.47f, 0.47f, 0.50f);
  color("Building", 0.80f, 0.32f, 0.30f);
  // Close to shadowed ground on purpose.
  color("Water", 0.28f, 0.24f, 0.16f);
  color("Airplane", 0.90f, 0.90f, 0.72f);
  color("Car", 0.92f, 0.82f, 0.15f);
  color("Ship", 0.96f, 0.96f, 0.96f);

  const double f = size / 96.0;
  auto sz = [f](int v) { return std::max(1, int(std::lround(v * f))); };
  auto shape = [&](ShapeKind k, const char* cls, int cmin, int cmax, int smin, int smax,
                   const char* on, bool shadow, const char* look = nullptr, float blend = 0.0f) {
    ShapeSpec s;
    s.kind = k;
    s.cls = t.id_of(cls);
    s.count_min = cmin;
    s.count_max = cmax;
    s.size_min = sz(smin);
    s.size_max = sz(smax);
    if (on) s.on = t.id_of(on);
    s.casts_shadow = shadow;
    if (look) s.look = t.id_of(look);
    s.blend = blend;
    spec.shapes.push_back(s);
  };
  shape(ShapeKind::Rectangle, "Ground", 3, 4, 28, 40, nullptr, false);
  shape(ShapeKind::Road, "Pavement", 1, 2, 4, 6, nullptr, false);
  shape(ShapeKind::Ellipse, "Water", 1, 2, 10, 16, "Ground", false);
  shape(ShapeKind::Rectangle, "Building", 3, 4, 6, 11, "Ground", true);
  // Patches that look like a neighbouring class: dry ground, wet vegetation.
  shape(ShapeKind::Ellipse, "Ground", 2, 4, 5, 8, "Ground", false, "Vegetation", 0.58f);
  shape(ShapeKind::Ellipse, "Vegetation", 2, 4, 5, 8, "Vegetation", false, "Water", 0.58f);
  shape(ShapeKind::Rectangle, "Car", 3, 6, 3, 4, "Pavement", false);
  shape(ShapeKind::Rectangle, "Ship", 1, 2, 3, 4, "Water", false);
  spec.shadow = ShadowSpec{1, 1, 3, 0.45f};
  spec.noise_sigma = 0.05f;
  spec.max_retries = 400;
  return spec;
}

void CorruptionModel::validate(double f_t) const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "corruption model: " + m); };
  if (!(hole_rate >= 0.0 && hole_rate <= 1.0)) fail("hole_rate must be in [0,1]");
  if (!(corrupted_confidence >= 0.0f && double(corrupted_confidence) < f_t))
    fail("corrupted confidence must be below the threshold");
  if (!(double(clean_confidence) > f_t && clean_confidence <= 1.0f))
    fail("clean confidence must be above the threshold");
  if (patch_min < 1 || patch_min > patch_max) fail("invalid patch size range");
  if (margin < 1) fail("margin must be at least 1");
  if (max_holes < 0) fail("max_holes must be non-negative");
  for (const auto& p : pairs)
    if (p.truth == p.wrong) fail("a pair must change the class");
}

CorruptionModel CorruptionModel::defaults(const Taxonomy& taxonomy, std::uint64_t seed) {
  CorruptionModel m;
  m.seed = seed;
  const char* pairs[][2] = {{"Ground", "Vegetation"}, {"Pavement", "Ground"},   {"Water", "Building"},
                            {"Vegetation", "Water"},  {"Water", "Airplane"},    {"Vegetation", "Car"},
                            {"Ground", "Airplane"},   {"Ground", "Car"},        {"Ground", "Ship"}};
  for (const auto& p : pairs) {
    const auto a = taxonomy.find(p[0]), b = taxonomy.find(p[1]);
    if (a && b) m.pairs.push_back({*a, *b});
  }
  return m;
}

namespace {

struct Component {
  ClassId cls = 0;
  std::vector<std::uint32_t> pixels;
  bool touches_frame = false;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

std::vector<Component> components(const LabelMap& labels, std::vector<int>& comp_of) {
  const int w = labels.width(), h = labels.height();
  comp_of.assign(labels.pixel_count(), -1);
  std::vector<Component> out;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t start = 0; start < labels.pixel_count(); ++start) {
    if (comp_of[start] >= 0) continue;
    Component c;
    c.cls = labels[start];
    c.x0 = w;
    c.y0 = h;
    const int id = int(out.size());
    comp_of[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto q = stack.back();
      stack.pop_back();
      c.pixels.push_back(q);
      const int x = int(q % std::uint32_t(w)), y = int(q / std::uint32_t(w));
      c.touches_frame |= x == 0 || y == 0 || x == w - 1 || y == h - 1;
      c.x0 = std::min(c.x0, x);
      c.y0 = std::min(c.y0, y);
      c.x1 = std::max(c.x1, x);
      c.y1 = std::max(c.y1, y);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const auto t = std::uint32_t(ny[k]) * std::uint32_t(w) + std::uint32_t(nx[k]);
        if (comp_of[t] < 0 && labels[t] == c.cls) {
          comp_of[t] = id;
          stack.push_back(t);
        }
      }
    }
    std::sort(c.pixels.begin(), c.pixels.end());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

Corruption corrupt(const LabelMap& truth, const CorruptionModel& model) {
  model.validate();
  const int n = int(truth.class_count());
  for (const auto& p : model.pairs)
    if (p.truth < 0 || p.truth >= n || p.wrong < 0 || p.wrong >= n)
      throw Error(ErrorKind::Parameter, "corruption pair outside the taxonomy");
  const float cc = model.corrupted_confidence, clean = model.clean_confidence;
  if (n > 1 && !(cc > (1.0f - cc) / float(n - 1)))
    throw Error(ErrorKind::Parameter, "corrupted confidence does not dominate the other classes");

  const int w = truth.width();
  Rng rng(model.seed);
  std::vector<int> comp_of;
  const auto comps = components(truth, comp_of);
  Corruption out;
  out.mask.assign(truth.pixel_count(), 0);

  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    if (int(out.holes.size()) >= model.max_holes) break;
    const auto& comp = comps[ci];
    std::vector<CorruptionPair> cands;
    for (const auto& p : model.pairs)
      if (p.truth == comp.cls) cands.push_back(p);
    if (cands.empty() || !rng.bernoulli(model.hole_rate)) continue;
    const auto pair = cands[std::size_t(rng.uniform_int(0, std::int64_t(cands.size()) - 1))];
    Hole hole{pair.truth, pair.wrong, {}};
    if (model.whole_regions) {
      if (comp.touches_frame) continue;
      hole.pixels = comp.pixels;
    } else {
      const int m = model.margin;
      for (int attempt = 0; attempt < 30 && hole.pixels.empty(); ++attempt) {
        const int side = int(rng.uniform_int(model.patch_min, model.patch_max));
        const int lo_x = comp.x0 + m, hi_x = comp.x1 - m - side + 1;
        const int lo_y = comp.y0 + m, hi_y = comp.y1 - m - side + 1;
        if (hi_x < lo_x || hi_y < lo_y) break;
        const int x0 = int(rng.uniform_int(lo_x, hi_x));
        const int y0 = int(rng.uniform_int(lo_y, hi_y));
        bool ok = true;
        for (int y = y0 - m; y < y0 + side + m && ok; ++y)
          for (int x = x0 - m; x < x0 + side + m && ok; ++x) {
            const auto q = std::size_t(y) * w + x;
            ok = comp_of[q] == int(ci) && !out.mask[q];
          }
        if (!ok) continue;
        for (int y = y0; y < y0 + side; ++y)
          for (int x = x0; x < x0 + side; ++x) hole.pixels.push_back(std::uint32_t(y * w + x));
      }
      if (hole.pixels.empty()) continue;
    }
    for (auto q : hole.pixels) out.mask[q] = 1;
    out.holes.push_back(std::move(hole));
  }

  std::vector<float> probs(truth.pixel_count() * std::size_t(n));
  std::vector<ClassId> top(truth.pixel_count());
  for (std::size_t p = 0; p < truth.pixel_count(); ++p) top[p] = truth[p];
  for (const auto& hole : out.holes)
    for (auto q : hole.pixels) top[q] = hole.wrong;
  for (std::size_t p = 0; p < truth.pixel_count(); ++p) {
    float* row = probs.data() + p * std::size_t(n);
    if (n == 1) {
      row[0] = 1.0f;
      continue;
    }
    const float conf = out.mask[p] ? cc : clean;
    const float rest = (1.0f - conf) / float(n - 1);
    for (int c = 0; c < n; ++c) row[c] = c == top[p] ? conf : rest;
  }
  out.probs = ProbMap(truth.width(), truth.height(), n, std::move(probs));
  return out;
}

std::vector<BenchmarkScene> default_benchmark(int n, std::uint64_t seed, int size) {
  if (n <= 0) throw Error(ErrorKind::Parameter, "benchmark needs at least one scene");
  Rng rng(seed);
  std::vector<BenchmarkScene> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d", i);
    out[i].name = name;
    out[i].seed = rng.next();
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
  const int n_train = int(std::lround(0.6 * n));
  const int n_val = std::min(n - n_train, int(std::lround(0.2 * n)));
  for (int r = 0; r < n; ++r)
    out[order[r]].split = r < n_train ? Split::Train : r < n_train + n_val ? Split::Val : Split::Test;
  // A seed whose layout cannot be placed is replaced by the next draw.
  for (auto& s : out) {
    for (int attempt = 0;; ++attempt) {
      try {
        s.scene = generate_scene(default_scene_spec(s.seed, size));
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Parameter || attempt == 15) throw;
        s.seed = rng.next();
      }
    }
  }
  return out;
}

}  // namespace cbf
