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

#include "cbf/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "cbf/error.hpp"
#include "cbf/rng.hpp"
#include "cbf/simd/kernels.hpp"
#include "detail/disjoint_set.hpp"

namespace cbf {
namespace {

constexpr float kColorScale = 100.0f;

// 4-connected components of equal value, numbered in raster order.
std::vector<std::int32_t> label_components(const std::vector<std::int32_t>& values, int w, int h,
                                           std::vector<std::uint32_t>& sizes) {
  const std::size_t n = values.size();
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::uint32_t> stack;
  sizes.clear();
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const auto id = std::int32_t(sizes.size());
    const auto value = values[start];
    std::uint32_t size = 0;
    comp[start] = id;
    stack.push_back(std::uint32_t(start));
    while (!stack.empty()) {
      const std::uint32_t p = stack.back();
      stack.pop_back();
      ++size;
      const int x = int(p % std::uint32_t(w));
      const int y = int(p / std::uint32_t(w));
      const auto visit = [&](std::uint32_t q) {
        if (comp[q] < 0 && values[q] == value) {
          comp[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - std::uint32_t(w));
      if (y + 1 < h) visit(p + std::uint32_t(w));
    }
    sizes.push_back(size);
  }
  return comp;
}

std::vector<std::vector<std::int32_t>> component_adjacency(const std::vector<std::int32_t>& comp,
                                                           std::size_t count, int w, int h) {
  std::vector<std::vector<std::int32_t>> adj(count);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = std::size_t(y) * w + x;
      if (x + 1 < w && comp[p] != comp[p + 1]) {
        adj[comp[p]].push_back(comp[p + 1]);
        adj[comp[p + 1]].push_back(comp[p]);
      }
      if (y + 1 < h && comp[p] != comp[p + w]) {
        adj[comp[p]].push_back(comp[p + w]);
        adj[comp[p + w]].push_back(comp[p]);
      }
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

// Merges the smallest group into its largest neighbour until at most
// max_groups remain. Roots are indices into the component table.
void cap_group_count(detail::DisjointSet& ds, std::vector<std::uint64_t>& group_size,
                     const std::vector<std::vector<std::int32_t>>& comp_adj, std::size_t max_groups) {
  const std::size_t ncomp = comp_adj.size();
  std::vector<std::set<std::uint32_t>> adj(ncomp);
  std::set<std::pair<std::uint64_t, std::uint32_t>> by_size;
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    const std::uint32_t r = ds.find(c);
    for (auto nb : comp_adj[c]) {
      const std::uint32_t rn = ds.find(std::uint32_t(nb));
      if (rn != r) adj[r].insert(rn);
    }
  }
  for (std::uint32_t c = 0; c < ncomp; ++c)
    if (ds.find(c) == c) by_size.insert({group_size[c], c});

  while (by_size.size() > max_groups) {
    auto it = by_size.begin();
    bool merged = false;
    for (; it != by_size.end(); ++it) {
      const std::uint32_t small = it->second;
      if (adj[small].empty()) continue;
      std::uint32_t target = *adj[small].begin();
      for (auto nb : adj[small])
        if (group_size[nb] > group_size[target]) target = nb;

      by_size.erase({group_size[small], small});
      by_size.erase({group_size[target], target});
      const std::uint32_t root = ds.unite(small, target);
      const std::uint32_t other = root == small ? target : small;
      group_size[root] = group_size[small] + group_size[target];
      for (auto nb : adj[other]) {
        adj[nb].erase(other);
        if (nb != root) {
          adj[nb].insert(root);
          adj[root].insert(nb);
        }
      }
      adj[root].erase(other);
      adj[root].erase(root);
      adj[other].clear();
      by_size.insert({group_size[root], root});
      merged = true;
      break;
    }
    if (!merged) break;  // only isolated groups left
  }
}

SuperpixelMap enforce_connectivity(const std::vector<std::int32_t>& raw, int w, int h, int k_target) {
  const std::size_t n = raw.size();
  std::vector<std::uint32_t> sizes;
  const auto comp = label_components(raw, w, h, sizes);
  const std::size_t ncomp = sizes.size();
  const auto comp_adj = component_adjacency(comp, ncomp, w, h);

  detail::DisjointSet ds(ncomp);
  std::vector<std::uint64_t> group_size(sizes.begin(), sizes.end());

  // The largest component of each cluster is the superpixel proper; the
  // others are orphans. Orphans below the size floor join an adjacent group
  // that holds a kept component, so kept components never merge here.
  std::vector<std::int32_t> comp_label(ncomp, -1);
  for (std::size_t p = 0; p < n; ++p) comp_label[std::size_t(comp[p])] = raw[p];
  const std::int32_t max_label = *std::max_element(raw.begin(), raw.end());
  std::vector<std::int64_t> core(std::size_t(std::max(max_label, 0)) + 1, -1);
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    const auto l = comp_label[c];
    if (l < 0) continue;
    auto& best = core[std::size_t(l)];
    if (best < 0 || sizes[c] > sizes[std::size_t(best)]) best = c;
  }
  const double min_size = double(n) / (4.0 * double(k_target));
  std::vector<char> anchored(ncomp, 0);
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    const auto l = comp_label[c];
    anchored[c] = (l >= 0 && core[std::size_t(l)] == std::int64_t(c)) || double(sizes[c]) >= min_size;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::uint32_t c = 0; c < ncomp; ++c) {
      const std::uint32_t r = ds.find(c);
      if (anchored[r]) continue;
      std::int64_t best = -1;
      for (auto nb : comp_adj[c]) {
        const std::uint32_t rn = ds.find(std::uint32_t(nb));
        if (rn == r || !anchored[rn]) continue;
        if (best < 0 || group_size[rn] > group_size[std::size_t(best)] ||
            (group_size[rn] == group_size[std::size_t(best)] && rn < best))
          best = rn;
      }
      if (best < 0) continue;
      const std::uint64_t total = group_size[r] + group_size[std::size_t(best)];
      const std::uint32_t root = ds.unite(r, std::uint32_t(best));
      group_size[root] = total;
      anchored[root] = 1;
      changed = true;
    }
  }

  const auto max_groups = std::size_t(std::max(1.0, std::floor(1.5 * k_target)));
  cap_group_count(ds, group_size, comp_adj, max_groups);

  SuperpixelMap out{w, h, std::vector<std::int32_t>(n), 0};
  std::vector<std::int32_t> dense(ncomp, -1);
  for (std::size_t p = 0; p < n; ++p) {
    const std::uint32_t r = ds.find(std::uint32_t(comp[p]));
    if (dense[r] < 0) dense[r] = out.k_actual++;
    out.assignment[p] = dense[r];
  }
  return out;
}

struct Center {
  float x;
  float y;
  std::vector<float> color;
};

double gradient_at(const std::vector<std::vector<float>>& planes, int w, int h, int x, int y) {
  const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
  const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
  double g = 0.0;
  for (const auto& pl : planes) {
    const double gx = double(pl[std::size_t(y) * w + xr]) - pl[std::size_t(y) * w + xl];
    const double gy = double(pl[std::size_t(yd) * w + x]) - pl[std::size_t(yu) * w + x];
    g += gx * gx + gy * gy;
  }
  return g;
}

}  // namespace

const char* to_string(UnitStatus status) {
  return status == UnitStatus::Classified ? "Classified" : "MisClassified";
}

SuperpixelMap slic_segment(const RasterImage& image, const SlicParams& params) {
  const int w = image.width(), h = image.height();
  const std::size_t n = image.pixel_count();
  if (n == 0) throw Error(ErrorKind::Dimension, "cannot segment an empty image");
  if (params.k_target < 1 || std::size_t(params.k_target) > n)
    throw Error(ErrorKind::Parameter, "k_target must lie in [1, pixel count]; got " +
                                          std::to_string(params.k_target) + " for " +
                                          std::to_string(n) + " pixels");
  if (params.max_iters < 1) throw Error(ErrorKind::Parameter, "max_iters must be at least 1");
  if (!(params.compactness > 0.0)) throw Error(ErrorKind::Parameter, "compactness must be positive");

  const int k = params.k_target;
  const int nch = image.channels();
  std::vector<std::vector<float>> planes(static_cast<std::size_t>(nch));
  std::vector<const float*> plane_ptrs(static_cast<std::size_t>(nch));
  for (int c = 0; c < nch; ++c) {
    planes[c] = image.plane(c);
    plane_ptrs[c] = planes[c].data();
  }

  // Seed grid: nx columns by ny rows with nx*ny close to k.
  const int nx = std::clamp(int(std::ceil(std::sqrt(double(k) * w / h))), 1, w);
  const int ny = std::clamp(int(std::lround(double(k) / nx)), 1, h);
  const double cell_w = double(w) / nx, cell_h = double(h) / ny;
  const double step = std::sqrt(double(n) / k);

  Rng rng(params.seed);
  std::vector<Center> centers;
  centers.reserve(std::size_t(nx) * ny);
  const bool perturb = cell_w >= 3.0 && cell_h >= 3.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double jx = perturb ? rng.uniform(-0.25, 0.25) * cell_w : 0.0;
      const double jy = perturb ? rng.uniform(-0.25, 0.25) * cell_h : 0.0;
      int cx = std::clamp(int(std::floor((i + 0.5) * cell_w + jx)), 0, w - 1);
      int cy = std::clamp(int(std::floor((j + 0.5) * cell_h + jy)), 0, h - 1);
      if (perturb) {
        double best = gradient_at(planes, w, h, cx, cy);
        int bx = cx, by = cy;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = cx + dx, y = cy + dy;
            if (x < 0 || y < 0 || x >= w || y >= h) continue;
            const double g = gradient_at(planes, w, h, x, y);
            if (g < best) {
              best = g;
              bx = x;
              by = y;
            }
          }
        cx = bx;
        cy = by;
      }
      Center ctr{float(cx), float(cy), std::vector<float>(std::size_t(nch))};
      for (int c = 0; c < nch; ++c) ctr.color[c] = planes[c][std::size_t(cy) * w + cx];
      centers.push_back(std::move(ctr));
    }
  }

  const auto& kern = simd::kernels();
  const float color_weight = kColorScale * kColorScale;
  const float spatial_weight = float((params.compactness / step) * (params.compactness / step));
  const int radius = int(std::ceil(std::max(cell_w, cell_h)));

  std::vector<float> dist(n);
  std::vector<std::int32_t> labels(n, -1), previous;
  std::vector<double> sums;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<float>::infinity());
    std::fill(labels.begin(), labels.end(), -1);
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const Center& ctr = centers[ci];
      const int x0 = std::max(0, int(std::floor(ctr.x)) - radius);
      const int x1 = std::min(w - 1, int(std::ceil(ctr.x)) + radius);
      const int y0 = std::max(0, int(std::floor(ctr.y)) - radius);
      const int y1 = std::min(h - 1, int(std::ceil(ctr.y)) + radius);
      simd::SlicRowArgs args{plane_ptrs.data(), nch, w, 0, x0, x1 - x0 + 1, ctr.color.data(),
                             ctr.x, ctr.y, color_weight, spatial_weight, std::int32_t(ci),
                             dist.data(), labels.data()};
      for (int y = y0; y <= y1; ++y) {
        args.y = y;
        kern.slic_relax_row(args);
      }
    }

    // Centroid update in raster order.
    const std::size_t stride = std::size_t(nch) + 3;
    sums.assign(centers.size() * stride, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const auto l = labels[p];
      if (l < 0) continue;
      double* s = sums.data() + std::size_t(l) * stride;
      s[0] += double(p % std::size_t(w));
      s[1] += double(p / std::size_t(w));
      for (int c = 0; c < nch; ++c) s[2 + c] += planes[c][p];
      s[2 + nch] += 1.0;
    }
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const double* s = sums.data() + ci * stride;
      const double count = s[2 + nch];
      if (count == 0.0) continue;
      centers[ci].x = float(s[0] / count);
      centers[ci].y = float(s[1] / count);
      for (int c = 0; c < nch; ++c) centers[ci].color[c] = float(s[2 + c] / count);
    }
    if (labels == previous) break;
    previous = labels;
  }

  return enforce_connectivity(labels, w, h, k);
}

void validate(const SuperpixelMap& map) {
  if (map.width <= 0 || map.height <= 0)
    throw Error(ErrorKind::Dimension, "superpixel map has non-positive dimensions");
  if (map.assignment.size() != std::size_t(map.width) * map.height)
    throw Error(ErrorKind::Dimension, "superpixel assignment length does not match dimensions");
  std::vector<char> seen(std::size_t(std::max(map.k_actual, 0)), 0);
  for (auto a : map.assignment) {
    if (a < 0 || a >= map.k_actual)
      throw Error(ErrorKind::Partition, "superpixel id " + std::to_string(a) + " out of range");
    seen[std::size_t(a)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error(ErrorKind::Partition, "superpixel ids are not dense");
}

std::vector<std::vector<std::uint32_t>> superpixel_pixels(const SuperpixelMap& map) {
  validate(map);
  std::vector<std::vector<std::uint32_t>> out(std::size_t(map.k_actual));
  for (std::size_t p = 0; p < map.assignment.size(); ++p)
    out[std::size_t(map.assignment[p])].push_back(std::uint32_t(p));
  return out;
}

ClassId majority_label(std::span<const std::uint32_t> pixels, const LabelMap& labels) {
  if (pixels.empty()) throw Error(ErrorKind::EmptyUnit, "majority label of an empty pixel set");
  std::vector<std::uint32_t> counts(labels.class_count(), 0);
  for (auto p : pixels) {
    if (p >= labels.pixel_count()) throw Error(ErrorKind::InvalidId, "pixel index out of range");
    ++counts[std::size_t(labels[p])];
  }
  return ClassId(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<InferenceUnit> aggregate_units(const SuperpixelMap& spmap, const LabelMap& labels,
                                           std::span<const float> confidence, double f_t) {
  if (spmap.width != labels.width() || spmap.height != labels.height() ||
      confidence.size() != labels.pixel_count())
    throw Error(ErrorKind::Dimension, "superpixel map, labels and confidence differ in size");
  if (!(f_t > 0.0 && f_t < 1.0)) throw Error(ErrorKind::Parameter, "f_t must lie in (0,1)");

  const auto sp_pixels = superpixel_pixels(spmap);
  std::vector<ClassId> sp_class(sp_pixels.size());
  for (std::size_t s = 0; s < sp_pixels.size(); ++s) sp_class[s] = majority_label(sp_pixels[s], labels);

  const int w = spmap.width, h = spmap.height;
  const auto& a = spmap.assignment;
  detail::DisjointSet ds(sp_pixels.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = std::size_t(y) * w + x;
      if (x + 1 < w && a[p] != a[p + 1] && sp_class[a[p]] == sp_class[a[p + 1]])
        ds.unite(std::uint32_t(a[p]), std::uint32_t(a[p + 1]));
      if (y + 1 < h && a[p] != a[p + w] && sp_class[a[p]] == sp_class[a[p + w]])
        ds.unite(std::uint32_t(a[p]), std::uint32_t(a[p + w]));
    }
  }

  std::vector<InferenceUnit> units;
  std::vector<std::int32_t> unit_of_root(sp_pixels.size(), -1);
  for (std::size_t p = 0; p < a.size(); ++p) {
    const std::uint32_t root = ds.find(std::uint32_t(a[p]));
    if (unit_of_root[root] < 0) {
      unit_of_root[root] = std::int32_t(units.size());
      InferenceUnit u;
      u.id = int(units.size());
      u.unit_class = sp_class[root];
      units.push_back(std::move(u));
    }
    units[std::size_t(unit_of_root[root])].pixels.push_back(std::uint32_t(p));
  }
  for (auto& u : units) {
    double sum = 0.0;
    for (auto p : u.pixels) sum += double(confidence[p]);
    u.confidence = sum / double(u.pixels.size());
    u.status = status_for(u.confidence, f_t);
  }
  return units;
}

}  // namespace cbf
