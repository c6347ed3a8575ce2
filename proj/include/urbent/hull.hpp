#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "urbent/geo.hpp"

namespace urbent {

inline double cross(const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain. Returns indices into `points` of the hull
/// vertices in counter-clockwise order (not closed), without collinear
/// vertices. Coincident inputs collapse to one vertex; collinear inputs yield
/// the two extremes.
inline std::vector<std::size_t> convex_hull_indices(std::span<const PlanarPoint> points) {
  if (points.empty()) throw std::invalid_argument("convex_hull: empty input");
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto& p = points[a];
    const auto& q = points[b];
    return p.x < q.x || (p.x == q.x && (p.y < q.y || (p.y == q.y && a < b)));
  };
  std::sort(idx.begin(), idx.end(), less);
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t a, std::size_t b) { return points[a] == points[b]; }),
            idx.end());
  if (idx.size() < 3) return idx;

  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t h = 0;
  for (std::size_t i : idx) {
    while (h >= 2 && cross(points[hull[h - 2]], points[hull[h - 1]], points[i]) <= 0) --h;
    hull[h++] = i;
  }
  for (std::size_t r = idx.size() - 1, lower = h + 1; r-- > 0;) {
    const std::size_t i = idx[r];
    while (h >= lower && cross(points[hull[h - 2]], points[hull[h - 1]], points[i]) <= 0) --h;
    hull[h++] = i;
  }
  hull.resize(h - 1);  // last vertex repeats the first
  return hull;
}

inline std::vector<PlanarPoint> convex_hull(std::span<const PlanarPoint> points) {
  std::vector<PlanarPoint> out;
  for (std::size_t i : convex_hull_indices(points)) out.push_back(points[i]);
  return out;
}

}  // namespace urbent
