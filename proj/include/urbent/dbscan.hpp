#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_map>
#include <span>
#include <stdexcept>
#include <vector>

#include "urbent/geo.hpp"
#include "urbent/spatial_index.hpp"

namespace urbent {

/// DBSCAN sensitivity. min_pts counts the point itself.
struct Params {
  double eps = 150.0;
  std::size_t min_pts = 25;

  friend bool operator==(const Params&, const Params&) = default;
};

inline void validate(const Params& p) {
  if (!(p.eps > 0.0) || !std::isfinite(p.eps)) throw std::invalid_argument("eps must be positive");
  if (p.min_pts < 1) throw std::invalid_argument("min_pts must be at least 1");
}

/// Noise or a cluster id in 0..k-1.
class ClusterLabel {
 public:
  constexpr ClusterLabel() = default;
  static constexpr ClusterLabel noise() { return ClusterLabel(); }
  static constexpr ClusterLabel cluster(std::uint32_t id) { return ClusterLabel(static_cast<std::int64_t>(id)); }

  constexpr bool is_noise() const { return value_ < 0; }
  constexpr std::uint32_t id() const { return static_cast<std::uint32_t>(value_); }

  friend constexpr bool operator==(ClusterLabel, ClusterLabel) = default;

 private:
  constexpr explicit ClusterLabel(std::int64_t v) : value_(v) {}
  std::int64_t value_ = -1;
};

struct Labeling {
  std::vector<ClusterLabel> labels;
  std::vector<bool> core;
  Params params;
  std::size_t cluster_count = 0;

  std::size_t noise_count() const {
    std::size_t n = 0;
    for (auto l : labels) n += l.is_noise() ? 1 : 0;
    return n;
  }

  /// Member ids per cluster, ascending.
  std::vector<std::vector<PointId>> members() const {
    std::vector<std::vector<PointId>> out(cluster_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i].is_noise()) out[labels[i].id()].push_back(static_cast<PointId>(i));
    }
    return out;
  }
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // smaller id becomes the root
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

/// Grid cell size at which every pair of points sharing a cell is within
/// eps of each other (the cell diagonal stays just below eps).
inline double clique_cell_size(double eps) { return eps / std::numbers::sqrt2 * (1.0 - 1e-9); }

namespace detail {

/// True when `index` cells are cliques under eps. Rounding in cell
/// assignment grows with distance from the origin, hence the extent bound.
inline bool cells_are_cliques(const GridIndex& index, double eps) {
  const double c = index.cell_size();
  return 2.0 * c * c * (1.0 + 1e-9) < eps * eps && index.extent() / c < 1e5;
}

/// Unites core points whose cells are cliques: all cores of one cell form one
/// set, and two cells merge as soon as one cross pair of cores is within eps.
inline void unite_clique_cells(std::span<const PlanarPoint> points, const GridIndex& index,
                               const std::vector<bool>& core, double eps, DisjointSets& sets) {
  struct Cell {
    CellKey key;
    std::vector<PointId> cores;
  };
  std::vector<Cell> cells;
  index.for_each_cell([&](const CellKey& key, std::span<const PointId> ids) {
    Cell cell{key, {}};
    for (PointId id : ids) {
      if (core[id]) cell.cores.push_back(id);
    }
    if (!cell.cores.empty()) cells.push_back(std::move(cell));
  });
  std::unordered_map<CellKey, std::size_t, CellKeyHash> ordinal;
  ordinal.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ordinal.emplace(cells[i].key, i);
    for (PointId id : cells[i].cores) sets.unite(cells[i].cores.front(), id);
  }

  // Neighbour offsets in one half-plane, nearest first so that later, more
  // expensive pairs are usually already connected.
  const double c = index.cell_size();
  const double eps2 = eps * eps;
  const auto reach = static_cast<std::int64_t>(std::floor(eps / c)) + 1;
  std::vector<std::pair<double, CellKey>> offsets;
  for (std::int64_t dx = 0; dx <= reach; ++dx) {
    for (std::int64_t dy = -reach; dy <= reach; ++dy) {
      if (dx == 0 && dy <= 0) continue;
      const double gx = static_cast<double>(std::max<std::int64_t>(std::abs(dx) - 1, 0)) * c;
      const double gy = static_cast<double>(std::max<std::int64_t>(std::abs(dy) - 1, 0)) * c;
      const double gap2 = gx * gx + gy * gy;
      if (gap2 <= eps2 * (1.0 + 1e-9)) offsets.push_back({gap2, {dx, dy}});
    }
  }
  std::stable_sort(offsets.begin(), offsets.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  for (const auto& [gap2, off] : offsets) {
    for (const Cell& a : cells) {
      const auto it = ordinal.find({a.key.x + off.x, a.key.y + off.y});
      if (it == ordinal.end()) continue;
      const Cell& b = cells[it->second];
      if (sets.find(a.cores.front()) == sets.find(b.cores.front())) continue;
      [&] {
        for (PointId i : a.cores) {
          for (PointId j : b.cores) {
            if (squared_distance(points[i], points[j]) <= eps2) {
              sets.unite(i, j);
              return;
            }
          }
        }
      }();
    }
  }
}

}  // namespace detail

/// DBSCAN over `points` using `index` (built over the same points). An index
/// with cell size clique_cell_size(eps) enables the cell-level fast path;
/// any other cell size gives the same result via per-point queries.
///
/// Results equal the classic expansion algorithm visiting seeds in ascending
/// id order: clusters are connected components of core points, numbered by
/// their smallest core id; a border point joins the lowest-numbered cluster
/// among its core neighbours (the first expansion that reaches it).
inline Labeling dbscan(std::span<const PlanarPoint> points, const Params& params,
                       const GridIndex& index) {
  validate(params);
  if (index.size() != points.size()) {
    throw std::invalid_argument("dbscan: index built over a different point set");
  }
  const std::size_t n = points.size();
  const bool cliques = detail::cells_are_cliques(index, params.eps);
  Labeling out;
  out.params = params;
  out.labels.assign(n, ClusterLabel::noise());
  out.core.assign(n, false);

  if (cliques) {
    index.for_each_cell([&](const CellKey&, std::span<const PointId> ids) {
      if (ids.size() >= params.min_pts) {
        for (PointId id : ids) out.core[id] = true;
      }
    });
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    std::size_t count = 0;
    index.visit_radius(points[i], params.eps, [&](PointId) { return ++count < params.min_pts; });
    out.core[i] = count >= params.min_pts;
  }

  detail::DisjointSets sets(n);
  if (cliques) {
    detail::unite_clique_cells(points, index, out.core, params.eps, sets);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (!out.core[i]) continue;
      const auto self = static_cast<PointId>(i);
      index.visit_radius(points[i], params.eps, [&](PointId j) {
        if (j > self && out.core[j]) sets.unite(self, j);
      });
    }
  }

  // Roots are the smallest core id of each component, so ascending scan
  // numbers clusters in discovery order.
  std::vector<std::int64_t> cluster_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.core[i]) continue;
    const auto root = sets.find(static_cast<std::uint32_t>(i));
    if (cluster_of_root[root] < 0) cluster_of_root[root] = static_cast<std::int64_t>(out.cluster_count++);
    out.labels[i] = ClusterLabel::cluster(static_cast<std::uint32_t>(cluster_of_root[root]));
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    std::int64_t best = -1;
    index.visit_radius(points[i], params.eps, [&](PointId j) {
      if (!out.core[j]) return;
      const auto c = static_cast<std::int64_t>(out.labels[j].id());
      if (best < 0 || c < best) best = c;
    });
    if (best >= 0) out.labels[i] = ClusterLabel::cluster(static_cast<std::uint32_t>(best));
  }
  return out;
}

/// Convenience overload that builds a clique-sized grid.
inline Labeling dbscan(std::span<const PlanarPoint> points, const Params& params) {
  validate(params);
  const GridIndex index(points, clique_cell_size(params.eps));
  return dbscan(points, params, index);
}

}  // namespace urbent
