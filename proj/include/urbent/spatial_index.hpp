#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "urbent/geo.hpp"

namespace urbent {

using PointId = std::uint32_t;

/// Integer cell coordinate of a GridIndex.
struct CellKey {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Uniform grid over planar points for exact fixed-radius queries.
///
/// Point p lives in cell (floor((p.x - origin.x) / cell_size),
/// floor((p.y - origin.y) / cell_size)). Cell contents are stored as
/// contiguous runs of one id array, ids ascending within each cell.
class GridIndex {
 public:
  GridIndex(std::span<const PlanarPoint> points, double cell_size, PlanarPoint origin = {})
      : cell_size_(cell_size), origin_(origin), points_(points.begin(), points.end()) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
      throw std::invalid_argument("GridIndex: cell_size must be positive");
    }
    for (const auto& p : points_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("GridIndex: non-finite point");
      }
      extent_ = std::max({extent_, std::abs(p.x - origin_.x), std::abs(p.y - origin_.y)});
    }
    // Counting sort by cell: O(n) expected.
    std::vector<std::uint32_t> slot(points_.size());
    std::vector<std::uint32_t> counts;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const CellKey key = cell_of(points_[i]);
      auto [it, inserted] = cells_.try_emplace(key, Range{static_cast<std::uint32_t>(counts.size()), 0});
      if (inserted) counts.push_back(0);
      slot[i] = it->second.begin;  // temporarily the cell ordinal
      ++counts[it->second.begin];
    }
    std::vector<std::uint32_t> offsets(counts.size() + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), offsets.begin() + 1);
    for (auto& [key, range] : cells_) {
      const std::uint32_t ordinal = range.begin;
      range = {offsets[ordinal], offsets[ordinal + 1]};
    }
    ids_.resize(points_.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      ids_[cursor[slot[i]]++] = static_cast<PointId>(i);
    }
  }

  double cell_size() const { return cell_size_; }
  PlanarPoint origin() const { return origin_; }
  std::size_t size() const { return points_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  std::span<const PlanarPoint> points() const { return points_; }
  /// Largest |coordinate - origin| over all points, in meters.
  double extent() const { return extent_; }

  CellKey cell_of(const PlanarPoint& p) const {
    return {static_cast<std::int64_t>(std::floor((p.x - origin_.x) / cell_size_)),
            static_cast<std::int64_t>(std::floor((p.y - origin_.y) / cell_size_))};
  }

  /// Ids stored in one cell (empty span for unknown cells).
  std::span<const PointId> cell(const CellKey& key) const {
    auto it = cells_.find(key);
    if (it == cells_.end()) return {};
    return std::span<const PointId>(ids_).subspan(it->second.begin, it->second.end - it->second.begin);
  }

  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    for (const auto& [key, range] : cells_) {
      fn(key, std::span<const PointId>(ids_).subspan(range.begin, range.end - range.begin));
    }
  }

  /// Calls fn(id) for every point with squared distance <= r*r from center.
  /// Only cells intersecting the query disc's bounding square are scanned.
  /// Visit order is unspecified; fn may return false to stop early.
  template <typename Fn>
  void visit_radius(const PlanarPoint& center, double r, Fn&& fn) const {
    if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
    const double r2 = r * r;
    const CellKey lo = cell_of({center.x - r, center.y - r});
    const CellKey hi = cell_of({center.x + r, center.y + r});
    for (std::int64_t cx = lo.x; cx <= hi.x; ++cx) {
      for (std::int64_t cy = lo.y; cy <= hi.y; ++cy) {
        for (PointId id : cell({cx, cy})) {
          if (squared_distance(points_[id], center) <= r2) {
            if constexpr (std::is_same_v<std::invoke_result_t<Fn, PointId>, bool>) {
              if (!fn(id)) return;
            } else {
              fn(id);
            }
          }
        }
      }
    }
  }

  /// Sorted ids within distance r of center (boundary inclusive).
  std::vector<PointId> radius_query(const PlanarPoint& center, double r) const {
    std::vector<PointId> out;
    visit_radius(center, r, [&](PointId id) { out.push_back(id); });
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Range {
    std::uint32_t begin;
    std::uint32_t end;
  };

  double cell_size_;
  PlanarPoint origin_;
  double extent_ = 0.0;
  std::vector<PlanarPoint> points_;
  std::vector<PointId> ids_;
  std::unordered_map<CellKey, Range, CellKeyHash> cells_;
};

}  // namespace urbent
