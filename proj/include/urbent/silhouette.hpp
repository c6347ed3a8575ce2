#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "urbent/dbscan.hpp"
#include "urbent/geo.hpp"
#include "urbent/synthetic.hpp"

namespace urbent {

inline constexpr std::size_t kDefaultSilhouetteSampleCap = 10000;

struct SilhouetteResult {
  double overall = 0.0;
  std::map<std::uint32_t, double> per_cluster;  ///< mean s(i) over evaluated members
  bool sampled = false;
  std::size_t sample_size = 0;
  std::vector<std::pair<PointId, double>> per_point;  ///< ascending id
};

/// Silhouette coefficient over the non-noise points of `labeling`, using
/// planar Euclidean distance. Singleton-cluster members score 0.
///
/// When more than `sample_cap` points are clustered, a uniform sample of
/// `sample_cap` of them (drawn from `seed`) is scored, each against full
/// cluster memberships. Returns nullopt when fewer than two clusters exist.
inline std::optional<SilhouetteResult> silhouette(std::span<const PlanarPoint> points,
                                                  const Labeling& labeling,
                                                  std::size_t sample_cap = kDefaultSilhouetteSampleCap,
                                                  std::uint64_t seed = 0) {
  if (labeling.labels.size() != points.size()) {
    throw std::invalid_argument("silhouette: labeling size mismatch");
  }
  if (sample_cap == 0) throw std::invalid_argument("silhouette: sample_cap must be positive");
  if (labeling.cluster_count < 2) return std::nullopt;

  const std::size_t k = labeling.cluster_count;
  std::vector<std::vector<double>> xs(k), ys(k);
  std::vector<PlanarPoint> centroid(k);
  std::vector<PointId> clustered;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto l = labeling.labels[i];
    if (l.is_noise()) continue;
    xs[l.id()].push_back(points[i].x);
    ys[l.id()].push_back(points[i].y);
    clustered.push_back(static_cast<PointId>(i));
  }
  for (std::size_t c = 0; c < k; ++c) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < xs[c].size(); ++j) {
      sx += xs[c][j];
      sy += ys[c][j];
    }
    const auto m = static_cast<double>(xs[c].size());
    centroid[c] = {sx / m, sy / m};
  }

  SilhouetteResult out;
  std::vector<PointId> evaluated = clustered;
  if (clustered.size() > sample_cap) {
    Rng rng(mix_seed(seed));
    for (std::size_t i = 0; i < sample_cap; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(evaluated.size() - i));
      std::swap(evaluated[i], evaluated[j]);
    }
    evaluated.resize(sample_cap);
    std::sort(evaluated.begin(), evaluated.end());
    out.sampled = true;
  }
  out.sample_size = evaluated.size();

  auto distance_sum = [](const PlanarPoint& p, const std::vector<double>& cx,
                         const std::vector<double>& cy) {
    double s = 0.0;
    const std::size_t m = cx.size();
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = cx[j] - p.x;
      const double dy = cy[j] - p.y;
      s += std::sqrt(dx * dx + dy * dy);
    }
    return s;
  };

  std::vector<std::pair<double, std::uint32_t>> order(k);
  out.per_point.reserve(evaluated.size());
  for (PointId i : evaluated) {
    const PlanarPoint p = points[i];
    const std::uint32_t own = labeling.labels[i].id();
    const std::size_t own_size = xs[own].size();
    double s = 0.0;
    if (own_size > 1) {
      const double a = distance_sum(p, xs[own], ys[own]) / static_cast<double>(own_size - 1);
      // Mean distance to a cluster is bounded below by the distance to its
      // centroid, so clusters are visited nearest-centroid first and skipped
      // once that bound reaches the best mean found.
      for (std::uint32_t c = 0; c < k; ++c) order[c] = {distance(p, centroid[c]), c};
      std::sort(order.begin(), order.end());
      double b = std::numeric_limits<double>::infinity();
      for (const auto& [bound, c] : order) {
        if (c == own) continue;
        if (bound >= b) break;
        b = std::min(b, distance_sum(p, xs[c], ys[c]) / static_cast<double>(xs[c].size()));
      }
      const double denom = std::max(a, b);
      s = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    out.per_point.emplace_back(i, s);
  }

  std::map<std::uint32_t, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  for (const auto& [i, s] : out.per_point) {
    total += s;
    auto& slot = acc[labeling.labels[i].id()];
    slot.first += s;
    ++slot.second;
  }
  out.overall = total / static_cast<double>(out.per_point.size());
  for (const auto& [c, sum_count] : acc) {
    out.per_cluster[c] = sum_count.first / static_cast<double>(sum_count.second);
  }
  return out;
}

}  // namespace urbent
