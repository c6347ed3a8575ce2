#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbent/dbscan.hpp"
#include "urbent/geo.hpp"
#include "urbent/hull.hpp"
#include "urbent/ingest.hpp"
#include "urbent/silhouette.hpp"
#include "urbent/spatial_index.hpp"
#include "urbent/synthetic.hpp"

namespace urbent {

enum class MinPtsPolicy { keep, scale };

/// When a cluster counts as unsatisfactory and how sensitivity changes on
/// re-clustering.
struct RefinePolicy {
  double max_fraction = 0.25;  ///< of all non-noise points of the root run
  double max_radius = 1000.0;  ///< meters, max member distance from centroid
  double eps_shrink = 0.5;
  MinPtsPolicy min_pts_policy = MinPtsPolicy::keep;
  std::size_t min_pts_floor = 4;  ///< lower bound for MinPtsPolicy::scale
  std::size_t max_depth = 4;
  std::size_t min_cluster_size = 30;
};

inline void validate(const RefinePolicy& policy, const Params& initial) {
  validate(initial);
  if (!(policy.max_fraction > 0.0 && policy.max_fraction <= 1.0)) {
    throw std::invalid_argument("max_fraction must lie in (0, 1]");
  }
  if (!(policy.max_radius > 0.0) || !std::isfinite(policy.max_radius)) {
    throw std::invalid_argument("max_radius must be positive");
  }
  if (!(policy.eps_shrink > 0.0 && policy.eps_shrink < 1.0)) {
    throw std::invalid_argument("eps_shrink must lie in (0, 1)");
  }
  if (policy.min_pts_floor < 1) throw std::invalid_argument("min_pts_floor must be at least 1");
  if (policy.min_cluster_size < initial.min_pts) {
    throw std::invalid_argument("min_cluster_size must be >= min_pts");
  }
}

/// Silhouette settings shared by every iteration of a run.
struct SilhouetteOptions {
  std::size_t sample_cap = kDefaultSilhouetteSampleCap;
  std::uint64_t seed = 0;
};

/// Size and spread of one cluster.
struct ClusterShape {
  std::size_t size = 0;
  PlanarPoint centroid;
  double radius = 0.0;  ///< max member distance from the centroid
};

inline ClusterShape cluster_shape(std::span<const PlanarPoint> members) {
  ClusterShape s;
  s.size = members.size();
  if (members.empty()) return s;
  double sx = 0.0, sy = 0.0;
  for (const auto& p : members) {
    sx += p.x;
    sy += p.y;
  }
  s.centroid = {sx / static_cast<double>(s.size), sy / static_cast<double>(s.size)};
  double r2 = 0.0;
  for (const auto& p : members) r2 = std::max(r2, squared_distance(p, s.centroid));
  s.radius = std::sqrt(r2);
  return s;
}

/// False when the cluster holds more than max_fraction of the root run's
/// non-noise points or spreads beyond max_radius.
inline bool is_satisfactory(const ClusterShape& shape, std::size_t root_clustered,
                            const RefinePolicy& policy) {
  if (shape.size == 0) throw std::invalid_argument("is_satisfactory: empty cluster");
  const bool too_big =
      static_cast<double>(shape.size) > policy.max_fraction * static_cast<double>(root_clustered);
  const bool too_wide = shape.radius > policy.max_radius;
  return !too_big && !too_wide;
}

inline bool is_satisfactory(std::span<const PlanarPoint> members, std::size_t root_clustered,
                            const RefinePolicy& policy) {
  return is_satisfactory(cluster_shape(members), root_clustered, policy);
}

/// Photos and POIs pooled into one point set. Photos come first (dataset
/// order), then POIs, so point id order is stable.
struct PointPool {
  GeoPoint origin;  ///< projection origin: mean coordinate of all records
  std::vector<GeoPoint> geo;
  std::vector<PlanarPoint> planar;
  std::size_t photo_count = 0;

  std::size_t size() const { return geo.size(); }
  bool is_photo(PointId id) const { return id < photo_count; }
  /// Index into Dataset::photos or Dataset::pois.
  std::size_t record_index(PointId id) const { return is_photo(id) ? id : id - photo_count; }
};

inline PointPool pool_points(const Dataset& ds) {
  PointPool pool;
  pool.photo_count = ds.photos.size();
  pool.geo.reserve(ds.photos.size() + ds.pois.size());
  for (const auto& p : ds.photos) pool.geo.push_back(p.point);
  for (const auto& p : ds.pois) pool.geo.push_back(p.point);
  if (pool.geo.size() > UINT32_MAX) throw std::invalid_argument("too many points");
  double slat = 0.0, slon = 0.0;
  for (const auto& g : pool.geo) {
    slat += g.lat;
    slon += g.lon;
  }
  if (!pool.geo.empty()) {
    const auto n = static_cast<double>(pool.geo.size());
    pool.origin = {slat / n, slon / n};
  }
  pool.planar.reserve(pool.geo.size());
  for (const auto& g : pool.geo) pool.planar.push_back(project(g, pool.origin));
  return pool;
}

/// Why a cluster ended where it did.
enum class ClusterOutcome {
  leaf,             ///< satisfactory
  leaf_max_depth,   ///< unsatisfactory, but the depth limit was reached
  leaf_unsplit,     ///< unsatisfactory; its sub-run found no cluster
  refined,          ///< unsatisfactory; re-clustered
  discarded_small,  ///< would be a leaf but has fewer than min_cluster_size points
};

inline std::string_view outcome_name(ClusterOutcome o) {
  switch (o) {
    case ClusterOutcome::leaf: return "leaf";
    case ClusterOutcome::leaf_max_depth: return "leaf_max_depth";
    case ClusterOutcome::leaf_unsplit: return "leaf_unsplit";
    case ClusterOutcome::refined: return "refined";
    case ClusterOutcome::discarded_small: return "discarded_small";
  }
  return "unknown";
}

struct IterationRecord;

struct ClusterRecord {
  std::string id;
  std::size_t size = 0;
  std::size_t photo_count = 0;
  std::size_t poi_count = 0;
  double radius_m = 0.0;
  double fraction = 0.0;  ///< of root non-noise points
  bool satisfactory = true;
  ClusterOutcome outcome = ClusterOutcome::leaf;
  std::vector<IterationRecord> subrun;  ///< exactly one entry when refined or leaf_unsplit
};

/// One DBSCAN run over either the whole pool (depth 0) or one parent cluster.
struct IterationRecord {
  std::string parent_id;  ///< empty for the root run
  std::size_t depth = 0;
  Params params;
  std::size_t input_points = 0;
  std::size_t cluster_count = 0;
  std::size_t noise_count = 0;
  std::optional<double> silhouette;
  bool silhouette_sampled = false;
  std::size_t silhouette_sample_size = 0;
  std::vector<ClusterRecord> clusters;
};

struct EntityTree {
  IterationRecord root;
};

struct Entity {
  std::string id;               ///< refinement path, e.g. "0.2.1"
  std::vector<std::uint32_t> path;
  std::size_t depth = 0;
  std::vector<PointId> members;  ///< pooled point ids, ascending
  std::vector<std::size_t> photo_indices;  ///< into Dataset::photos
  std::vector<std::size_t> poi_indices;    ///< into Dataset::pois
  std::vector<GeoPoint> hull;  ///< counter-clockwise, closed (first == last)
  GeoPoint centroid;
  double radius_m = 0.0;
  Params params_used;
  std::optional<double> silhouette_context;
  ClusterOutcome outcome = ClusterOutcome::leaf;
};

/// Where every pooled point ended up.
struct PointFates {
  std::size_t total = 0;
  std::size_t root_noise = 0;
  std::size_t subrun_noise = 0;
  std::size_t discarded_small = 0;
  std::size_t in_entities = 0;

  bool balanced() const {
    return total == root_noise + subrun_noise + discarded_small + in_entities;
  }
};

struct RefineResult {
  EntityTree tree;
  std::vector<Entity> entities;  ///< depth-first, ascending cluster id per level
  PointFates fates;
  PointPool pool;
  std::size_t iterations = 0;
};

inline Params shrink(const Params& p, const RefinePolicy& policy) {
  Params next = p;
  next.eps = p.eps * policy.eps_shrink;
  if (policy.min_pts_policy == MinPtsPolicy::scale) {
    const auto scaled =
        static_cast<std::size_t>(std::llround(static_cast<double>(p.min_pts) * policy.eps_shrink));
    next.min_pts = std::max(policy.min_pts_floor, scaled);
  }
  return next;
}

namespace detail {

class Refiner {
 public:
  Refiner(const Dataset& ds, const RefinePolicy& policy, const SilhouetteOptions& sil,
          RefineResult& out)
      : policy_(policy), sil_(sil), out_(out) {
    out_.pool = pool_points(ds);
    out_.fates.total = out_.pool.size();
  }

  void run(const Params& initial) {
    std::vector<PointId> all(out_.pool.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<PointId>(i);
    out_.tree.root = iterate(all, initial, 0, {});
  }

 private:
  IterationRecord iterate(const std::vector<PointId>& ids, const Params& params, std::size_t depth,
                          const std::vector<std::uint32_t>& prefix) {
    const PointPool& pool = out_.pool;
    std::vector<PlanarPoint> local(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) local[i] = pool.planar[ids[i]];
    const GridIndex index(local, clique_cell_size(params.eps));
    const Labeling labeling = dbscan(local, params, index);

    IterationRecord rec;
    rec.parent_id = join(prefix);
    rec.depth = depth;
    rec.params = params;
    rec.input_points = ids.size();
    rec.cluster_count = labeling.cluster_count;
    rec.noise_count = labeling.noise_count();
    const std::uint64_t iteration_seed = mix_seed(sil_.seed + out_.iterations++);
    if (auto s = silhouette(local, labeling, sil_.sample_cap, iteration_seed)) {
      rec.silhouette = s->overall;
      rec.silhouette_sampled = s->sampled;
      rec.silhouette_sample_size = s->sample_size;
    }
    if (depth == 0) {
      root_clustered_ = ids.size() - rec.noise_count;
      out_.fates.root_noise = rec.noise_count;
    } else if (rec.cluster_count > 0) {
      out_.fates.subrun_noise += rec.noise_count;
    }

    const auto members_local = labeling.members();
    for (std::uint32_t c = 0; c < labeling.cluster_count; ++c) {
      std::vector<PointId> members;
      std::vector<PlanarPoint> member_points;
      members.reserve(members_local[c].size());
      for (PointId l : members_local[c]) {
        members.push_back(ids[l]);
        member_points.push_back(local[l]);
      }
      const ClusterShape shape = cluster_shape(member_points);

      std::vector<std::uint32_t> path = prefix;
      path.push_back(c);
      ClusterRecord cr;
      cr.id = join(path);
      cr.size = members.size();
      for (PointId m : members) (pool.is_photo(m) ? cr.photo_count : cr.poi_count) += 1;
      cr.radius_m = shape.radius;
      cr.fraction = root_clustered_ ? static_cast<double>(cr.size) / static_cast<double>(root_clustered_) : 0.0;
      cr.satisfactory = is_satisfactory(shape, root_clustered_, policy_);

      if (cr.satisfactory || depth >= policy_.max_depth) {
        cr.outcome = cr.satisfactory ? ClusterOutcome::leaf : ClusterOutcome::leaf_max_depth;
        finish(cr, members, member_points, path, params, rec.silhouette);
      } else {
        IterationRecord sub = iterate(members, shrink(params, policy_), depth + 1, path);
        if (sub.cluster_count == 0) {
          cr.outcome = ClusterOutcome::leaf_unsplit;
          finish(cr, members, member_points, path, params, rec.silhouette);
        } else {
          cr.outcome = ClusterOutcome::refined;
        }
        cr.subrun.push_back(std::move(sub));
      }
      rec.clusters.push_back(std::move(cr));
    }
    return rec;
  }

  void finish(ClusterRecord& cr, const std::vector<PointId>& members,
              const std::vector<PlanarPoint>& member_points, const std::vector<std::uint32_t>& path,
              const Params& params, std::optional<double> sil) {
    if (members.size() < policy_.min_cluster_size) {
      cr.outcome = ClusterOutcome::discarded_small;
      out_.fates.discarded_small += members.size();
      return;
    }
    const PointPool& pool = out_.pool;
    Entity e;
    e.id = cr.id;
    e.path = path;
    e.depth = path.size() - 1;
    e.members = members;
    for (PointId m : members) {
      (pool.is_photo(m) ? e.photo_indices : e.poi_indices).push_back(pool.record_index(m));
    }
    for (std::size_t h : convex_hull_indices(member_points)) e.hull.push_back(pool.geo[members[h]]);
    e.hull.push_back(e.hull.front());
    double slat = 0.0, slon = 0.0;
    for (PointId m : members) {
      slat += pool.geo[m].lat;
      slon += pool.geo[m].lon;
    }
    const auto n = static_cast<double>(members.size());
    e.centroid = {slat / n, slon / n};
    e.radius_m = cr.radius_m;
    e.params_used = params;
    e.silhouette_context = sil;
    e.outcome = cr.outcome;
    out_.fates.in_entities += members.size();
    out_.entities.push_back(std::move(e));
  }

  static std::string join(const std::vector<std::uint32_t>& path) {
    std::string s;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(path[i]);
    }
    return s;
  }

  const RefinePolicy& policy_;
  const SilhouetteOptions& sil_;
  RefineResult& out_;
  std::size_t root_clustered_ = 0;
};

}  // namespace detail

/// Runs DBSCAN over all pooled records, then re-clusters every unsatisfactory
/// cluster with shrunken eps until all leaves are satisfactory or max_depth
/// is reached. Recursion is depth-first in ascending cluster id order.
inline RefineResult iterative_cluster(const Dataset& ds, const Params& initial,
                                      const RefinePolicy& policy,
                                      const SilhouetteOptions& sil = {}) {
  validate(policy, initial);
  if (ds.photos.empty() && ds.pois.empty()) {
    throw std::invalid_argument("iterative_cluster: empty dataset");
  }
  RefineResult out;
  detail::Refiner(ds, policy, sil, out).run(initial);
  return out;
}

}  // namespace urbent
