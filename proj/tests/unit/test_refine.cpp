#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "urbent/refine.hpp"

using urbent::PlanarPoint;
using urbent::RefinePolicy;

namespace {

urbent::Dataset photos_at(const std::vector<urbent::GeoPoint>& pts) {
  urbent::Dataset ds;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    urbent::PhotoRecord p;
    p.id = "p" + std::to_string(i);
    p.point = pts[i];
    p.taken_at = 1400000000;
    ds.photos.push_back(p);
  }
  return ds;
}

// Nested fixture settings: depth 0 at 500 m merges the whole center, depth 1
// runs at 100 m.
const urbent::Params kNestedParams{500.0, 25};
RefinePolicy nested_policy() {
  RefinePolicy p;
  p.eps_shrink = 0.2;
  return p;
}

void collect_iterations(const urbent::IterationRecord& rec, std::vector<const urbent::IterationRecord*>& out) {
  out.push_back(&rec);
  for (const auto& c : rec.clusters) {
    for (const auto& s : c.subrun) collect_iterations(s, out);
  }
}

void check_refine_invariants(const urbent::RefineResult& r, const RefinePolicy& policy) {
  EXPECT_TRUE(r.fates.balanced());
  EXPECT_EQ(r.fates.total, r.pool.size());
  std::vector<int> owner(r.pool.size(), -1);
  std::size_t in_entities = 0;
  for (std::size_t e = 0; e < r.entities.size(); ++e) {
    const auto& ent = r.entities[e];
    EXPECT_GE(ent.members.size(), policy.min_cluster_size);
    EXPECT_LE(ent.depth, policy.max_depth);
    EXPECT_TRUE(std::is_sorted(ent.members.begin(), ent.members.end()));
    EXPECT_EQ(ent.photo_indices.size() + ent.poi_indices.size(), ent.members.size());
    in_entities += ent.members.size();
    for (auto m : ent.members) {
      ASSERT_EQ(owner[m], -1) << "point " << m << " in two leaves";
      owner[m] = static_cast<int>(e);
    }
    // hull is closed and its vertices are member coordinates
    ASSERT_GE(ent.hull.size(), 2u);
    EXPECT_EQ(ent.hull.front(), ent.hull.back());
    std::set<std::pair<double, double>> coords;
    for (auto m : ent.members) coords.insert({r.pool.geo[m].lat, r.pool.geo[m].lon});
    for (const auto& v : ent.hull) EXPECT_TRUE(coords.count({v.lat, v.lon}));
  }
  EXPECT_EQ(in_entities, r.fates.in_entities);

  std::vector<const urbent::IterationRecord*> its;
  collect_iterations(r.tree.root, its);
  EXPECT_EQ(its.size(), r.iterations);
  for (const auto* it : its) {
    EXPECT_LE(it->depth, policy.max_depth);
    std::size_t clustered = 0;
    for (const auto& c : it->clusters) {
      clustered += c.size;
      for (const auto& sub : c.subrun) {
        EXPECT_EQ(sub.input_points, c.size);
        EXPECT_EQ(sub.parent_id, c.id);
        EXPECT_EQ(sub.depth, it->depth + 1);
      }
      if (c.outcome == urbent::ClusterOutcome::refined) {
        ASSERT_EQ(c.subrun.size(), 1u);
        EXPECT_GT(c.subrun.front().cluster_count, 0u);
        EXPECT_FALSE(c.satisfactory);
      }
    }
    EXPECT_EQ(clustered + it->noise_count, it->input_points);
    EXPECT_EQ(it->silhouette.has_value(), it->cluster_count >= 2);
  }
}

}  // namespace

TEST(IsSatisfactory, Examples) {
  RefinePolicy policy;
  policy.max_fraction = 0.25;
  policy.max_radius = 500;
  // 90% of all points
  EXPECT_FALSE(urbent::is_satisfactory(urbent::ClusterShape{900, {}, 10.0}, 1000, policy));
  EXPECT_TRUE(urbent::is_satisfactory(urbent::ClusterShape{30, {}, 120.0}, 10000, policy));
  EXPECT_FALSE(urbent::is_satisfactory(urbent::ClusterShape{30, {}, 800.0}, 10000, policy));
  // boundary: exactly max_fraction and exactly max_radius are fine
  EXPECT_TRUE(urbent::is_satisfactory(urbent::ClusterShape{250, {}, 500.0}, 1000, policy));
  EXPECT_FALSE(urbent::is_satisfactory(urbent::ClusterShape{251, {}, 0.0}, 1000, policy));
  EXPECT_THROW(urbent::is_satisfactory(urbent::ClusterShape{}, 10, policy), std::invalid_argument);
}

TEST(IsSatisfactory, RadiusIsMaxDistanceFromCentroid) {
  const std::vector<PlanarPoint> pts{{0, 0}, {2, 0}, {1, 0}, {1, 3}};
  const auto s = urbent::cluster_shape(pts);
  EXPECT_DOUBLE_EQ(s.centroid.x, 1.0);
  EXPECT_DOUBLE_EQ(s.centroid.y, 0.75);
  EXPECT_DOUBLE_EQ(s.radius, 2.25);
}

TEST(Shrink, KeepAndScalePolicies) {
  RefinePolicy policy;
  policy.eps_shrink = 0.5;
  EXPECT_EQ(urbent::shrink({150, 25}, policy).min_pts, 25u);
  EXPECT_DOUBLE_EQ(urbent::shrink({150, 25}, policy).eps, 75.0);
  policy.min_pts_policy = urbent::MinPtsPolicy::scale;
  EXPECT_EQ(urbent::shrink({150, 25}, policy).min_pts, 13u);
  EXPECT_EQ(urbent::shrink({150, 6}, policy).min_pts, 4u);  // floor
}

TEST(ConvexHull, TriangleComesBackCounterClockwise) {
  const std::vector<PlanarPoint> pts{{0, 0}, {0, 1}, {1, 0}};
  const auto h = urbent::convex_hull(pts);
  ASSERT_EQ(h.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GT(urbent::cross(h[i], h[(i + 1) % 3], h[(i + 2) % 3]), 0.0);
  }
}

TEST(ConvexHull, SquareDropsInteriorPoint) {
  const std::vector<PlanarPoint> pts{{0.5, 0.5}, {0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto idx = urbent::convex_hull_indices(pts);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()), (std::set<std::size_t>{1, 2, 3, 4}));
}

TEST(ConvexHull, DegenerateInputs) {
  EXPECT_THROW(urbent::convex_hull(std::vector<PlanarPoint>{}), std::invalid_argument);
  EXPECT_EQ(urbent::convex_hull(std::vector<PlanarPoint>{{3, 4}}).size(), 1u);
  EXPECT_EQ(urbent::convex_hull(std::vector<PlanarPoint>(4, PlanarPoint{3, 4})).size(), 1u);
  const auto line = urbent::convex_hull(std::vector<PlanarPoint>{{0, 0}, {2, 2}, {1, 1}, {3, 3}});
  EXPECT_EQ(line, (std::vector<PlanarPoint>{{0, 0}, {3, 3}}));
}

TEST(ConvexHull, ContainsEveryInputPoint) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = testutil::to_planar(oracle::random_points(500, 100.0, seed));
    const auto h = urbent::convex_hull(pts);
    ASSERT_GE(h.size(), 3u);
    for (std::size_t i = 0; i < h.size(); ++i) {
      EXPECT_GT(urbent::cross(h[i], h[(i + 1) % h.size()], h[(i + 2) % h.size()]), 0.0)
          << "collinear or reflex vertex";
      EXPECT_NE(std::find(pts.begin(), pts.end(), h[i]), pts.end());
    }
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < h.size(); ++i) {
        ASSERT_GE(urbent::cross(h[i], h[(i + 1) % h.size()], p), 0.0);
      }
    }
  }
}

TEST(IterativeCluster, SingleCompactBlobIsOneLeaf) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 25.0);
  const urbent::GeoPoint c{45.46, 9.19};
  std::vector<urbent::GeoPoint> pts;
  while (pts.size() < 200) {
    const urbent::PlanarPoint off{g(rng), g(rng)};
    if (std::hypot(off.x, off.y) <= 80.0) pts.push_back(urbent::unproject(off, c));
  }
  RefinePolicy policy;
  policy.max_radius = 500;
  policy.max_fraction = 1.0;
  const auto r = urbent::iterative_cluster(photos_at(pts), {150, 25}, policy);
  ASSERT_EQ(r.entities.size(), 1u);
  EXPECT_EQ(r.entities[0].id, "0");
  EXPECT_EQ(r.entities[0].depth, 0u);
  EXPECT_EQ(r.entities[0].members.size(), 200u);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_FALSE(r.entities[0].silhouette_context);
  check_refine_invariants(r, policy);
}

TEST(IterativeCluster, AllNoiseGivesNoEntities) {
  std::vector<urbent::GeoPoint> pts;
  for (const auto& p : oracle::random_points(300, 10000.0, 3)) {
    pts.push_back(urbent::unproject({p.x, p.y}, {45.46, 9.19}));
  }
  const RefinePolicy policy;
  const auto r = urbent::iterative_cluster(photos_at(pts), {5.0, 5}, policy);
  EXPECT_TRUE(r.entities.empty());
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.tree.root.cluster_count, 0u);
  EXPECT_EQ(r.fates.root_noise, 300u);
  check_refine_invariants(r, policy);
}

TEST(IterativeCluster, RejectsEmptyDatasetAndBadPolicy) {
  EXPECT_THROW(urbent::iterative_cluster({}, {150, 25}, {}), std::invalid_argument);
  const auto ds = photos_at({{45.46, 9.19}});
  RefinePolicy bad;
  bad.eps_shrink = 1.0;
  EXPECT_THROW(urbent::iterative_cluster(ds, {150, 25}, bad), std::invalid_argument);
  bad = {};
  bad.min_cluster_size = 10;
  EXPECT_THROW(urbent::iterative_cluster(ds, {150, 25}, bad), std::invalid_argument);
  bad = {};
  bad.max_fraction = 0.0;
  EXPECT_THROW(urbent::iterative_cluster(ds, {150, 25}, bad), std::invalid_argument);
}

TEST(IterativeCluster, NestedCenterSplitsAtDepthOne) {
  const auto spec = testutil::load_spec("nested.spec");
  const auto policy = nested_policy();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = urbent::generate_synthetic(spec, seed);
    const auto r = urbent::iterative_cluster(ds, kNestedParams, policy);
    ASSERT_EQ(r.tree.root.cluster_count, 1u);
    EXPECT_FALSE(r.tree.root.clusters[0].satisfactory);
    EXPECT_GT(r.tree.root.clusters[0].radius_m, policy.max_radius);
    std::size_t depth_one = 0;
    for (const auto& e : r.entities) depth_one += e.depth == 1;
    EXPECT_GE(depth_one, 3u);
    EXPECT_GE(testutil::recovery_ari(ds, r, [](int t) { return t >= 0 && t < 3; }), 0.95);
    check_refine_invariants(r, policy);
  }
}

TEST(IterativeCluster, DepthCapAndUnsplitLeaves) {
  const auto spec = testutil::load_spec("nested.spec");
  const auto ds = urbent::generate_synthetic(spec, 1);
  auto policy = nested_policy();
  policy.max_depth = 0;
  const auto capped = urbent::iterative_cluster(ds, kNestedParams, policy);
  ASSERT_EQ(capped.entities.size(), 1u);
  EXPECT_EQ(capped.entities[0].outcome, urbent::ClusterOutcome::leaf_max_depth);
  check_refine_invariants(capped, policy);

  // A shrink so strong that the sub-run finds nothing keeps the parent.
  policy = nested_policy();
  policy.eps_shrink = 1e-4;
  const auto unsplit = urbent::iterative_cluster(ds, kNestedParams, policy);
  ASSERT_EQ(unsplit.entities.size(), 1u);
  EXPECT_EQ(unsplit.entities[0].outcome, urbent::ClusterOutcome::leaf_unsplit);
  EXPECT_EQ(unsplit.fates.subrun_noise, 0u);
  EXPECT_EQ(unsplit.tree.root.clusters[0].subrun.size(), 1u);
  check_refine_invariants(unsplit, policy);
}

TEST(IterativeCluster, InvariantsAcrossPolicies) {
  const auto spec = testutil::load_spec("three_blobs.spec");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto ds = urbent::generate_synthetic(spec, seed);
    for (double frac : {0.1, 0.25, 1.0}) {
      for (auto mp : {urbent::MinPtsPolicy::keep, urbent::MinPtsPolicy::scale}) {
        RefinePolicy policy;
        policy.max_fraction = frac;
        policy.max_radius = 150;
        policy.min_pts_policy = mp;
        policy.max_depth = 3;
        const auto r = urbent::iterative_cluster(ds, {150, 25}, policy);
        check_refine_invariants(r, policy);
      }
    }
  }
}

TEST(IterativeCluster, Deterministic) {
  const auto ds = urbent::generate_synthetic(testutil::load_spec("nested.spec"), 2);
  const auto a = urbent::iterative_cluster(ds, kNestedParams, nested_policy(), {200, 5});
  const auto b = urbent::iterative_cluster(ds, kNestedParams, nested_policy(), {200, 5});
  ASSERT_EQ(a.entities.size(), b.entities.size());
  for (std::size_t i = 0; i < a.entities.size(); ++i) {
    EXPECT_EQ(a.entities[i].id, b.entities[i].id);
    EXPECT_EQ(a.entities[i].members, b.entities[i].members);
    EXPECT_EQ(a.entities[i].hull, b.entities[i].hull);
    EXPECT_EQ(a.entities[i].silhouette_context, b.entities[i].silhouette_context);
  }
  EXPECT_EQ(a.tree.root.silhouette, b.tree.root.silhouette);
}
