#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "urbent/dbscan.hpp"

using urbent::Labeling;
using urbent::Params;
using urbent::PlanarPoint;

namespace {

std::vector<int> as_ints(const Labeling& l) {
  std::vector<int> out;
  for (auto c : l.labels) out.push_back(c.is_noise() ? -1 : static_cast<int>(c.id()));
  return out;
}

/// Checks the structural DBSCAN invariants on one labeling.
void check_invariants(const std::vector<PlanarPoint>& pts, const Labeling& l) {
  const double eps2 = l.params.eps * l.params.eps;
  std::vector<bool> used(l.cluster_count, false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (l.core[i]) {
      ASSERT_FALSE(l.labels[i].is_noise());
    }
    bool near_core = false;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (l.core[j] && urbent::squared_distance(pts[i], pts[j]) <= eps2) near_core = true;
    }
    if (l.labels[i].is_noise()) {
      ASSERT_FALSE(near_core) << "noise point " << i << " has a core neighbour";
    } else {
      ASSERT_LT(l.labels[i].id(), l.cluster_count);
      used[l.labels[i].id()] = true;
      ASSERT_TRUE(near_core);
    }
  }
  for (bool u : used) ASSERT_TRUE(u) << "cluster ids not contiguous";
}

}  // namespace

TEST(Dbscan, EmptyInput) {
  const std::vector<PlanarPoint> none;
  const auto l = urbent::dbscan(none, {10.0, 3});
  EXPECT_EQ(l.cluster_count, 0u);
  EXPECT_TRUE(l.labels.empty());
}

TEST(Dbscan, CoincidentPointsFormOneCluster) {
  const std::vector<PlanarPoint> pts(5, PlanarPoint{1, 1});
  for (double eps : {0.001, 1.0, 1000.0}) {
    const auto l = urbent::dbscan(pts, {eps, 5});
    EXPECT_EQ(l.cluster_count, 1u);
    EXPECT_EQ(l.noise_count(), 0u);
  }
}

TEST(Dbscan, MinPtsCountsSelf) {
  const std::vector<PlanarPoint> pts{{0, 0}, {1, 0}};
  EXPECT_EQ(urbent::dbscan(pts, {1.0, 2}).cluster_count, 1u);
  EXPECT_EQ(urbent::dbscan(pts, {1.0, 3}).cluster_count, 0u);
  EXPECT_EQ(urbent::dbscan(pts, {0.5, 1}).cluster_count, 2u);
}

TEST(Dbscan, RejectsBadParams) {
  const std::vector<PlanarPoint> pts{{0, 0}};
  EXPECT_THROW(urbent::dbscan(pts, {0.0, 3}), std::invalid_argument);
  EXPECT_THROW(urbent::dbscan(pts, {1.0, 0}), std::invalid_argument);
  const urbent::GridIndex other(std::vector<PlanarPoint>{{0, 0}, {1, 1}}, 1.0);
  EXPECT_THROW(urbent::dbscan(pts, {1.0, 1}, other), std::invalid_argument);
}

TEST(Dbscan, BorderPointJoinsFirstDiscoveredCluster) {
  // Two dense groups; point 0 sits between them within eps of a core point
  // in each but is not core itself.
  std::vector<PlanarPoint> pts{{0, 0}};
  for (int i = 0; i < 4; ++i) pts.push_back({-1.0 - 0.01 * i, 0});  // ids 1..4
  for (int i = 0; i < 4; ++i) pts.push_back({1.0 + 0.01 * i, 0});   // ids 5..8
  const auto l = urbent::dbscan(pts, {1.0, 4});
  ASSERT_EQ(l.cluster_count, 2u);
  EXPECT_FALSE(l.core[0]);
  EXPECT_EQ(l.labels[0], l.labels[1]);
  const auto o = oracle::dbscan({{0, 0}, {-1, 0}, {-1.01, 0}, {-1.02, 0}, {-1.03, 0},
                                 {1, 0}, {1.01, 0}, {1.02, 0}, {1.03, 0}},
                                1.0, 4);
  EXPECT_EQ(as_ints(l), o.labels);
}

TEST(Dbscan, TwoBlobsWithScatterMatchReference) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 10.0);
  std::uniform_real_distribution<double> u(-2000.0, 3000.0);
  std::vector<oracle::Pt> raw;
  for (int i = 0; i < 50; ++i) raw.push_back({g(rng), g(rng)});
  for (int i = 0; i < 50; ++i) raw.push_back({1000.0 + g(rng), g(rng)});
  while (raw.size() < 110) {
    const oracle::Pt p{u(rng), u(rng)};
    if (std::hypot(p.x, p.y) >= 500 && std::hypot(p.x - 1000, p.y) >= 500) raw.push_back(p);
  }
  std::shuffle(raw.begin(), raw.end(), rng);
  const auto pts = testutil::to_planar(raw);
  const auto l = urbent::dbscan(pts, {50.0, 5});
  EXPECT_EQ(l.cluster_count, 2u);
  EXPECT_EQ(l.noise_count(), 10u);
  EXPECT_EQ(as_ints(l), oracle::dbscan(raw, 50.0, 5).labels);
  check_invariants(pts, l);
}

TEST(Dbscan, OracleEquivalenceOverSeedsAndSettings) {
  const std::vector<std::pair<double, std::size_t>> settings = {
      {20.0, 4}, {35.0, 6}, {50.0, 10}, {80.0, 3}, {15.0, 1}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto raw = oracle::clumpy_points(400 + 40 * seed, 2000.0, seed);
    const auto pts = testutil::to_planar(raw);
    for (const auto& [eps, min_pts] : settings) {
      const auto l = urbent::dbscan(pts, {eps, min_pts});
      const auto o = oracle::dbscan(raw, eps, min_pts);
      ASSERT_EQ(as_ints(l), o.labels) << "seed " << seed << " eps " << eps;
      ASSERT_EQ(l.core, o.core);
      ASSERT_EQ(l.cluster_count, static_cast<std::size_t>(o.clusters));
    }
  }
}

TEST(Dbscan, InvariantsHold) {
  const auto pts = testutil::to_planar(oracle::clumpy_points(600, 1500.0, 42));
  check_invariants(pts, urbent::dbscan(pts, {30.0, 5}));
}

TEST(Dbscan, CoreSetAndCorePartitionIndependentOfOrder) {
  const auto raw = oracle::clumpy_points(800, 2000.0, 8);
  const auto pts = testutil::to_planar(raw);
  const Params params{40.0, 6};
  const auto base = urbent::dbscan(pts, params);
  std::mt19937_64 rng(1);
  for (int round = 0; round < 5; ++round) {
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<PlanarPoint> shuffled(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto l = urbent::dbscan(shuffled, params);
    ASSERT_EQ(l.cluster_count, base.cluster_count);
    std::map<std::uint32_t, std::uint32_t> rename;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const std::size_t orig = perm[i];
      ASSERT_EQ(l.core[i], base.core[orig]);
      if (!l.core[i]) continue;
      auto [it, inserted] = rename.try_emplace(l.labels[i].id(), base.labels[orig].id());
      ASSERT_EQ(it->second, base.labels[orig].id());
    }
  }
}

TEST(Dbscan, DeterministicForFixedOrder) {
  const auto pts = testutil::to_planar(oracle::clumpy_points(1000, 2000.0, 5));
  const auto a = urbent::dbscan(pts, {25.0, 4});
  const auto b = urbent::dbscan(pts, {25.0, 4});
  EXPECT_EQ(as_ints(a), as_ints(b));
  EXPECT_EQ(a.core, b.core);
}

TEST(Dbscan, AnyIndexCellSizeGivesSameLabels) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto raw = oracle::clumpy_points(700, 1500.0, 50 + seed);
    const auto pts = testutil::to_planar(raw);
    for (const auto& [eps, min_pts] : std::vector<std::pair<double, std::size_t>>{{30.0, 5}, {60.0, 12}}) {
      const auto o = oracle::dbscan(raw, eps, min_pts);
      for (double cell : {urbent::clique_cell_size(eps), eps, 0.3 * eps, 2.5 * eps}) {
        const urbent::GridIndex idx(pts, cell, {-123.4, 56.7});
        const auto l = urbent::dbscan(pts, {eps, min_pts}, idx);
        ASSERT_EQ(as_ints(l), o.labels) << "seed " << seed << " cell " << cell;
        ASSERT_EQ(l.core, o.core);
      }
    }
  }
}

TEST(Dbscan, DenseGridNearCellBoundaries) {
  // Lattice spacing equal to eps puts many pairs exactly on the boundary.
  std::vector<oracle::Pt> raw;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) raw.push_back({10.0 * i, 10.0 * j});
  }
  const auto pts = testutil::to_planar(raw);
  for (std::size_t min_pts : {3u, 5u, 6u}) {
    const auto l = urbent::dbscan(pts, {10.0, min_pts});
    EXPECT_EQ(as_ints(l), oracle::dbscan(raw, 10.0, min_pts).labels) << min_pts;
  }
}
