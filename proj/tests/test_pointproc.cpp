#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "maxstable/empirical.hpp"
#include "maxstable/grid.hpp"
#include "maxstable/pointproc.hpp"
#include "maxstable/spectral.hpp"
#include "test_util.hpp"

namespace maxstable {
namespace {

using testing::vec;

TEST(Rng, DeterministicAndDistinctStreams) {
  Rng a(42, 3);
  Rng b(42, 3);
  Rng c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.seed(), 42u);
  EXPECT_EQ(a.replicate(), 3u);
}

TEST(Rng, UniformIsOpenInterval) {
  Rng r(0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, ForkKeepsRecordAndDiverges) {
  Rng parent(9, 2);
  Rng child = parent.fork();
  EXPECT_EQ(child.seed(), 9u);
  EXPECT_EQ(child.replicate(), 2u);
  Rng fresh(9, 2);
  EXPECT_NE(child.next_u64(), fresh.next_u64());
}

TEST(Cascade, StubGapsGiveHarmonicPoints) {
  const FrechetCascade c = frechet_cascade_with(6, [] { return 1.0; });
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_DOUBLE_EQ(c.points[i], 1.0 / static_cast<double>(i + 1));
    EXPECT_DOUBLE_EQ(c.log_point(i), -std::log(static_cast<double>(i + 1)));
  }
  EXPECT_THROW((void)frechet_cascade_with(0, [] { return 1.0; }), std::invalid_argument);
}

TEST(Cascade, StrictlyDecreasingWithPositiveIncrements) {
  Rng rng(17);
  const FrechetCascade c = frechet_cascade(10'000, rng);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    ASSERT_GT(c.points[i], c.points[i + 1]);
    ASSERT_GT(1.0 / c.points[i + 1] - 1.0 / c.points[i], 0.0);
  }
  EXPECT_GT(c.points.back(), 0.0);
}

TEST(Cascade, Deterministic) {
  Rng a(5, 1);
  Rng b(5, 1);
  EXPECT_EQ(frechet_cascade(1000, a).points, frechet_cascade(1000, b).points);
}

TEST(Cascade, MeanCountAboveLevel) {
  const std::size_t reps = 1000;
  for (double u : {0.5, 1.0, 2.0}) {
    double total = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      Rng rng(100, r);
      const FrechetCascade c = frechet_cascade(10'000, rng);
      total += static_cast<double>(
          std::count_if(c.points.begin(), c.points.end(), [u](double p) { return p > u; }));
    }
    EXPECT_NEAR(total / reps, 1.0 / u, 3.0 * std::sqrt(1.0 / u) / std::sqrt(static_cast<double>(reps)))
        << "u=" << u;
  }
}

TEST(Cascade, MaximumIsUnitFrechet) {
  std::vector<double> maxima;
  for (std::uint64_t r = 0; r < 10'000; ++r) {
    Rng rng(200, r);
    maxima.push_back(frechet_cascade(1, rng).points[0]);
  }
  EXPECT_LT(ks_distance(maxima, unit_frechet_cdf), 0.02);
}

TEST(Cascade, IncrementsAreStandardExponential) {
  std::vector<double> gaps;
  for (std::uint64_t r = 0; r < 50; ++r) {
    Rng rng(300, r);
    const FrechetCascade c = frechet_cascade(100, rng);
    double prev = 0.0;
    for (double p : c.points) {
      gaps.push_back(1.0 / p - prev);
      prev = 1.0 / p;
    }
  }
  const double d = ks_distance(gaps, [](double x) { return x > 0 ? 1.0 - std::exp(-x) : 0.0; });
  EXPECT_LT(d, ks_critical_value(0.01, static_cast<double>(gaps.size())));
}

TEST(Box, VolumeAndValidation) {
  const Box b(vec({0.0, -1.0}), vec({2.0, 1.0}));
  EXPECT_DOUBLE_EQ(b.volume(), 4.0);
  EXPECT_TRUE(b.contains(vec({1.0, 0.0})));
  EXPECT_FALSE(b.contains(vec({2.5, 0.0})));
  EXPECT_DOUBLE_EQ(b.expanded(1.0).volume(), 16.0);
  EXPECT_THROW(Box(vec({0.0}), vec({0.0})), std::invalid_argument);
  EXPECT_THROW(Box(vec({1.0}), vec({0.0})), std::invalid_argument);
}

TEST(Storms, StubGapsOnUnitSquare) {
  const Box w(vec({0.0, 0.0}), vec({1.0, 1.0}));
  StormGenerator gen(w, [] { return 1.0; }, [] { return 0.5; });
  const StormSet s = storm_set(w, 5, gen);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_DOUBLE_EQ(s.storms[i].strength, 1.0 / static_cast<double>(i + 1));
    EXPECT_DOUBLE_EQ(s.storms[i].center[0], 0.5);
  }
}

TEST(Storms, VolumeScaling) {
  const Box w(vec({0.0}), vec({2.0}));
  StormGenerator gen(w, [] { return 1.0; }, [] { return 0.25; });
  const StormSet s = storm_set(w, 3, gen);
  EXPECT_DOUBLE_EQ(s.storms[0].strength, 2.0);
  EXPECT_DOUBLE_EQ(s.storms[0].center[0], 0.5);
}

TEST(Storms, DecreasingAndInsideWindow) {
  const Box w(vec({-1.0, 2.0}), vec({3.0, 2.5}));
  Rng rng(8);
  const StormSet s = storm_set(w, 2000, rng);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_TRUE(w.contains(s.storms[i].center));
    if (i) ASSERT_LT(s.storms[i].strength, s.storms[i - 1].strength);
  }
  EXPECT_EQ(s.seed.seed, 8u);
}

TEST(Storms, CountAboveOneIsPoissonMeanOne) {
  const Box w(vec({0.0, 0.0}), vec({1.0, 1.0}));
  double total = 0.0;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    Rng rng(400, r);
    const StormSet s = storm_set(w, 50, rng);
    total += static_cast<double>(std::count_if(s.storms.begin(), s.storms.end(),
                                               [](const Storm& st) { return st.strength > 1.0; }));
  }
  EXPECT_NEAR(total / 1000.0, 1.0, 0.1);
}

TEST(Grid, ParsesRangesAndPoints) {
  const Grid r = parse_grid("-5:0.01:1001", 1);
  EXPECT_EQ(r.size(), 1001u);
  EXPECT_DOUBLE_EQ(r[0][0], -5.0);
  EXPECT_NEAR(r[1000][0], 5.0, 1e-12);
  const Grid p = parse_grid("0,1", 1);
  EXPECT_EQ(p.size(), 2u);
  const Grid q = parse_grid("0,1", 2);
  EXPECT_EQ(q.size(), 1u);
  const Grid prod = parse_grid("0:1:2;10:1:3", 2);
  ASSERT_EQ(prod.size(), 6u);
  EXPECT_DOUBLE_EQ(prod[1][1], 11.0);  // last axis fastest
  EXPECT_DOUBLE_EQ(prod[3][0], 1.0);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW((void)parse_grid("0,0", 1), std::invalid_argument);
  EXPECT_THROW((void)parse_grid("0,1,2", 2), std::invalid_argument);
  EXPECT_THROW((void)parse_grid("a,1", 1), std::invalid_argument);
  EXPECT_THROW((void)parse_grid("", 1), std::invalid_argument);
  EXPECT_THROW(Grid(std::vector<Vector>{vec({0.0}), vec({1e-13})}), std::invalid_argument);
}

TEST(Grid, FindAndDomainCheck) {
  const Grid g = testing::grid1({-0.5, 0.0, 0.5});
  EXPECT_EQ(g.find(vec({0.5})), std::optional<std::size_t>(2));
  EXPECT_FALSE(g.find(vec({0.25})).has_value());
  EXPECT_NO_THROW(require_grid_in_domain(SpectralDistribution::exponential(vec({1.0})), g));
  EXPECT_THROW(require_grid_in_domain(SpectralDistribution::exponential(vec({0.4})), g),
               std::domain_error);
}

}  // namespace
}  // namespace maxstable
