#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maxstable/errors.hpp"
#include "maxstable/stationarity.hpp"
#include "test_util.hpp"

namespace maxstable {
namespace {

using testing::grid1;
using testing::mat;
using testing::vec;

double exp_phi(double t) { return std::log(1.0 / (1.0 - t)); }

CriterionConfig cfg1(std::vector<double> ts, std::vector<double> u, double h) {
  std::vector<Vector> pts;
  for (double t : ts) pts.push_back(vec({t}));
  return CriterionConfig(pts, SimplexWeights(std::move(u)), vec({h}));
}

Matrix random_psd(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n01;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = n01(gen);
  }
  return a * a.transpose() / static_cast<double>(d);
}

TEST(Defect, ZeroShiftIsExactlyZero) {
  const std::vector<SpectralDistribution> dists{
      SpectralDistribution::exponential(vec({1.0})), SpectralDistribution::uniform(vec({0.0}), vec({1.0})),
      SpectralDistribution::gamma(vec({2.0}), vec({1.0})),
      SpectralDistribution::gaussian(vec({0.3}), mat(1, {2.0}))};
  for (const auto& d : dists) {
    EXPECT_EQ(defect(d, cfg1({0.1, 0.5, -0.7}, {0.2, 0.3, 0.5}, 0.0)), 0.0);
  }
}

TEST(Defect, GaussianExample) {
  const auto g = SpectralDistribution::gaussian(vec({0.0}), mat(1, {1.0}));
  EXPECT_NEAR(defect(g, cfg1({0.0, 1.0}, {0.5, 0.5}, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(cgf_multi(g, std::vector<Vector>{vec({1.0}), vec({2.0})}, SimplexWeights({0.5, 0.5})),
              -0.125, 1e-15);
}

TEST(Defect, ExponentialExample) {
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  const double left = exp_phi(0.25) - 0.5 * exp_phi(0.0) - 0.5 * exp_phi(0.5);
  const double right = exp_phi(0.5) - 0.5 * exp_phi(0.25) - 0.5 * exp_phi(0.75);
  const double value = defect(e, cfg1({0.0, 0.5}, {0.5, 0.5}, 0.25));
  EXPECT_NEAR(value, left - right, 1e-14);
  EXPECT_NEAR(value, 0.084950, 1e-6);
}

TEST(Defect, PermutationInvariant) {
  const auto u = SpectralDistribution::uniform(vec({0.0}), vec({1.0}));
  const double a = defect(u, cfg1({0.1, 0.9, -0.4}, {0.2, 0.3, 0.5}, 0.7));
  const double b = defect(u, cfg1({-0.4, 0.1, 0.9}, {0.5, 0.2, 0.3}, 0.7));
  EXPECT_NEAR(a, b, 1e-15);
}

TEST(Defect, DomainViolation) {
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_THROW((void)defect(e, cfg1({0.0, 0.5}, {0.5, 0.5}, 0.6)), DomainError);
  EXPECT_TRUE(config_domain_violation(e, cfg1({0.0, 0.5}, {0.5, 0.5}, 0.6)).has_value());
  EXPECT_FALSE(config_domain_violation(e, cfg1({0.0, 0.5}, {0.5, 0.5}, 0.4)).has_value());
}

TEST(GradientAffinity, Examples) {
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_EQ(gradient_affinity_defect(e, vec({0.0}), vec({0.5}), 0.0, vec({1.0})), 0.0);
  // finite-difference oracle of phi'
  auto fd = [](double t) {
    const double h = 1e-5;
    return (exp_phi(t + h) - exp_phi(t - h)) / (2 * h);
  };
  const double oracle = fd(0.25) - 0.5 * fd(0.0) - 0.5 * fd(0.5);
  const double value = gradient_affinity_defect(e, vec({0.0}), vec({0.5}), 0.5, vec({1.0}));
  EXPECT_NEAR(value, oracle, 1e-8);
  EXPECT_NEAR(value, -1.0 / 6.0, 1e-12);
  EXPECT_THROW((void)gradient_affinity_defect(e, vec({0.0}), vec({0.5}), 1.5, vec({1.0})),
               std::invalid_argument);
  EXPECT_THROW((void)gradient_affinity_defect(e, vec({0.0}), vec({0.5}), 0.5, vec({2.0})),
               std::invalid_argument);
}

TEST(Gaussian, DefectAndAffinityVanishOnRandomConfigs) {
  std::mt19937_64 gen(2718);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  double max_defect = 0.0;
  double max_affinity = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index d = 1 + i % 5;
    Vector mu(d);
    for (Eigen::Index j = 0; j < d; ++j) mu[j] = unit(gen);
    const auto g = SpectralDistribution::gaussian(mu, random_psd(gen, d));
    auto point = [&] {
      Vector t(d);
      for (Eigen::Index j = 0; j < d; ++j) t[j] = unit(gen);
      return t;
    };
    const std::size_t n = 2 + static_cast<std::size_t>(i % 3);
    std::vector<Vector> ts;
    std::vector<double> u;
    for (std::size_t k = 0; k < n; ++k) {
      ts.push_back(point());
      u.push_back(weight(gen));
    }
    max_defect = std::max(max_defect, std::abs(defect(g, CriterionConfig(ts, SimplexWeights(u), point()))));
    Vector dir = point();
    dir /= dir.norm();
    max_affinity = std::max(max_affinity,
                            std::abs(gradient_affinity_defect(g, point(), point(), weight(gen), dir)));
  }
  EXPECT_LT(max_defect, 1e-10);
  EXPECT_LT(max_affinity, 1e-10);
}

TEST(Search, GaussianIsConsistent) {
  Rng rng(1);
  const auto g = SpectralDistribution::gaussian(vec({0.5, -1.0}), mat(2, {2, 0.3, 0.3, 1}));
  const DefectReport r = search_violation(g, 2, 1000, default_search_box(g), rng);
  EXPECT_EQ(r.verdict, Verdict::stationary_consistent);
  EXPECT_LT(r.max_abs_defect, 1e-10);
  EXPECT_EQ(r.random_configs, 1000u);
}

TEST(Search, ExponentialOnKnownBox) {
  Rng rng(2);
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  const Box box(vec({0.0}), vec({0.6}));
  const DefectReport r = search_violation(e, 2, 1000, box, rng);
  EXPECT_EQ(r.verdict, Verdict::violated);
  EXPECT_GE(r.max_abs_defect, 0.0849);
  EXPECT_GT(r.grid_configs, 0u);
  ASSERT_TRUE(r.argmax_config.has_value());
  EXPECT_EQ(std::abs(defect(e, *r.argmax_config)), r.max_abs_defect);
  // the coarse grid alone exceeds the analytic example
  double grid_max = 0.0;
  for (std::size_t i = r.random_configs; i < r.defects.size(); ++i) {
    grid_max = std::max(grid_max, std::abs(r.defects[i]));
  }
  EXPECT_GE(grid_max, 0.084950);
}

TEST(Search, EveryNonGaussianFamilyViolates) {
  const std::vector<SpectralDistribution> dists{
      SpectralDistribution::exponential(vec({1.0})), SpectralDistribution::exponential(vec({2.0}), true),
      SpectralDistribution::uniform(vec({0.0}), vec({1.0})), SpectralDistribution::gamma(vec({2.0}), vec({1.0}))};
  for (const auto& d : dists) {
    Rng rng(3);
    const DefectReport r = search_violation(d, 2, 1000, default_search_box(d), rng);
    EXPECT_EQ(r.verdict, Verdict::violated) << to_spec_string(d);
    EXPECT_GT(r.max_abs_defect, kTolDefect);
  }
}

TEST(Search, TieBreakIsLowestIndexAndDeterministic) {
  Rng a(4);
  Rng b(4);
  const auto g = SpectralDistribution::gaussian(vec({0.0}), mat(1, {0.0}));
  const DefectReport r = search_violation(g, 2, 50, Box(vec({-1.0}), vec({1.0})), a, 1);
  EXPECT_EQ(r.max_abs_defect, 0.0);
  EXPECT_EQ(r.argmax, 0u);
  const DefectReport r4 = search_violation(g, 2, 50, Box(vec({-1.0}), vec({1.0})), b, 4);
  EXPECT_EQ(r.defects, r4.defects);
}

TEST(Search, Errors) {
  Rng rng(0);
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_THROW((void)search_violation(e, 2, 10, Box(vec({0.0}), vec({2.0})), rng), DomainError);
  EXPECT_THROW((void)search_violation(e, 2, 0, Box(vec({0.0}), vec({0.5})), rng), std::invalid_argument);
  EXPECT_THROW((void)search_violation(e, 0, 10, Box(vec({0.0}), vec({0.5})), rng), std::invalid_argument);
}

// Least squares of phi on (t, t^2/2) via normal equations, d = 1.
std::pair<Vector, double> fit_oracle(const SpectralDistribution& d, const std::vector<double>& ts) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (double t : ts) {
    const Eigen::Vector2d row(t, 0.5 * t * t);
    a += row * row.transpose();
    b += row * cgf(d, vec({t}));
  }
  const Eigen::Vector2d coef = a.ldlt().solve(b);
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, std::abs(coef[0] * t + coef[1] * 0.5 * t * t - cgf(d, vec({t}))));
  return {coef, worst};
}

TEST(QuadraticFit, GaussianIsExact) {
  const auto g = SpectralDistribution::gaussian(vec({1.0, 0.0}), mat(2, {1, 0, 0, 1}));
  std::vector<Vector> pts;
  for (double x : {-1.0, 0.0, 0.5, 1.0}) {
    for (double y : {-0.5, 0.3, 1.2}) pts.push_back(vec({x, y}));
  }
  const QuadraticFit fit = quadratic_fit_check(g, pts);
  EXPECT_NEAR(fit.mu[0], 1.0, 1e-8);
  EXPECT_NEAR(fit.mu[1], 0.0, 1e-8);
  EXPECT_LT((fit.sigma - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(fit.max_residual, 1e-10);
}

TEST(QuadraticFit, NonGaussianResiduals) {
  std::vector<double> ts;
  std::vector<Vector> pts;
  for (int i = 0; i <= 12; ++i) {
    ts.push_back(0.05 * i);
    pts.push_back(vec({0.05 * i}));
  }
  for (const auto& d : {SpectralDistribution::exponential(vec({1.0})),
                        SpectralDistribution::gamma(vec({2.0}), vec({1.0})),
                        SpectralDistribution::uniform(vec({0.0}), vec({1.0}))}) {
    const QuadraticFit fit = quadratic_fit_check(d, pts);
    const auto [coef, worst] = fit_oracle(d, ts);
    EXPECT_NEAR(fit.mu[0], coef[0], 1e-9) << to_spec_string(d);
    EXPECT_NEAR(fit.sigma(0, 0), coef[1], 1e-8);
    EXPECT_NEAR(fit.max_residual, worst, 1e-10);
    if (d.family() != Family::uniform) EXPECT_GT(fit.max_residual, 1e-3);
    // consistency of levels: residual above tolerance whenever the search flags a violation
    Rng rng(5);
    if (search_violation(d, 2, 200, default_search_box(d), rng).verdict == Verdict::violated) {
      EXPECT_GT(fit.max_residual, kTolDefect);
    }
  }
}

TEST(QuadraticFit, Errors) {
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_THROW((void)quadratic_fit_check(e, {vec({0.1}), vec({0.2})}), std::invalid_argument);
  EXPECT_THROW((void)quadratic_fit_check(e, {vec({0.1}), vec({0.1}), vec({0.1})}), std::invalid_argument);
  EXPECT_THROW((void)quadratic_fit_check(e, {vec({0.1}), vec({0.2}), vec({1.5})}), DomainError);
}

TEST(Verify, SmallRunsReachTheExpectedVerdicts) {
  VerifyOptions options;
  options.n_points = 1000;
  options.budget = 300;
  Rng g_rng(10);
  const auto g = SpectralDistribution::gaussian(vec({0.0}), mat(1, {1.0}));
  const CharacterizationReport rg = verify_characterization(g, grid1({-0.5, 0.0, 0.5}), 2000, g_rng, options);
  EXPECT_EQ(rg.verdict, "Gaussian-consistent");
  EXPECT_TRUE(rg.marginals_pass);
  EXPECT_EQ(rg.marginals.size(), 3u);
  Rng e_rng(10);
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  const CharacterizationReport re = verify_characterization(e, grid1({-0.5, 0.0, 0.5}), 2000, e_rng, options);
  EXPECT_EQ(re.verdict, "non-stationary in dimension 2");
  EXPECT_EQ(re.defect.verdict, Verdict::violated);
  const nlohmann::json j = to_json(re);
  EXPECT_EQ(j["verdict"], "non-stationary in dimension 2");
  EXPECT_EQ(j["marginals"].size(), 3u);
  EXPECT_TRUE(j["shift"].contains("distance"));
}

TEST(Verify, Preconditions) {
  Rng rng(0);
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_THROW((void)verify_characterization(e, grid1({0.0, 1.0}), 200, rng), DomainError);
  EXPECT_THROW((void)verify_characterization(e, grid1({0.0, 0.5}), 50, rng), std::invalid_argument);
  EXPECT_THROW((void)verify_characterization(e, grid1({0.0}), 200, rng), std::invalid_argument);
}

}  // namespace
}  // namespace maxstable
