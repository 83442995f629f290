#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "maxstable/errors.hpp"
#include "maxstable/spectral.hpp"
#include "test_util.hpp"

namespace maxstable {
namespace {

using testing::mat;
using testing::vec;

// Closed forms written independently of the library's log1p/expm1 forms.
double exp_cgf_oracle(double lambda, double t) { return std::log(lambda / (lambda - t)); }
double gamma_cgf_oracle(double k, double theta, double t) { return k * std::log(theta / (theta - t)); }
double uniform_cgf_oracle(double a, double b, double t) {
  return std::log((std::exp(b * t) - std::exp(a * t)) / ((b - a) * t));
}

std::vector<SpectralDistribution> registry_1d() {
  return {SpectralDistribution::gaussian(vec({0.3}), mat(1, {2.0})),
          SpectralDistribution::exponential(vec({1.5})),
          SpectralDistribution::exponential(vec({2.0}), true),
          SpectralDistribution::uniform(vec({-1.0}), vec({2.0})),
          SpectralDistribution::gamma(vec({2.0}), vec({1.0}))};
}

TEST(Cgf, GaussianSpotValue) {
  const auto d = SpectralDistribution::gaussian(vec({0.0}), mat(1, {1.0}));
  EXPECT_DOUBLE_EQ(cgf(d, vec({2.0})), 2.0);
}

TEST(Cgf, ExponentialSpotValue) {
  const auto d = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_NEAR(cgf(d, vec({0.5})), 0.693147, 1e-6);
  EXPECT_NEAR(cgf(d, vec({0.5})), -std::log(0.5), 1e-15);
}

TEST(Cgf, ZeroAtOriginExactly) {
  for (const auto& d : registry_1d()) EXPECT_EQ(cgf(d, vec({0.0})), 0.0) << to_spec_string(d);
  const auto g = SpectralDistribution::gaussian(vec({1.0, -2.0}), mat(2, {2, 1, 1, 3}));
  EXPECT_EQ(cgf(g, vec({0.0, 0.0})), 0.0);
  const auto u = SpectralDistribution::uniform(vec({0.0, 1.0}), vec({1.0, 4.0}));
  EXPECT_EQ(cgf(u, vec({0.0, 0.0})), 0.0);
}

TEST(Cgf, MatchesIndependentClosedForms) {
  for (double t : {-2.0, -0.3, 0.1, 0.7, 1.2}) {
    EXPECT_NEAR(cgf(SpectralDistribution::exponential(vec({1.5})), vec({t})),
                exp_cgf_oracle(1.5, t), 1e-13);
    EXPECT_NEAR(cgf(SpectralDistribution::gamma(vec({2.5}), vec({1.3})), vec({t})),
                gamma_cgf_oracle(2.5, 1.3, t), 1e-12);
    EXPECT_NEAR(cgf(SpectralDistribution::uniform(vec({-1.0}), vec({2.0})), vec({t})),
                uniform_cgf_oracle(-1.0, 2.0, t), 1e-12);
  }
  // centered exponential subtracts t / lambda
  EXPECT_NEAR(cgf(SpectralDistribution::exponential(vec({2.0}), true), vec({0.5})),
              exp_cgf_oracle(2.0, 0.5) - 0.25, 1e-14);
}

TEST(Cgf, UniformNearZeroIsContinuous) {
  const auto u = SpectralDistribution::uniform(vec({0.0}), vec({1.0}));
  // phi(t) = t/2 + t^2/24 + O(t^4)
  for (double t : {1e-12, -1e-10, 5e-9, 2e-8, 1e-6}) {
    EXPECT_NEAR(cgf(u, vec({t})), t / 2 + t * t / 24, 1e-15) << t;
  }
}

TEST(Cgf, UniformAgreesWithQuadrature) {
  const double a = -0.5;
  const double b = 1.5;
  const double t = 1.7;
  const int n = 2000;
  const double h = (b - a) / n;
  double s = std::exp(a * t) + std::exp(b * t);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp((a + i * h) * t);
  const double oracle = std::log(s * h / 3.0 / (b - a));
  EXPECT_NEAR(cgf(SpectralDistribution::uniform(vec({a}), vec({b})), vec({t})), oracle, 1e-10);
}

TEST(Cgf, DomainViolationNamesCoordinate) {
  const auto e = SpectralDistribution::exponential(vec({1.0, 2.0}));
  try {
    (void)cgf(e, vec({0.5, 2.0}));
    FAIL() << "expected DomainError";
  } catch (const DomainError& err) {
    EXPECT_EQ(err.coordinate(), 1u);
  }
  EXPECT_THROW((void)cgf(SpectralDistribution::gamma(vec({2.0}), vec({1.0})), vec({1.0})),
               DomainError);
  EXPECT_NO_THROW((void)cgf(e, vec({0.999, 1.999})));
}

TEST(Cgf, MonteCarloAgreement) {
  // log of the MC mean of exp<X,t> within 3 standard errors (delta method).
  std::mt19937_64 pick(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto dists = registry_1d();
    const auto& d = dists[static_cast<std::size_t>(rep) % dists.size()];
    const double bound = std::min(domain_upper_bound(d)[0], 1.0);
    // keep t below half the bound so the MC variance is finite
    const double t = -1.0 + (bound / 2.0 + 1.0) * unit(pick) * 0.9;
    Rng rng(1234, static_cast<std::uint64_t>(rep));
    const Matrix x = sample(d, 1'000'000, rng);
    const Eigen::ArrayXd w = (x.col(0).array() * t).exp();
    const double m = w.mean();
    const double se = std::sqrt((w - m).square().mean() / static_cast<double>(w.size()));
    EXPECT_NEAR(std::log(m), cgf(d, vec({t})), 3.0 * se / m + 1e-12) << to_spec_string(d) << " t=" << t;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(Cgf, ConvexityAndJensen) {
  std::mt19937_64 pick(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& d : registry_1d()) {
    const double hi = std::min(domain_upper_bound(d)[0] - 1e-3, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const double t1 = -3.0 + (hi + 3.0) * unit(pick);
      const double t2 = -3.0 + (hi + 3.0) * unit(pick);
      const double delta = unit(pick);
      const double lhs = cgf(d, vec({(1 - delta) * t1 + delta * t2}));
      const double rhs = (1 - delta) * cgf(d, vec({t1})) + delta * cgf(d, vec({t2}));
      ASSERT_LE(lhs, rhs + 1e-12);
      const std::vector<Vector> ts{vec({t1}), vec({t2})};
      ASSERT_LE(cgf_multi(d, ts, SimplexWeights({1 - delta, delta})), 1e-12);
    }
  }
}

TEST(CgfMulti, SpecExamples) {
  const auto g = SpectralDistribution::gaussian(vec({0.0}), mat(1, {1.0}));
  const std::vector<Vector> ts{vec({0.0}), vec({1.0})};
  EXPECT_NEAR(cgf_multi(g, ts, SimplexWeights({0.5, 0.5})), -0.125, 1e-15);

  const auto e = SpectralDistribution::exponential(vec({1.0}));
  const std::vector<Vector> te{vec({0.0}), vec({0.5})};
  const double oracle = exp_cgf_oracle(1.0, 0.25) - 0.5 * exp_cgf_oracle(1.0, 0.5);
  EXPECT_NEAR(cgf_multi(e, te, SimplexWeights({0.5, 0.5})), oracle, 1e-15);
  EXPECT_NEAR(oracle, -0.058891, 1e-6);

  for (const auto& d : registry_1d()) {
    const std::vector<Vector> one{vec({0.3})};
    EXPECT_EQ(cgf_multi(d, one, SimplexWeights({1.0})), 0.0);
  }
}

TEST(SimplexWeights, ValidatesAndRenormalizes) {
  const SimplexWeights u({1.0, 3.0});
  EXPECT_DOUBLE_EQ(u[0], 0.25);
  EXPECT_DOUBLE_EQ(u[1], 0.75);
  EXPECT_THROW(SimplexWeights({-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(SimplexWeights({0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(SimplexWeights(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(SimplexWeights({std::nan(""), 1.0}), std::invalid_argument);
}

TEST(Gradient, SpecExamples) {
  const auto g = SpectralDistribution::gaussian(vec({1.0, 0.0}), mat(2, {2, 1, 1, 2}));
  const Vector grad = cgf_gradient(g, vec({1.0, 1.0}));
  EXPECT_DOUBLE_EQ(grad[0], 4.0);
  EXPECT_DOUBLE_EQ(grad[1], 3.0);
  EXPECT_DOUBLE_EQ(cgf_gradient(SpectralDistribution::exponential(vec({1.0})), vec({0.5}))[0], 2.0);
  for (const auto& d : registry_1d()) {
    EXPECT_NEAR(cgf_gradient(d, vec({0.0}))[0], mean(d)[0], 1e-15) << to_spec_string(d);
  }
}

TEST(Gradient, RejectsPointsNearBoundary) {
  const auto e = SpectralDistribution::exponential(vec({1.0}));
  EXPECT_THROW((void)cgf_gradient(e, vec({1.0 - 1e-9})), DomainError);
  EXPECT_THROW((void)cgf_gradient(e, vec({1.5})), DomainError);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 pick(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SpectralDistribution> dists = registry_1d();
  dists.push_back(SpectralDistribution::gaussian(vec({1, 2, 3}), mat(3, {2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 1.5})));
  dists.push_back(SpectralDistribution::gamma(vec({0.5, 3.0}), vec({2.0, 0.7})));
  dists.push_back(SpectralDistribution::uniform(vec({0.0, -2.0}), vec({1.0, 0.5})));
  int points = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& d = dists[static_cast<std::size_t>(i) % dists.size()];
    const Vector bound = domain_upper_bound(d);
    Vector t(static_cast<Eigen::Index>(d.dimension()));
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      const double hi = std::isfinite(bound[j]) ? bound[j] - 0.05 : 2.0;
      t[j] = -2.0 + (hi + 2.0) * unit(pick);
    }
    const Vector exact = cgf_gradient(d, t);
    const Vector fd = cgf_gradient_fd(d, t);
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      ASSERT_LE(std::abs(exact[j] - fd[j]), 1e-6 * std::max(1.0, std::abs(exact[j])))
          << to_spec_string(d) << " j=" << j;
    }
    ++points;
  }
  EXPECT_EQ(points, 1000);
}

TEST(Sampling, Moments) {
  Rng rng(2024);
  const Matrix g = sample(SpectralDistribution::gaussian(vec({0, 0}), mat(2, {1, 0, 0, 1})), 100'000, rng);
  EXPECT_LT(std::abs(g.col(0).mean()), 0.02);
  EXPECT_LT(std::abs(g.col(1).mean()), 0.02);
  const Matrix u = sample(SpectralDistribution::uniform(vec({0.0}), vec({1.0})), 100'000, rng);
  EXPECT_LT(std::abs(u.col(0).mean() - 0.5), 0.005);
  EXPECT_GE(u.minCoeff(), 0.0);
  EXPECT_LE(u.maxCoeff(), 1.0);
}

TEST(Sampling, GaussianCovariance) {
  Rng rng(5);
  const Matrix sigma = mat(2, {2.0, 0.8, 0.8, 1.0});
  const Matrix x = sample(SpectralDistribution::gaussian(vec({1.0, -1.0}), sigma), 200'000, rng);
  const Matrix c = x.rowwise() - x.colwise().mean();
  const Matrix cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  EXPECT_NEAR(cov(0, 0), 2.0, 0.03);
  EXPECT_NEAR(cov(0, 1), 0.8, 0.02);
  EXPECT_NEAR(cov(1, 1), 1.0, 0.02);
}

TEST(Sampling, TiltedMeanEqualsGradient) {
  // E_t X = grad phi(t) under the exponentially tilted law.
  for (const auto& d : registry_1d()) {
    const double t = std::min(0.4, domain_upper_bound(d)[0] / 3.0);
    Rng rng(77);
    const Matrix x = sample_tilted(d, vec({t}), 200'000, rng);
    const double m = x.col(0).mean();
    const double sd = std::sqrt((x.col(0).array() - m).square().mean());
    EXPECT_NEAR(m, cgf_gradient(d, vec({t}))[0], 4.0 * sd / std::sqrt(200'000.0)) << to_spec_string(d);
  }
}

TEST(Sampling, Deterministic) {
  for (const auto& d : registry_1d()) {
    Rng a(11);
    Rng b(11);
    EXPECT_EQ(sample(d, 1, a), sample(d, 1, b));
  }
}

TEST(Sampling, SemidefiniteClampAndRejection) {
  // rank-one covariance samples along a line
  Rng rng(3);
  const Matrix x = sample(SpectralDistribution::gaussian(vec({0, 0}), mat(2, {1, 1, 1, 1})), 1000, rng);
  EXPECT_LT((x.col(0) - x.col(1)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW((void)SpectralDistribution::gaussian(vec({0, 0}), mat(2, {1, 2, 2, 1})), NumericError);
  EXPECT_THROW((void)SpectralDistribution::gaussian(vec({0, 0}), mat(2, {1, 0.5, 0.4, 1})),
               std::invalid_argument);
}

TEST(Parameters, Validation) {
  EXPECT_THROW((void)SpectralDistribution::exponential(vec({0.0})), std::invalid_argument);
  EXPECT_THROW((void)SpectralDistribution::gamma(vec({-1.0}), vec({1.0})), std::invalid_argument);
  EXPECT_THROW((void)SpectralDistribution::uniform(vec({1.0}), vec({1.0})), std::invalid_argument);
  EXPECT_THROW((void)SpectralDistribution::uniform(vec({0.0, 0.0}), vec({1.0})), std::invalid_argument);
}

TEST(ShapeFunction, QuadraticIsExact) {
  const auto k = ShapeFunction::quadratic(vec({1.0, -1.0}), mat(2, {2, 1, 1, 2}), 0.5);
  EXPECT_EQ(k(vec({1.0, 2.0})), 1.0 - 2.0 + 0.5 * (2 + 2 * 2 + 2 * 4) + 0.5);
  const auto d = SpectralDistribution::gamma(vec({2.0}), vec({1.0}));
  EXPECT_EQ(ShapeFunction::cgf_of(d)(vec({0.0})), 0.0);
  EXPECT_EQ(ShapeFunction::cgf_of(d)(vec({0.3})), cgf(d, vec({0.3})));
}

TEST(Format, RoundTripIsBitExact) {
  const std::vector<std::string> specs{
      "gaussian:mu=0,0;sigma=1,0.5,0.5,1", "exp:lambda=1;centered=false",
      "exp:lambda=0.1,3;centered=true",    "uniform:a=0;b=1",
      "gamma:k=2;theta=1",                 "gaussian:mu=0.1;sigma=0.30000000000000004"};
  for (const auto& s : specs) {
    const SpectralDistribution d = parse_distribution(s);
    const SpectralDistribution back = parse_distribution(to_spec_string(d));
    EXPECT_TRUE(back == d) << s << " -> " << to_spec_string(d);
    EXPECT_EQ(to_spec_string(back), to_spec_string(d));
  }
  EXPECT_EQ(to_spec_string(parse_distribution("exponential:lambda=1")), "exp:lambda=1;centered=false");
  EXPECT_EQ(to_spec_string(parse_distribution("gaussian:sigma=1")), "gaussian:mu=0;sigma=1");

  std::mt19937_64 pick(1);
  std::uniform_real_distribution<double> unit(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const auto d = SpectralDistribution::gamma(vec({unit(pick)}), vec({unit(pick)}));
    EXPECT_TRUE(parse_distribution(to_spec_string(d)) == d);
  }
}

TEST(Format, ErrorsNameTheField) {
  auto message = [](const std::string& s) {
    try {
      (void)parse_distribution(s);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("gaussian:mu=0").find("sigma"), std::string::npos);
  EXPECT_NE(message("exp:lambda=x").find("lambda"), std::string::npos);
  EXPECT_NE(message("weibull:k=1").find("weibull"), std::string::npos);
  EXPECT_NE(message("uniform:a=0;b=1;c=2").find("'c'"), std::string::npos);
  EXPECT_NE(message("gaussian:sigma=1,2,3").find("sigma"), std::string::npos);
}

TEST(Format, ShapeFunctionRoundTrip) {
  const auto d = parse_distribution("gaussian:mu=0,0;sigma=1,0,0,1");
  EXPECT_TRUE(parse_shape_function("cgf", d).is_cgf());
  const auto k = parse_shape_function("quadratic:mu=1,2;sigma=1,0,0,1;c0=0.5", d);
  EXPECT_EQ(to_spec_string(k), "quadratic:mu=1,2;sigma=1,0,0,1;c0=0.5");
  EXPECT_DOUBLE_EQ(k(vec({1.0, 1.0})), 1 + 2 + 1 + 0.5);
}

}  // namespace
}  // namespace maxstable
