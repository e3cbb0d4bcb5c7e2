#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fdsurvey/error.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/population_csv.hpp"
#include "fdsurvey/synthetic.hpp"

using namespace fdsurvey;

TEST(TimeGrid, RejectsBadPoints) {
  EXPECT_THROW(TimeGrid({0.0}), ValidationError);
  EXPECT_THROW(TimeGrid({0.0, 1.0, 1.0}), ValidationError);
  EXPECT_THROW(TimeGrid({0.0, 2.0, 1.0}), ValidationError);
  EXPECT_THROW(TimeGrid({0.0, NAN}), ValidationError);
  EXPECT_NO_THROW(TimeGrid({0.0, 0.1, 0.7, 2.0}));
}

TEST(TimeGrid, UniformSpansHorizon) {
  const auto g = TimeGrid::uniform(5, 2.0);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 2.0);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(Interpolate, MidpointOfSegment) {
  const TimeGrid g({0.0, 1.0});
  const std::vector<double> y{1.0, 3.0};
  EXPECT_DOUBLE_EQ(interpolate(y, g, 0.5), 2.0);
  EXPECT_EQ(interpolate(y, g, 1.0), 3.0);
}

TEST(Interpolate, HandEvaluatedSegment) {
  const TimeGrid g({0.0, 1.0, 2.0});
  const std::vector<double> y{0.0, 4.0, 2.0};
  EXPECT_DOUBLE_EQ(interpolate(y, g, 1.5), 3.0);
}

TEST(Interpolate, OutsideSpanIsDomainError) {
  const TimeGrid g({0.0, 1.0});
  const std::vector<double> y{1.0, 3.0};
  EXPECT_THROW(interpolate(y, g, -0.01), DomainError);
  EXPECT_THROW(interpolate(y, g, 1.01), DomainError);
}

TEST(Interpolate, ExactAtGridAndLinearBetween) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts{0.0};
  for (int i = 0; i < 20; ++i) pts.push_back(pts.back() + 0.05 + u(gen));
  const TimeGrid g(pts);
  std::vector<double> y(pts.size());
  for (auto& v : y) v = 10.0 * u(gen) - 5.0;
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(interpolate(y, g, pts[i]), y[i]);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t i = gen() % (pts.size() - 1);
    const double lam = u(gen);
    const double t = (1.0 - lam) * pts[i] + lam * pts[i + 1];
    EXPECT_NEAR(interpolate(y, g, t), (1.0 - lam) * y[i] + lam * y[i + 1], 1e-12);
  }
}

TEST(FunctionalPopulation, ValidatesShapes) {
  const auto g = TimeGrid::uniform(3, 1.0);
  EXPECT_THROW(FunctionalPopulation(g, Matrix(2, 4), Matrix(2, 1)), ValidationError);
  EXPECT_THROW(FunctionalPopulation(g, Matrix(2, 3), Matrix(3, 1)), ValidationError);
  EXPECT_THROW(FunctionalPopulation(g, Matrix(2, 3), Matrix(2, 0)), ValidationError);
  Matrix bad(2, 3);
  bad(1, 1) = INFINITY;
  EXPECT_THROW(FunctionalPopulation(g, bad, Matrix(2, 1, 1.0)), ValidationError);
}

TEST(FunctionalPopulation, MeanAndTotals) {
  const FunctionalPopulation pop(TimeGrid::uniform(2, 1.0), Matrix{{1, 2}, {3, 6}},
                                 Matrix{{1, 4}, {1, 5}});
  EXPECT_EQ(population_mean(pop), (std::vector<double>{2.0, 4.0}));
  EXPECT_EQ(pop.aux_totals(), (std::vector<double>{2.0, 9.0}));
  EXPECT_EQ(pop.aux_names()[0], "x1");
}

TEST(Kernels, MatricesAreSymmetricPsd) {
  const auto g = TimeGrid::uniform(30, 1.0);
  for (const ResidualKernel& k : {ResidualKernel(WhiteNoiseKernel{2.0}), ResidualKernel(ExponentialKernel{1.5, 0.2}),
                                  ResidualKernel(PeriodicExponentialKernel{1.0, 0.3, 0.25, 0.8, 0.6})}) {
    const SymmetricMatrix m(kernel_matrix(k, g));
    EXPECT_GE(sym_eigen(m).values.back(), -1e-10);
  }
  EXPECT_DOUBLE_EQ(kernel_value(ExponentialKernel{2.0, 0.5}, 0.0, 0.5), 2.0 * std::exp(-1.0));
  EXPECT_THROW(kernel_matrix(ExponentialKernel{1.0, 0.0}, g), ConfigError);
  EXPECT_THROW(kernel_matrix(WhiteNoiseKernel{-1.0}, g), ConfigError);
  EXPECT_THROW(kernel_matrix(PeriodicExponentialKernel{1.0, 0.3, 0.25, 0.8, 1.5}, g), ConfigError);
}

TEST(GeneratePopulation, NoiselessFollowsLinearModel) {
  const auto g = TimeGrid::uniform(6, 1.0);
  auto cfg = desk_scale_config(g, 0.9, 5);
  cfg.kernel = WhiteNoiseKernel{0.0};
  const auto pop = generate_population(cfg, 50, g);
  for (std::size_t k = 0; k < pop.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double fit = pop.aux()(k, 0) * cfg.beta_curves(0, i) + pop.aux()(k, 1) * cfg.beta_curves(1, i);
      EXPECT_NEAR(pop.values()(k, i), fit, 1e-12);
    }
}

TEST(GeneratePopulation, DeterministicGivenSeed) {
  const auto g = TimeGrid::uniform(8, 1.0);
  const auto cfg = desk_scale_config(g, 0.9, 42);
  const auto a = generate_population(cfg, 30, g);
  const auto b = generate_population(cfg, 30, g);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_EQ(a.aux(), b.aux());
  auto other = cfg;
  other.seed = 43;
  EXPECT_NE(generate_population(other, 30, g).values(), a.values());
}

TEST(GeneratePopulation, PrefixIsStableInN) {
  // Unit k depends only on (seed, k), so growing N keeps earlier units.
  const auto g = TimeGrid::uniform(5, 1.0);
  const auto cfg = desk_scale_config(g, 0.9, 9);
  const auto small = generate_population(cfg, 10, g);
  const auto big = generate_population(cfg, 25, g);
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small.values()(k, i), big.values()(k, i));
}

namespace {

// Sample covariance of residual curves around the known linear model.
Matrix residual_covariance(const FunctionalPopulation& pop, const Matrix& beta) {
  const std::size_t d = pop.grid_size();
  Matrix cov(d, d);
  for (std::size_t k = 0; k < pop.size(); ++k) {
    std::vector<double> e(d);
    for (std::size_t i = 0; i < d; ++i) {
      e[i] = pop.values()(k, i);
      for (std::size_t j = 0; j < pop.aux_dim(); ++j) e[i] -= pop.aux()(k, j) * beta(j, i);
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t l = 0; l < d; ++l) cov(i, l) += e[i] * e[l];
  }
  cov *= 1.0 / static_cast<double>(pop.size());
  return cov;
}

}  // namespace

TEST(GeneratePopulation, ResidualCovarianceMatchesKernel) {
  const auto g = TimeGrid::uniform(5, 1.0);
  auto cfg = desk_scale_config(g, 0.9, 77);
  cfg.kernel = ExponentialKernel{2.0, 0.3};
  const auto pop = generate_population(cfg, 20000, g);
  const Matrix emp = residual_covariance(pop, cfg.beta_curves);
  const Matrix k = kernel_matrix(cfg.kernel, g);
  // 20000 draws: relative sd of a variance estimate is about 1%.
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t l = 0; l < 5; ++l) EXPECT_NEAR(emp(i, l), k(i, l), 0.06 * 2.0);
}

TEST(GeneratePopulation, DispersionKeepsAverageVariance) {
  const auto g = TimeGrid::uniform(4, 1.0);
  auto cfg = desk_scale_config(g, 0.9, 78);
  cfg.kernel = WhiteNoiseKernel{1.0};
  cfg.unit_scale_dispersion = 0.4;
  const auto pop = generate_population(cfg, 40000, g);
  const Matrix emp = residual_covariance(pop, cfg.beta_curves);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(emp(i, i), 1.0, 0.08);
}

TEST(GeneratePopulation, DeskConfigHitsTargetCorrelation) {
  const auto g = TimeGrid::uniform(24, 1.0);
  const auto cfg = desk_scale_config(g, 0.95, 3);
  const auto pop = generate_population(cfg, 4000, g);
  double lo = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) lo = std::min(lo, aux_response_correlation(pop, i, 1));
  EXPECT_NEAR(lo, 0.95, 0.01);
}

TEST(PopulationCsv, RoundTrip) {
  const auto g = TimeGrid({0.0, 0.25, 1.0});
  const FunctionalPopulation pop(g, Matrix{{1.5, -2.0, 0.1}, {3.0, 1e-17, 7.25}},
                                 Matrix{{1.0, 0.3}, {1.0, 123456.789}}, {"one", "z"});
  std::stringstream ss;
  write_population_csv(ss, pop);
  const auto back = population_from_table(read_csv_table(ss));
  EXPECT_EQ(back.grid(), g);
  EXPECT_EQ(back.values(), pop.values());
  EXPECT_EQ(back.aux(), pop.aux());
  EXPECT_EQ(back.aux_names(), pop.aux_names());
}

TEST(PopulationCsv, ErrorsCiteLineNumbers) {
  std::stringstream ss("t=0,t=1,x\n1,2,3\n\n4,5\n");
  try {
    read_csv_table(ss, "pop.csv");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("pop.csv:4"), std::string::npos) << e.what();
  }
  std::stringstream bad("t=0,t=1,x\n1,2,3\n4,oops,6\n");
  try {
    population_from_table(read_csv_table(bad, "pop.csv"));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(PopulationCsv, LabelColumnsAreSkipped) {
  std::stringstream ss("\xEF\xBB\xBFid,t=0,t=2,x,stratum\n7,1,2,1,north\n8,3,4,1,south\n");
  const auto pop = population_from_table(read_csv_table(ss), {"id", "stratum"});
  EXPECT_EQ(pop.aux_dim(), 1u);
  EXPECT_EQ(pop.grid().back(), 2.0);
  EXPECT_EQ(pop.values()(1, 0), 3.0);
}

TEST(PopulationCsv, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, double(int(gen() % 40) - 20));
    EXPECT_EQ(parse_double(format_double(v), "test"), v);
  }
  EXPECT_THROW(parse_double("1.0x", "test"), ValidationError);
  EXPECT_THROW(parse_double("inf", "test"), ValidationError);
}
