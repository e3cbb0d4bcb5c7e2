#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fdsurvey/error.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/synthetic.hpp"
#include "support/oracles.hpp"

using namespace fdsurvey;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<std::size_t> all_units(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

FunctionalPopulation noiseless_population(std::size_t big_n, std::uint64_t seed, Matrix* beta = nullptr) {
  const auto g = TimeGrid::uniform(7, 1.0);
  auto cfg = desk_scale_config(g, 0.9, seed);
  cfg.kernel = WhiteNoiseKernel{0.0};
  if (beta) *beta = cfg.beta_curves;
  return generate_population(cfg, big_n, g);
}

}  // namespace

TEST(HtMean, CensusIsPopulationMean) {
  const auto pop = oracle::random_population(9, 2, 4, 1);
  const Sample census(SamplingDesign::srswor(9, 9), all_units(9));
  EXPECT_LT(max_diff(ht_mean(pop, census).curve, population_mean(pop)), 1e-12);
  EXPECT_LT(max_diff(hajek_mean(pop, census).curve, population_mean(pop)), 1e-12);
  EXPECT_LT(max_diff(model_assisted_mean(pop, census, std::nullopt).curve, population_mean(pop)), 1e-12);
  EXPECT_LT(max_diff(difference_mean(pop, census).curve, population_mean(pop)), 1e-12);
}

TEST(HtMean, UnbiasedOverEnumeration) {
  const auto pop = oracle::random_population(4, 2, 3, 2);
  const auto design = SamplingDesign::srswor(4, 2);
  const auto subsets = oracle::all_subsets(4, 2);
  const auto m = oracle::uniform_moments(subsets, [&](const auto& s) { return ht_mean(pop, Sample(design, s)).curve; });
  EXPECT_LT(max_diff(m.mean, population_mean(pop)), 1e-12);
}

TEST(HtMean, MatchesLiteralFormula) {
  const auto pop = oracle::random_population(12, 2, 5, 3);
  const auto design = SamplingDesign::stratified({0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1}, {2, 3});
  const auto s = oracle::draw(design, 4);
  std::vector<double> expect(5, 0.0);
  for (std::size_t k : s.indices()) {
    const double pi = k < 4 ? 0.5 : 3.0 / 8.0;
    for (std::size_t i = 0; i < 5; ++i) expect[i] += pop.values()(k, i) / pi / 12.0;
  }
  EXPECT_LT(max_diff(ht_mean(pop, s).curve, expect), 1e-12);
}

TEST(HtMean, MismatchedPopulationIsRejected) {
  const auto pop = oracle::random_population(6, 2, 3, 2);
  const Sample s(SamplingDesign::srswor(7, 2), {0, 1});
  EXPECT_THROW(ht_mean(pop, s), ValidationError);
}

TEST(Estimators, AreLinearInCurves) {
  const auto pop = oracle::random_population(15, 2, 4, 5);
  const auto other = oracle::random_population(15, 2, 4, 6);
  const double alpha = -1.7;
  Matrix combo = pop.values() * alpha + other.values();
  const auto mixed = pop.with_values(combo);
  const auto z = pop.with_values(other.values());
  const auto s = oracle::draw(SamplingDesign::srswor(15, 6), 7);
  const std::vector<EstimatorKind> kinds{EstimatorKind::kHorvitzThompson, EstimatorKind::kHajek,
                                         EstimatorKind::kModelAssisted, EstimatorKind::kDifference};
  for (auto kind : kinds) {
    const EstimatorConfig cfg{kind, 0.0};
    const auto a = estimate_mean(pop, s, cfg).curve;
    const auto b = estimate_mean(z, s, cfg).curve;
    const auto c = estimate_mean(mixed, s, cfg).curve;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(c[i], alpha * a[i] + b[i], 1e-12 * 50) << to_string(kind);
  }
}

TEST(HajekMean, ConstantCurvesGiveTheConstant) {
  const auto pop = oracle::random_population(10, 2, 3, 8);
  const auto flat = pop.with_values(Matrix(10, 3, 4.25));
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::draw(SamplingDesign::srswor(10, 4), 9, rep);
    for (double v : hajek_mean(flat, s).curve) EXPECT_NEAR(v, 4.25, 1e-14);
  }
}

TEST(HajekMean, EqualsInterceptOnlyModelAssisted) {
  const auto base = oracle::random_population(20, 1, 5, 10);
  const auto design = SamplingDesign::stratified(std::vector<std::size_t>(20, 0), {7});
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = oracle::draw(design, 11, rep);
    EXPECT_LT(max_diff(hajek_mean(base, s).curve, model_assisted_mean(base, s, 0.0).curve), 1e-10);
  }
}

TEST(BetaPopulation, RecoversNoiselessCoefficients) {
  Matrix beta;
  const auto pop = noiseless_population(40, 12, &beta);
  const auto fit = beta_population(pop);
  EXPECT_LT(max_abs_diff(fit.coefficients, beta), 1e-8);
}

TEST(BetaPopulation, InterceptOnlyGivesMean) {
  const auto pop = oracle::random_population(8, 1, 4, 13);
  const auto fit = beta_population(pop);
  const auto mu = population_mean(pop);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(fit.coefficients(0, i), mu[i], 1e-12);
}

TEST(BetaPopulation, MatchesNaiveSolver) {
  const auto pop = oracle::random_population(6, 2, 6, 14);
  const auto expect = oracle::weighted_least_squares(oracle::rows_of(pop.aux()), oracle::rows_of(pop.values()),
                                                     std::vector<double>(6, 1.0));
  EXPECT_LT(max_abs_diff(beta_population(pop).coefficients, oracle::matrix_of(expect)), 1e-10);
}

TEST(BetaPopulation, SingularGramIsReported) {
  Matrix aux(5, 2, 1.0);  // two identical columns
  const FunctionalPopulation pop(TimeGrid::uniform(2, 1.0), Matrix(5, 2, 1.0), aux);
  EXPECT_THROW(beta_population(pop), SingularMatrixError);
}

TEST(BetaSampled, CensusEqualsPopulationFit) {
  const auto pop = oracle::random_population(10, 3, 4, 15);
  const Sample census(SamplingDesign::srswor(10, 10), all_units(10));
  const auto sampled = beta_sampled(pop, census, 1e-12);
  EXPECT_FALSE(sampled.floor_applied);
  EXPECT_LT(max_abs_diff(sampled.coefficients, beta_population(pop).coefficients), 1e-10);
}

TEST(BetaSampled, MatchesWeightedNaiveSolver) {
  const auto pop = oracle::random_population(30, 3, 4, 16);
  const auto s = oracle::draw(SamplingDesign::srswor(30, 9), 17);
  oracle::Table x, y;
  for (std::size_t k : s.indices()) {
    x.emplace_back(pop.aux_row(k).begin(), pop.aux_row(k).end());
    y.emplace_back(pop.curve(k).begin(), pop.curve(k).end());
  }
  const auto expect = oracle::weighted_least_squares(x, y, std::vector<double>(9, 30.0 / 9.0));
  EXPECT_LT(max_abs_diff(beta_sampled(pop, s, 0.0).coefficients, oracle::matrix_of(expect)), 1e-10);
}

TEST(BetaSampled, FloorBelowSpectrumIsPlainInverse) {
  const auto pop = oracle::random_population(30, 2, 4, 18);
  const auto s = oracle::draw(SamplingDesign::srswor(30, 8), 19);
  const auto plain = beta_sampled(pop, s, 0.0);
  const double below = 0.5 * sym_eigen(plain.gram).values.back();
  const auto floored = beta_sampled(pop, s, below);
  EXPECT_FALSE(floored.floor_applied);
  EXPECT_LT(max_abs_diff(floored.coefficients, plain.coefficients), 1e-12);
}

TEST(BetaSampled, FloorAboveEigenvalueBoundsInverse) {
  const auto pop = oracle::random_population(30, 2, 4, 20);
  const auto s = oracle::draw(SamplingDesign::srswor(30, 8), 21);
  const auto plain = beta_sampled(pop, s, 0.0);
  const double a = 2.0 * sym_eigen(plain.gram).values.back();
  const auto floored = beta_sampled(pop, s, a);
  EXPECT_TRUE(floored.floor_applied);
  EXPECT_LE(spectral_norm(regularized_inverse(floored.gram, a).inverse), 1.0 / a + 1e-10);
}

TEST(BetaSampled, SingularWithoutFloorIsRejected) {
  // Both sampled units share the same x, so G-hat has rank one.
  Matrix aux{{1, 2}, {1, 2}, {1, 3}, {1, 4}};
  const FunctionalPopulation pop(TimeGrid::uniform(2, 1.0), Matrix(4, 2, 1.0), aux);
  const Sample s(SamplingDesign::srswor(4, 2), {0, 1});
  EXPECT_THROW(beta_sampled(pop, s, 0.0), SingularMatrixError);
  EXPECT_NO_THROW(beta_sampled(pop, s, std::nullopt));
}

TEST(ModelAssisted, NoiselessPopulationIsExact) {
  const auto pop = noiseless_population(60, 22);
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::draw(SamplingDesign::srswor(60, 5), 23, rep);
    EXPECT_LT(max_diff(model_assisted_mean(pop, s, 0.0).curve, population_mean(pop)), 1e-8);
    EXPECT_LT(max_diff(difference_mean(pop, s).curve, population_mean(pop)), 1e-8);
  }
}

TEST(ModelAssisted, UsesOnlySampleDataAndTotals) {
  const auto pop = oracle::random_population(25, 2, 3, 24);
  const auto s = oracle::draw(SamplingDesign::srswor(25, 6), 25);
  auto data = extract_sample_data(pop, s);
  const auto totals = pop.aux_totals();
  const auto a = model_assisted_mean(totals, data, 0.0).curve;
  // Scrambling non-sampled units changes nothing.
  Matrix values = pop.values();
  for (std::size_t k = 0; k < 25; ++k)
    if (!s.contains(k))
      for (std::size_t i = 0; i < 3; ++i) values(k, i) = 1e6;
  EXPECT_EQ(model_assisted_mean(pop.with_values(values), s, 0.0).curve, a);
}

TEST(ModelAssisted, EqualsDifferencePlusBiasTermOverEnumeration) {
  // E[MA] = E[difference] + E[(1/N) sum_U x'(b_a - b~) - (1/N) sum_s x'(b_a - b~)/pi]
  // and E[difference] = mu exactly.
  const auto pop = oracle::random_population(4, 2, 3, 26);
  const auto design = SamplingDesign::srswor(4, 2);
  const auto subsets = oracle::all_subsets(4, 2);
  const auto beta = oracle::rows_of(beta_population(pop).coefficients);
  const auto totals = pop.aux_totals();
  const auto ma = oracle::uniform_moments(subsets, [&](const auto& idx) {
    return model_assisted_mean(pop, Sample(design, idx), 0.0).curve;
  });
  const auto diff = oracle::uniform_moments(subsets, [&](const auto& idx) {
    return difference_mean(pop, Sample(design, idx)).curve;
  });
  const auto bias = oracle::uniform_moments(subsets, [&](const auto& idx) {
    const Sample s(design, idx);
    const auto b = oracle::rows_of(beta_sampled(pop, s, 0.0).coefficients);
    std::vector<double> out(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) out[i] += totals[j] * (b[j][i] - beta[j][i]) / 4.0;
      for (std::size_t k : idx)
        for (std::size_t j = 0; j < 2; ++j) out[i] -= pop.aux()(k, j) * (b[j][i] - beta[j][i]) / 0.5 / 4.0;
    }
    return out;
  });
  EXPECT_LT(max_diff(diff.mean, population_mean(pop)), 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ma.mean[i], diff.mean[i] + bias.mean[i], 1e-12);
}

TEST(ModelAssisted, InterceptResidualsCancel) {
  const auto pop = oracle::random_population(40, 3, 5, 27);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = oracle::draw(SamplingDesign::srswor(40, 10), 28, rep);
    const auto data = extract_sample_data(pop, s);
    const auto beta = beta_sampled(data, 0.0);
    const auto e = sample_residuals(data, beta);
    const auto pi = s.inclusion_probabilities();
    for (std::size_t i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (std::size_t r = 0; r < s.size(); ++r) sum += e(r, i) / pi[r];
      EXPECT_NEAR(sum, 0.0, 1e-8);
    }
    // With cancellation the estimator is the mean of predictions.
    const auto ma = model_assisted_mean(pop, s, 0.0).curve;
    for (std::size_t i = 0; i < 5; ++i) {
      double pred = 0.0;
      for (std::size_t j = 0; j < 3; ++j) pred += pop.aux_totals()[j] * beta.coefficients(j, i) / 40.0;
      EXPECT_NEAR(ma[i], pred, 1e-10);
    }
  }
}

TEST(DifferenceMean, UnbiasedOverEnumeration) {
  const auto pop = oracle::random_population(5, 2, 4, 29);
  const auto design = SamplingDesign::srswor(5, 2);
  const auto m = oracle::uniform_moments(oracle::all_subsets(5, 2), [&](const auto& s) {
    return difference_mean(pop, Sample(design, s)).curve;
  });
  EXPECT_LT(max_diff(m.mean, population_mean(pop)), 1e-12);
}

TEST(Calibration, WeightsReproduceTotals) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pop = oracle::random_population(20, 2, 3, 100 + seed);
    const auto s = oracle::draw(SamplingDesign::srswor(20, 6), 30, seed);
    const auto data = extract_sample_data(pop, s);
    const auto totals = pop.aux_totals();
    const auto w = calibration_weights(totals, data);
    for (std::size_t j = 0; j < 2; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < s.size(); ++r) sum += w.weights[r] * data.aux(r, j);
      EXPECT_NEAR(sum, totals[j], 1e-8 * std::abs(totals[j]));
    }
    EXPECT_LT(max_diff(calibrated_mean(w, data), model_assisted_mean(totals, data, 0.0).curve), 1e-8);
  }
}

TEST(Calibration, AlreadyCalibratedSampleKeepsDesignWeights) {
  // x = (1, z) with z symmetric around the population mean in the sample.
  Matrix aux{{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}};
  const FunctionalPopulation pop(TimeGrid::uniform(2, 1.0), Matrix(5, 2, 1.0), aux);
  const Sample s(SamplingDesign::srswor(5, 2), {1, 3});  // HT total of z = 2.5 * 6 = 15 = sum_U z
  const auto w = calibration_weights(pop.aux_totals(), extract_sample_data(pop, s));
  for (double v : w.weights) EXPECT_NEAR(v, 2.5, 1e-12);
}
