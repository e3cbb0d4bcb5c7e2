#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/sampling.hpp"

namespace fdsurvey {

enum class EstimatorKind { kHorvitzThompson, kHajek, kModelAssisted, kDifference };

std::string_view to_string(EstimatorKind kind);

struct MeanEstimate {
  std::vector<double> curve;  // on the population grid
  EstimatorKind kind;
  Sample sample;
  std::optional<double> floor;  // eigenvalue floor actually used (model-assisted only)
};

/// What a survey actually observes: x_k and Y_k for k in s, plus N. Rows
/// follow the sample's index order.
struct SampleData {
  Sample sample;
  Matrix aux;     // n x p
  Matrix values;  // n x D
  std::size_t population_size = 0;
};

SampleData extract_sample_data(const FunctionalPopulation& pop, const Sample& sample);

/// (1/N) sum_{k in s} Y_k(t) / pi_k.
MeanEstimate ht_mean(const FunctionalPopulation& pop, const Sample& sample);

/// sum_s Y_k(t)/pi_k / sum_s 1/pi_k.
MeanEstimate hajek_mean(const FunctionalPopulation& pop, const Sample& sample);

enum class BetaKind { kPopulation, kSampled };

struct BetaEstimate {
  Matrix coefficients;    // p x D; column i is beta(t_i)
  SymmetricMatrix gram;   // G (population) or G-hat (sampled), before flooring
  BetaKind kind = BetaKind::kPopulation;
  double floor = 0.0;     // 0 means no floor
  bool floor_applied = false;
  double min_eigenvalue = 0.0;
};

/// Relative singularity threshold: a Gram matrix whose smallest eigenvalue
/// is <= kSingularityThreshold * trace / p is refused when no floor is set.
inline constexpr double kSingularityThreshold = 1e-12;

/// Floor used when the caller does not choose one: 1e-8 * trace(G-hat) / p.
double default_floor(const SymmetricMatrix& gram);

/// Ordinary least squares at each grid point over the whole population,
/// G^{-1} (1/N) sum_U x_k Y_k(t). Throws SingularMatrixError if G is singular.
BetaEstimate beta_population(const FunctionalPopulation& pop);

/// G-hat_a^{-1} (1/N) sum_s x_k Y_k(t) / pi_k with G-hat = (1/N) sum_s x_k x_k' / pi_k.
/// `floor` = 0 uses the plain inverse and throws SingularMatrixError on a
/// singular G-hat; `floor` > 0 floors the spectrum of G-hat at that value;
/// std::nullopt applies default_floor. Coefficients at grid points give the
/// interpolated-data coefficients everywhere by linear interpolation, since
/// G-hat_a does not depend on t.
BetaEstimate beta_sampled(const SampleData& data, std::optional<double> floor);
BetaEstimate beta_sampled(const FunctionalPopulation& pop, const Sample& sample,
                          std::optional<double> floor);

/// Y_k - x_k' beta for each sampled unit (n x D).
Matrix sample_residuals(const SampleData& data, const BetaEstimate& beta);

/// Model-assisted (GREG) mean:
///   (1/N) sum_U x_k' beta_a(t) - (1/N) sum_s (x_k' beta_a(t) - Y_k(t)) / pi_k.
/// Needs only the sample data and the population aux totals sum_U x_k. When
/// the aux vectors contain an intercept and no floor was applied, the HT sum
/// of residuals is checked to vanish (relative 1e-8) and NumericalError is
/// thrown otherwise.
MeanEstimate model_assisted_mean(std::span<const double> aux_totals, const SampleData& data,
                                 std::optional<double> floor);
MeanEstimate model_assisted_mean(const FunctionalPopulation& pop, const Sample& sample,
                                 std::optional<double> floor);

/// Generalized difference estimator built on the population fit beta-tilde.
/// Needs the full population; used as a reference.
MeanEstimate difference_mean(const FunctionalPopulation& pop, const Sample& sample);

/// Estimator choice shared by the command-line workflows and the Monte Carlo
/// harness.
struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kModelAssisted;
  std::optional<double> floor;  // model-assisted only; nullopt = default floor
};

MeanEstimate estimate_mean(const FunctionalPopulation& pop, const Sample& sample,
                           const EstimatorConfig& cfg);

/// Chi-square distance calibration weights w_ks for the sampled units.
struct CalibrationWeights {
  std::vector<std::size_t> units;
  std::vector<double> weights;
};

CalibrationWeights calibration_weights(std::span<const double> aux_totals, const SampleData& data);

/// (1/N) sum_s w_ks Y_k(t).
std::vector<double> calibrated_mean(const CalibrationWeights& weights, const SampleData& data);

}  // namespace fdsurvey
