#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fdsurvey/bands.hpp"
#include "fdsurvey/covariance.hpp"
#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/sampling.hpp"

namespace fdsurvey {

/// (1/I) sum_i (mu_i - mean)(mu_i - mean)' over the rows of an I x D matrix
/// of replicate estimates. Throws ValidationError when I < 2.
CovarianceEstimate empirical_covariance(const Matrix& estimates);

/// (1/D) sum_i (est(t_i, t_i) - ref(t_i, t_i))^2 / ref(t_i, t_i)^2, diagonal
/// only. Throws ValidationError if a reference variance is not positive.
double relative_error(const CovarianceEstimate& estimated, const CovarianceEstimate& reference);

struct CampaignConfig {
  EstimatorConfig estimator;
  std::size_t replicates = 1000;
  bool compute_coverage = false;
  double alpha = 0.05;
  std::size_t n_sims = kDefaultSimulations;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
};

struct ErQuantiles {
  double q5 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

struct MonteCarloReport {
  std::size_t sample_size = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  EstimatorKind estimator = EstimatorKind::kModelAssisted;

  CovarianceEstimate gamma_emp;             // from replicate estimates, 1/I normalization
  std::vector<double> gamma_bar_diagonal;   // mean estimated variance per grid point
  std::optional<CovarianceEstimate> first_estimate;  // gamma_hat of the first usable replicate
  std::vector<double> mean_estimate;        // average of the replicate mean curves

  std::vector<double> relative_errors;      // E_r per included replicate, replicate order
  double rmse = 0.0;                        // mean of E_r
  double rb_squared = 0.0;                  // squared relative bias of gamma_bar
  double vr = 0.0;                          // relative variance term, computed separately
  ErQuantiles er_quantiles;
  std::vector<std::size_t> excluded_replicates;  // E_r undefined (zero reference variance)
  std::vector<std::size_t> failed_replicates;    // estimator raised a numerical error

  double integrated_mse = 0.0;  // mean over replicates of (1/D) sum_t (mu_hat - mu)^2

  std::optional<double> coverage;                 // simultaneous band coverage frequency
  std::vector<std::size_t> degenerate_replicates; // band refused: degenerate variance
};

/// Draws `replicates` samples, replicate i from stream (master_seed, i), and
/// evaluates the estimator, its covariance estimator and (optionally) the
/// simultaneous band for each. Results do not depend on `workers`.
///
/// E_r uses gamma_emp as reference. Where gamma_emp(t, t) = 0 a replicate
/// whose estimated variance is also 0 contributes 0 at that point; any other
/// value makes E_r undefined and the replicate is listed in
/// excluded_replicates. RB^2 and VR are computed from the included replicates
/// with the same convention, so RMSE = RB^2 + VR up to roundoff.
MonteCarloReport run_campaign(const FunctionalPopulation& pop, const SamplingDesign& design,
                              const CampaignConfig& cfg);

/// Linear-interpolation (type 7) quantile of an unsorted sample.
double empirical_quantile(std::vector<double> values, double q);

}  // namespace fdsurvey
