#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fdsurvey/covariance.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/linalg.hpp"

namespace fdsurvey {

inline constexpr std::size_t kDefaultSimulations = 10000;
inline constexpr std::size_t kMinSimulations = 100;
/// Simulations are generated in fixed batches, batch b from stream
/// (seed, b), so the simulated sample does not depend on the worker count.
inline constexpr std::size_t kSimulationBatch = 1024;

/// Draws `n_sims` centered Gaussian vectors with covariance PSD-projected
/// `cov` and returns the sorted statistics max_i |Z(t_i)| / sd(t_i), where sd
/// is the square root of the projected diagonal. Throws
/// DegenerateVarianceError when a projected variance is not positive.
std::vector<double> simulate_sup_statistics(const SymmetricMatrix& cov, std::size_t n_sims,
                                            std::uint64_t seed, std::size_t workers = 1);

/// Order statistic at 1-based rank ceil((1 - alpha) * m) of a sorted sample.
double sup_quantile(std::span<const double> sorted_sups, double alpha);

/// c_alpha for a (n-scaled) covariance; a pure function of its arguments.
double simulate_sup_quantile(const SymmetricMatrix& cov, double alpha, std::size_t n_sims,
                             std::uint64_t seed, std::size_t workers = 1);

/// Closed band center +/- c_alpha * sigma_hat / sqrt(n) on the grid.
struct ConfidenceBand {
  std::vector<double> center;
  std::vector<double> half_width;
  std::vector<double> sigma_hat;  // sqrt(n * gamma_hat(t, t))
  double c_alpha = 0.0;
  double alpha = 0.0;
  std::size_t n_sims = 0;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;

  double lower(std::size_t i) const { return center[i] - half_width[i]; }
  double upper(std::size_t i) const { return center[i] + half_width[i]; }
};

/// Builds the simultaneous band from an estimate and its unscaled covariance
/// estimate: sigma_hat(t) = sqrt(n gamma_hat(t, t)), c_alpha simulated from
/// n * gamma_hat. Throws DegenerateVarianceError (with the grid index) when
/// some gamma_hat(t, t) <= 0.
ConfidenceBand build_band(const MeanEstimate& estimate, const CovarianceEstimate& cov,
                          std::size_t sample_size, double alpha, std::size_t n_sims,
                          std::uint64_t seed, std::size_t workers = 1);

/// As build_band, reusing an already simulated sorted sup sample (so several
/// alphas share the same draws).
ConfidenceBand band_from_sups(std::span<const double> center, const CovarianceEstimate& cov,
                              std::size_t sample_size, double alpha,
                              std::span<const double> sorted_sups, std::uint64_t seed);

/// True iff |truth_i - center_i| <= half_width_i at every grid point.
bool contains(const ConfidenceBand& band, std::span<const double> truth);

}  // namespace fdsurvey
