#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/linalg.hpp"

namespace fdsurvey {

/// Gamma(t, r) = variance * [t == r].
struct WhiteNoiseKernel {
  double variance = 1.0;
};

/// Gamma(t, r) = variance * exp(-|t - r| / length_scale). Paths are
/// continuous but not differentiable.
struct ExponentialKernel {
  double variance = 1.0;
  double length_scale = 1.0;
};

/// Gamma(t, r) = variance * [w * exp(-2 sin^2(pi |t - r| / period) / periodic_length^2)
///                           + (1 - w) * exp(-|t - r| / length_scale)].
/// Models a daily cycle on top of short-range dependence.
struct PeriodicExponentialKernel {
  double variance = 1.0;
  double length_scale = 1.0;
  double period = 1.0;
  double periodic_length = 1.0;
  double periodic_weight = 0.5;
};

using ResidualKernel = std::variant<WhiteNoiseKernel, ExponentialKernel, PeriodicExponentialKernel>;

double kernel_value(const ResidualKernel& kernel, double t, double r);
Matrix kernel_matrix(const ResidualKernel& kernel, const TimeGrid& grid);

/// How auxiliary vectors are generated. With intercept_only the vector is
/// x_k = (1). Otherwise x_k = (1, z_k) where z_k is the mean of a "past
/// period" curve of `past_points` values level_k + e_kj, with
/// level_k ~ N(level_mean, level_sd^2) and e_kj ~ N(0, past_noise_sd^2).
struct AuxDistribution {
  bool intercept_only = false;
  double level_mean = 10.0;
  double level_sd = 3.0;
  double past_noise_sd = 1.0;
  std::size_t past_points = 48;

  std::size_t dim() const noexcept { return intercept_only ? 1 : 2; }
  /// Variance of z_k implied by the parameters.
  double covariate_variance() const noexcept;
};

/// Parameters of the working model Y_k(t) = x_k' beta(t) + eps_k(t).
struct SuperpopulationConfig {
  Matrix beta_curves;  // p x D, row j holds beta_j(t_1..t_D)
  ResidualKernel kernel = ExponentialKernel{};
  AuxDistribution aux;
  /// Log-scale spread of a per-unit residual multiplier s_k = exp(d g_k - d^2),
  /// g_k ~ N(0, 1), so E[s_k^2] = 1. Zero (the default) keeps eps_k exactly
  /// Gaussian with covariance Gamma; positive values give heteroscedastic,
  /// heavy-tailed units with the same average covariance.
  double unit_scale_dispersion = 0.0;
  std::uint64_t seed = 0;
};

/// Draws a finite population from the model. Unit k's aux vector and residual
/// curve come from streams keyed by (seed, k), so the result is a pure
/// function of (cfg, N, grid). Throws ConfigError if the kernel matrix is not
/// positive semidefinite on the grid or if shapes disagree.
FunctionalPopulation generate_population(const SuperpopulationConfig& cfg, std::size_t units,
                                         const TimeGrid& grid);

/// The synthetic regime used by the examples and acceptance runs: an
/// intercept plus one covariate, smooth time-varying coefficients, an
/// exponential residual kernel with length scale 10% of the horizon, and a
/// residual variance chosen so that corr(Y(t), z) equals
/// `target_correlation` where the slope is smallest (and is slightly higher
/// elsewhere).
SuperpopulationConfig desk_scale_config(const TimeGrid& grid, double target_correlation,
                                        std::uint64_t seed);

/// Pearson correlation between column `grid_index` of the curve table and aux
/// column `aux_index` across the whole population.
double aux_response_correlation(const FunctionalPopulation& pop, std::size_t grid_index,
                                std::size_t aux_index);

}  // namespace fdsurvey
