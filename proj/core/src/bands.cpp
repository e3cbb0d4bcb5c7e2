#include "fdsurvey/bands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsurvey/error.hpp"
#include "fdsurvey/parallel.hpp"
#include "fdsurvey/rng.hpp"

namespace fdsurvey {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0, 1), got " << alpha;
    throw ValidationError(os.str());
  }
}

std::vector<double> positive_diagonal(const SymmetricMatrix& cov) {
  auto diag = cov.diagonal();
  double max_diag = 0.0;
  for (double v : diag) max_diag = std::max(max_diag, v);
  const double threshold = kPsdTolerance * max_diag;
  for (std::size_t i = 0; i < diag.size(); ++i)
    if (!(diag[i] > threshold) || !(diag[i] > 0.0)) throw DegenerateVarianceError(i, diag[i]);
  return diag;
}

// Factor of psd_project(cov). When cov is positive definite the projection
// is the identity and the plain Cholesky factor is used directly.
Matrix projected_factor(const SymmetricMatrix& cov) {
  try {
    return cholesky_psd(cov);
  } catch (const NumericalError&) {
    return cholesky_psd(psd_project(cov));
  }
}

}  // namespace

std::vector<double> simulate_sup_statistics(const SymmetricMatrix& cov, std::size_t n_sims,
                                            std::uint64_t seed, std::size_t workers) {
  if (n_sims < kMinSimulations) {
    std::ostringstream os;
    os << "at least " << kMinSimulations << " simulations are required, got " << n_sims;
    throw ValidationError(os.str());
  }
  const std::size_t d = cov.dim();
  if (d == 0) throw ValidationError("empty covariance matrix");

  const Matrix factor = projected_factor(cov);
  // Projected variances are the squared row norms of the factor.
  std::vector<double> diag(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (double f : factor.row(i)) diag[i] += f * f;
  double max_diag = 0.0;
  for (double v : diag) max_diag = std::max(max_diag, v);
  std::vector<double> inv_sd(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(diag[i] > kPsdTolerance * max_diag) || !(diag[i] > 0.0)) throw DegenerateVarianceError(i, diag[i]);
    inv_sd[i] = 1.0 / std::sqrt(diag[i]);
  }

  // Zero entries in the factor (upper triangle of a Cholesky factor) are skipped
  // via the row bound when the factor is triangular.
  bool lower = true;
  for (std::size_t i = 0; i < d && lower; ++i)
    for (std::size_t j = i + 1; j < d && lower; ++j) lower = factor(i, j) == 0.0;

  std::vector<double> sups(n_sims);
  const std::size_t batches = (n_sims + kSimulationBatch - 1) / kSimulationBatch;
  parallel_for(batches, workers, [&](std::size_t b) {
    RngStream rng(seed, StreamPurpose::kBandSimulation, b);
    std::vector<double> z(d);
    const std::size_t begin = b * kSimulationBatch;
    const std::size_t end = std::min(n_sims, begin + kSimulationBatch);
    for (std::size_t s = begin; s < end; ++s) {
      for (double& zi : z) zi = rng.normal();
      double sup = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        auto fi = factor.row(i);
        const std::size_t width = lower ? i + 1 : d;
        double v = 0.0;
        for (std::size_t j = 0; j < width; ++j) v += fi[j] * z[j];
        sup = std::max(sup, std::abs(v) * inv_sd[i]);
      }
      sups[s] = sup;
    }
  });
  std::sort(sups.begin(), sups.end());
  return sups;
}

double sup_quantile(std::span<const double> sorted_sups, double alpha) {
  check_alpha(alpha);
  if (sorted_sups.empty()) throw ValidationError("empty sup sample");
  const double m = static_cast<double>(sorted_sups.size());
  // Guard against (1 - alpha) * m landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted_sups.size());
  return sorted_sups[rank - 1];
}

double simulate_sup_quantile(const SymmetricMatrix& cov, double alpha, std::size_t n_sims,
                             std::uint64_t seed, std::size_t workers) {
  check_alpha(alpha);
  const auto sups = simulate_sup_statistics(cov, n_sims, seed, workers);
  return sup_quantile(sups, alpha);
}

ConfidenceBand band_from_sups(std::span<const double> center, const CovarianceEstimate& cov,
                              std::size_t sample_size, double alpha,
                              std::span<const double> sorted_sups, std::uint64_t seed) {
  check_alpha(alpha);
  if (sample_size == 0) throw ValidationError("sample size must be positive");
  if (center.size() != cov.matrix.dim()) throw ValidationError("estimate and covariance differ in grid size");
  const auto diag = positive_diagonal(cov.matrix);
  const double n = static_cast<double>(sample_size);

  ConfidenceBand band;
  band.center.assign(center.begin(), center.end());
  band.c_alpha = sup_quantile(sorted_sups, alpha);
  band.alpha = alpha;
  band.n_sims = sorted_sups.size();
  band.sample_size = sample_size;
  band.seed = seed;
  band.sigma_hat.resize(diag.size());
  band.half_width.resize(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    band.sigma_hat[i] = std::sqrt(n * diag[i]);
    band.half_width[i] = band.c_alpha * band.sigma_hat[i] / std::sqrt(n);
  }
  return band;
}

ConfidenceBand build_band(const MeanEstimate& estimate, const CovarianceEstimate& cov,
                          std::size_t sample_size, double alpha, std::size_t n_sims,
                          std::uint64_t seed, std::size_t workers) {
  check_alpha(alpha);
  positive_diagonal(cov.matrix);
  const auto scaled = cov.matrix.scaled(static_cast<double>(sample_size));
  const auto sups = simulate_sup_statistics(scaled, n_sims, seed, workers);
  return band_from_sups(estimate.curve, cov, sample_size, alpha, sups, seed);
}

bool contains(const ConfidenceBand& band, std::span<const double> truth) {
  if (truth.size() != band.center.size()) throw ValidationError("truth curve length does not match the band");
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (std::abs(truth[i] - band.center[i]) > band.half_width[i]) return false;
  return true;
}

}  // namespace fdsurvey
