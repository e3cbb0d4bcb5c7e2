#include "fdsurvey/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsurvey/error.hpp"
#include "fdsurvey/parallel.hpp"
#include "fdsurvey/rng.hpp"

namespace fdsurvey {

CovarianceEstimate empirical_covariance(const Matrix& estimates) {
  const std::size_t reps = estimates.rows();
  const std::size_t d = estimates.cols();
  if (reps < 2) throw ValidationError("empirical covariance needs at least two replicates");
  // Deviations are taken from the first replicate before centering, so
  // identical replicates give an exactly zero matrix.
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t i = 0; i < d; ++i) mean[i] += estimates(r, i) - estimates(0, i);
  for (double& m : mean) m /= static_cast<double>(reps);

  Matrix cov(d, d);
  std::vector<double> dev(d);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < d; ++i) dev[i] = (estimates(r, i) - estimates(0, i)) - mean[i];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) cov(i, j) += dev[i] * dev[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= static_cast<double>(reps);
      cov(j, i) = cov(i, j);
    }
  return {SymmetricMatrix(std::move(cov)), CovarianceKind::kEmpirical};
}

double relative_error(const CovarianceEstimate& estimated, const CovarianceEstimate& reference) {
  const std::size_t d = reference.matrix.dim();
  if (estimated.matrix.dim() != d) throw ValidationError("covariances are on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double ref = reference.matrix(i, i);
    if (!(ref > 0.0)) {
      std::ostringstream os;
      os << "reference variance at grid point " << i << " is not positive";
      throw ValidationError(os.str());
    }
    const double diff = estimated.matrix(i, i) - ref;
    sum += diff * diff / (ref * ref);
  }
  return sum / static_cast<double>(d);
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

struct ReplicateResult {
  bool ok = false;
  std::vector<double> estimate;
  std::vector<double> variance;         // diagonal of gamma_hat
  std::optional<SymmetricMatrix> full;  // kept for replicate 0 only
  int covered = -1;                     // -1 not computed / degenerate
  bool degenerate = false;
};

}  // namespace

MonteCarloReport run_campaign(const FunctionalPopulation& pop, const SamplingDesign& design,
                              const CampaignConfig& cfg) {
  if (cfg.replicates < 2) throw ValidationError("a campaign needs at least two replicates");
  if (design.population_size() != pop.size()) throw ValidationError("design and population differ in N");
  if (cfg.compute_coverage && !(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ValidationError("alpha must lie in (0, 1)");

  const std::size_t d = pop.grid_size();
  const auto truth = population_mean(pop);

  std::vector<ReplicateResult> results(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t rep) {
    ReplicateResult& out = results[rep];
    RngStream rng(cfg.master_seed, StreamPurpose::kSampleDraw, rep);
    const Sample sample = design.draw(rng);
    try {
      const MeanEstimate estimate = estimate_mean(pop, sample, cfg.estimator);
      const CovarianceEstimate cov = estimated_covariance(pop, sample, cfg.estimator, estimate.curve);
      out.variance = cov.matrix.diagonal();
      if (rep == 0) out.full = cov.matrix;
      out.estimate = estimate.curve;
      out.ok = true;

      if (cfg.compute_coverage) {
        try {
          const auto band = build_band(estimate, cov, sample.size(), cfg.alpha, cfg.n_sims,
                                       derive_seed(cfg.master_seed, StreamPurpose::kBandSimulation, rep));
          out.covered = contains(band, truth) ? 1 : 0;
        } catch (const DegenerateVarianceError&) {
          out.degenerate = true;
        }
      }
    } catch (const NumericalError&) {
      out.ok = false;
    }
  });

  MonteCarloReport report;
  report.sample_size = design.sample_size();
  report.replicates = cfg.replicates;
  report.seed = cfg.master_seed;
  report.estimator = cfg.estimator.kind;

  std::vector<std::size_t> good;
  for (std::size_t rep = 0; rep < results.size(); ++rep) {
    if (results[rep].ok) good.push_back(rep);
    else report.failed_replicates.push_back(rep);
  }
  if (good.size() < 2) {
    std::ostringstream os;
    os << "only " << good.size() << " of " << cfg.replicates << " replicates could be estimated";
    throw NumericalError(os.str());
  }

  Matrix estimates(good.size(), d);
  for (std::size_t r = 0; r < good.size(); ++r)
    std::copy(results[good[r]].estimate.begin(), results[good[r]].estimate.end(), estimates.row(r).begin());
  report.gamma_emp = empirical_covariance(estimates);
  report.mean_estimate.assign(d, 0.0);
  double mse = 0.0;
  for (std::size_t r = 0; r < good.size(); ++r) {
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      report.mean_estimate[i] += estimates(r, i);
      const double err = estimates(r, i) - truth[i];
      sq += err * err;
    }
    mse += sq / static_cast<double>(d);
  }
  for (double& m : report.mean_estimate) m /= static_cast<double>(good.size());
  report.integrated_mse = mse / static_cast<double>(good.size());
  if (results[0].ok && results[0].full)
    report.first_estimate = CovarianceEstimate{*results[0].full, CovarianceKind::kMaEstimated};

  // E_r per replicate with the 0/0 := 0 convention at zero-variance points.
  const auto ref = report.gamma_emp.matrix.diagonal();
  std::vector<std::size_t> included;
  for (std::size_t rep : good) {
    const auto& v = results[rep].variance;
    double sum = 0.0;
    bool defined = true;
    for (std::size_t i = 0; i < d && defined; ++i) {
      if (ref[i] > 0.0) {
        const double diff = v[i] - ref[i];
        sum += diff * diff / (ref[i] * ref[i]);
      } else if (v[i] != 0.0) {
        defined = false;
      }
    }
    if (!defined) {
      report.excluded_replicates.push_back(rep);
      continue;
    }
    included.push_back(rep);
    report.relative_errors.push_back(sum / static_cast<double>(d));
  }

  report.gamma_bar_diagonal.assign(d, 0.0);
  if (!included.empty()) {
    for (std::size_t rep : included)
      for (std::size_t i = 0; i < d; ++i) report.gamma_bar_diagonal[i] += results[rep].variance[i];
    for (double& g : report.gamma_bar_diagonal) g /= static_cast<double>(included.size());

    double rmse = 0.0;
    for (double e : report.relative_errors) rmse += e;
    report.rmse = rmse / static_cast<double>(included.size());

    double rb = 0.0, vr = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (!(ref[i] > 0.0)) continue;
      const double bias = (report.gamma_bar_diagonal[i] - ref[i]) / ref[i];
      rb += bias * bias;
      double spread = 0.0;
      for (std::size_t rep : included) {
        const double dev = (results[rep].variance[i] - report.gamma_bar_diagonal[i]) / ref[i];
        spread += dev * dev;
      }
      vr += spread / static_cast<double>(included.size());
    }
    report.rb_squared = rb / static_cast<double>(d);
    report.vr = vr / static_cast<double>(d);

    report.er_quantiles = {
        empirical_quantile(report.relative_errors, 0.05), empirical_quantile(report.relative_errors, 0.25),
        empirical_quantile(report.relative_errors, 0.50), empirical_quantile(report.relative_errors, 0.75),
        empirical_quantile(report.relative_errors, 0.95),
    };
  } else {
    const double nan = std::nan("");
    report.rmse = report.rb_squared = report.vr = nan;
    report.er_quantiles = {nan, nan, nan, nan, nan};
  }

  if (cfg.compute_coverage) {
    std::size_t covered = 0, evaluated = 0;
    for (std::size_t rep : good) {
      if (results[rep].degenerate) {
        report.degenerate_replicates.push_back(rep);
        continue;
      }
      ++evaluated;
      covered += results[rep].covered == 1 ? 1 : 0;
    }
    if (evaluated > 0) report.coverage = static_cast<double>(covered) / static_cast<double>(evaluated);
  }
  return report;
}

}  // namespace fdsurvey
