// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fdsurvey/bands.hpp"
#include "fdsurvey/covariance.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/montecarlo.hpp"
#include "fdsurvey/synthetic.hpp"
#include "fdsurvey_cli/commands.hpp"
#include "support/oracles.hpp"

using namespace fdsurvey;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::printf("%s criterion %d: %s (%s; %.2f s)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

oracle::Curve literal_mean(const FunctionalPopulation& pop) {
  const auto rows = oracle::rows_of(pop.values());
  oracle::Curve m(pop.grid_size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) m[i] += r[i] / double(rows.size());
  return m;
}

struct TinyCase {
  std::size_t big_n, n;
  std::uint64_t seed;
};
const std::vector<TinyCase> kTiny = {{5, 2, 1}, {6, 3, 2}, {7, 2, 3}, {8, 4, 4}, {8, 3, 5}, {6, 4, 6}};

// One population for every statistical criterion: N = 2000 load-like curves
// on 48 grid points, aux/response correlation 0.95, heteroscedastic units.
FunctionalPopulation desk_population() {
  const auto grid = TimeGrid::uniform(48, 1.0);
  auto cfg = desk_scale_config(grid, 0.95, 1);
  cfg.unit_scale_dispersion = 0.7;
  return generate_population(cfg, 2000, grid);
}

const FunctionalPopulation& desk() {
  static const FunctionalPopulation pop = desk_population();
  return pop;
}

}  // namespace

int main() {
  run(1, "exhaustive unbiasedness of HT and difference means", [] {
    double worst = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& c : kTiny) {
      const auto pop = oracle::random_population(c.big_n, 2, 4, c.seed);
      const auto design = SamplingDesign::srswor(c.big_n, c.n);
      const auto subsets = oracle::all_subsets(c.big_n, c.n);
      const auto mu = literal_mean(pop);
      for (auto stat : {ht_mean, difference_mean}) {
        const auto m = oracle::uniform_moments(subsets, [&](const std::vector<std::size_t>& s) {
          return stat(pop, Sample(design, s)).curve;
        });
        worst = std::max(worst, max_diff(m.mean, mu) / std::max(1.0, *std::max_element(mu.begin(), mu.end())));
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return Outcome{worst <= 1e-12 && secs < 1.0,
                   std::to_string(kTiny.size()) + " populations, worst " + fmt(worst) + ", " + fmt(secs) + " s"};
  });

  run(2, "closed-form covariances equal enumerated covariances", [] {
    double worst = 0.0;
    for (const auto& c : kTiny) {
      const auto pop = oracle::random_population(c.big_n, 2, 4, c.seed);
      const auto design = SamplingDesign::srswor(c.big_n, c.n);
      const auto subsets = oracle::all_subsets(c.big_n, c.n);
      const auto ht = oracle::uniform_moments(
          subsets, [&](const std::vector<std::size_t>& s) { return ht_mean(pop, Sample(design, s)).curve; });
      const auto diff = oracle::uniform_moments(
          subsets, [&](const std::vector<std::size_t>& s) { return difference_mean(pop, Sample(design, s)).curve; });
      const double scale = std::max(1.0, max_abs(ht.cov));
      worst = std::max(worst, max_diff(ht_covariance_exact(pop, design).matrix.matrix(), ht.cov) / scale);
      worst = std::max(worst, max_diff(ma_covariance_approx(pop, design).matrix.matrix(), diff.cov) / scale);
    }
    return Outcome{worst <= 1e-12, "worst " + fmt(worst)};
  });

  run(3, "Hajek equals intercept-only model-assisted mean", [] {
    double worst = 0.0;
    int count = 0;
    for (std::uint64_t p = 0; p < 3; ++p) {
      const auto base = oracle::random_population(50, 2, 6, 300 + p);
      const FunctionalPopulation pop(base.grid(), base.values(), Matrix(50, 1, 1.0), {"intercept"});
      const auto design = SamplingDesign::srswor(50, 8 + 4 * p);
      for (std::uint64_t s = 0; s < 100; ++s, ++count) {
        const auto sample = oracle::draw(design, 40 + p, s);
        worst = std::max(worst, max_diff(hajek_mean(pop, sample).curve,
                                         model_assisted_mean(pop, sample, std::nullopt).curve));
      }
    }
    return Outcome{worst <= 1e-10, std::to_string(count) + " samples, worst " + fmt(worst)};
  });

  run(4, "calibration weights reproduce the model-assisted mean", [] {
    double worst_mean = 0.0;
    double worst_eq = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto pop = oracle::random_population(30, 2, 5, 500 + i);
      const auto sample = oracle::draw(SamplingDesign::srswor(30, 6 + i % 10), 60, i);
      const auto data = extract_sample_data(pop, sample);
      const auto totals = pop.aux_totals();
      const auto w = calibration_weights(totals, data);
      worst_mean = std::max(worst_mean, max_diff(calibrated_mean(w, data), model_assisted_mean(totals, data, 0.0).curve));
      for (std::size_t j = 0; j < totals.size(); ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < sample.size(); ++r) sum += w.weights[r] * data.aux(r, j);
        worst_eq = std::max(worst_eq, std::abs(sum - totals[j]) / std::abs(totals[j]));
      }
    }
    return Outcome{worst_mean <= 1e-8 && worst_eq <= 1e-8,
                   "100 pairs, mean diff " + fmt(worst_mean) + ", calibration residual " + fmt(worst_eq)};
  });

  run(5, "regularized inverse norm bound and identity above the floor", [] {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> dim(1, 8);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> scale(-4.0, 1.0);
    double worst_excess = -1e300;
    double worst_identity = 0.0;
    int unfloored = 0;
    for (int m = 0; m < 1000; ++m) {
      const int p = dim(gen);
      const int rank = std::uniform_int_distribution<int>(1, p)(gen);
      Eigen::MatrixXd b(p, rank);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < rank; ++j) b(i, j) = z(gen) * std::pow(10.0, scale(gen) / 2.0);
      const Eigen::MatrixXd g = b * b.transpose();
      Matrix gm(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) gm(i, j) = g(i, j);
      const SymmetricMatrix sym = SymmetricMatrix::symmetrized(gm);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(g);
      for (double a : {1e-3, 1e-1, 1.0}) {
        const auto r = regularized_inverse(sym, a);
        Eigen::MatrixXd inv(p, p);
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j) inv(i, j) = r.inverse(i, j);
        const double norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(inv).eigenvalues().cwiseAbs().maxCoeff();
        worst_excess = std::max(worst_excess, norm - 1.0 / a);
        if (ref.eigenvalues().minCoeff() >= a) {
          ++unfloored;
          worst_identity = std::max(worst_identity, max_diff(r.regularized.matrix(), gm) / std::max(1.0, max_abs(gm)));
        }
      }
    }
    return Outcome{worst_excess <= 1e-10 && worst_identity <= 1e-10 && unfloored > 0,
                   "3000 cases, max(norm - 1/a) " + fmt(worst_excess) + ", " + std::to_string(unfloored) +
                       " unfloored cases, identity residual " + fmt(worst_identity)};
  });

  run(6, "mean estimated variance within 10% of the approximate variance (n=400)", [] {
    const auto& pop = desk();
    const auto design = SamplingDesign::srswor(pop.size(), 400);
    CampaignConfig cc;
    cc.replicates = 1000;
    cc.master_seed = 6;
    cc.workers = 4;
    const auto r = run_campaign(pop, design, cc);
    const auto target = ma_covariance_approx(pop, design).matrix.diagonal();
    double worst = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
      worst = std::max(worst, std::abs(r.gamma_bar_diagonal[i] / target[i] - 1.0));
    return Outcome{worst <= 0.10, "worst relative gap " + fmt(worst)};
  });

  run(7, "simultaneous band coverage at alpha=0.05 (n=200)", [] {
    const auto& pop = desk();
    CampaignConfig cc;
    cc.replicates = 2000;
    cc.master_seed = 7;
    cc.workers = 4;
    cc.compute_coverage = true;
    cc.alpha = 0.05;
    cc.n_sims = 5000;
    const auto r = run_campaign(pop, SamplingDesign::srswor(pop.size(), 200), cc);
    const double cov = r.coverage.value_or(-1.0);
    return Outcome{cov >= 0.93 && cov <= 0.97, "coverage " + fmt(cov) + " over " +
                                                   std::to_string(cc.replicates - r.degenerate_replicates.size()) +
                                                   " replicates"};
  });

  run(8, "univariate simulated quantile near 1.96", [] {
    const SymmetricMatrix one(Matrix{{2.5}});
    const double c = simulate_sup_quantile(one, 0.05, 200000, 8, 4);
    return Outcome{c >= 1.945 && c <= 1.975, "c_alpha " + fmt(c)};
  });

  run(9, "variance estimator accuracy improves with n (50, 100, 300)", [] {
    const auto& pop = desk();
    std::vector<MonteCarloReport> reports;
    for (std::size_t n : {50, 100, 300}) {
      CampaignConfig cc;
      cc.replicates = 1000;
      cc.master_seed = 900 + n;
      cc.workers = 4;
      reports.push_back(run_campaign(pop, SamplingDesign::srswor(pop.size(), n), cc));
    }
    bool ok = true;
    std::ostringstream os;
    for (std::size_t j = 0; j < reports.size(); ++j) {
      const auto& r = reports[j];
      ok = ok && r.rb_squared <= 0.1 * r.rmse && std::abs(r.rmse - r.rb_squared - r.vr) <= 1e-10;
      if (j > 0) ok = ok && r.rmse < reports[j - 1].rmse && r.er_quantiles.median < reports[j - 1].er_quantiles.median;
      os << (j ? "; " : "") << "n=" << r.sample_size << " RMSE " << fmt(r.rmse) << " RB2 " << fmt(r.rb_squared)
         << " median " << fmt(r.er_quantiles.median);
    }
    return Outcome{ok, os.str()};
  });

  run(10, "model-assisted integrated MSE at most half of HT (n=100)", [] {
    const auto& pop = desk();
    const auto design = SamplingDesign::srswor(pop.size(), 100);
    CampaignConfig cc;
    cc.replicates = 2000;
    cc.master_seed = 10;
    cc.workers = 4;
    const auto ma = run_campaign(pop, design, cc);
    cc.estimator.kind = EstimatorKind::kHorvitzThompson;
    const auto ht = run_campaign(pop, design, cc);
    const double ratio = ma.integrated_mse / ht.integrated_mse;
    return Outcome{ratio <= 0.5, "ratio " + fmt(ratio)};
  });

  run(11, "montecarlo outputs byte-identical with 1 and 8 workers", [] {
    cli::RunConfig cfg;
    cfg.source = "<acceptance>";
    cli::SyntheticSpec s;
    s.units = 500;
    s.grid_points = 24;
    s.dispersion = 0.7;
    cfg.input.synthetic = s;
    cfg.design.sample_size = 50;
    cfg.campaign.replicates = 200;
    cfg.campaign.sample_sizes = {50, 100};
    cfg.campaign.coverage = true;
    cfg.band.n_sims = 1000;
    const auto a = cli::cmd_montecarlo(cfg, 11, 1);
    const auto b = cli::cmd_montecarlo(cfg, 11, 8);
    return Outcome{a.files == b.files, std::to_string(a.files.size()) + " files compared"};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
