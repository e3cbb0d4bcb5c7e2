#include "fdsurvey/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsurvey/covariance.hpp"
#include "fdsurvey/error.hpp"
#include "fdsurvey/estimators.hpp"

namespace fdsurvey {

DesignMoments design_moments(const std::vector<WeightedSample>& samples, const SampleStatistic& stat) {
  if (samples.empty()) throw ValidationError("no samples to average over");
  std::vector<std::vector<double>> values;
  values.reserve(samples.size());
  for (const auto& ws : samples) values.push_back(stat(ws.sample));
  const std::size_t d = values.front().size();

  DesignMoments out{std::vector<double>(d, 0.0), Matrix(d, d)};
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += samples[s].probability * values[s][i];
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        out.covariance(i, j) += samples[s].probability * (values[s][i] - out.mean[i]) *
                                (values[s][j] - out.mean[j]);
  return out;
}

Matrix design_expectation(const std::vector<WeightedSample>& samples,
                          const std::function<Matrix(const Sample&)>& stat) {
  if (samples.empty()) throw ValidationError("no samples to average over");
  Matrix out;
  for (const auto& ws : samples) {
    Matrix m = stat(ws.sample);
    m *= ws.probability;
    if (out.empty()) out = std::move(m);
    else out += m;
  }
  return out;
}

bool OracleReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

OracleCheck make_check(std::string name, double residual, double tolerance, std::string note = {}) {
  OracleCheck c{std::move(name), residual, tolerance, false, std::move(note)};
  c.passed = std::isfinite(residual) && residual <= tolerance;
  return c;
}

// Residuals of the population least-squares fit, N x D.
Matrix population_residuals(const FunctionalPopulation& pop) {
  const auto beta = beta_population(pop);
  Matrix e = pop.values();
  for (std::size_t k = 0; k < pop.size(); ++k) {
    const auto x = pop.aux_row(k);
    for (std::size_t i = 0; i < pop.grid_size(); ++i) {
      double fit = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) fit += x[j] * beta.coefficients(j, i);
      e(k, i) -= fit;
    }
  }
  return e;
}

}  // namespace

OracleReport run_oracle_checks(const FunctionalPopulation& pop, const SamplingDesign& design,
                               const OracleOptions& options) {
  if (design.population_size() != pop.size()) throw ValidationError("design and population differ in N");
  const auto samples = enumerate_samples(design, options.cap);
  const std::size_t big_n = pop.size();
  const std::size_t n = design.sample_size();
  const double tol = options.tolerance;

  OracleReport report;
  report.sample_count = samples.size();

  // Probability identities.
  {
    double total = 0.0;
    for (const auto& ws : samples) total += ws.probability;
    report.checks.push_back(make_check("sample_probabilities_sum_to_one", std::abs(total - 1.0), tol));

    double pi_sum = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) pi_sum += design.first_order(k);
    report.checks.push_back(
        make_check("first_order_sum_equals_n", std::abs(pi_sum - static_cast<double>(n)), tol));

    double pair_residual = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < big_n; ++l)
        if (l != k) s += design.second_order(k, l);
      pair_residual = std::max(
          pair_residual, std::abs(s - static_cast<double>(n - 1) * design.first_order(k)));
    }
    report.checks.push_back(make_check("second_order_row_sums", pair_residual, tol));

    Matrix freq(big_n, big_n);
    for (const auto& ws : samples) {
      const auto& idx = ws.sample.indices();
      for (std::size_t a : idx)
        for (std::size_t b : idx) freq(a, b) += ws.probability;
    }
    double first_res = 0.0, second_res = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) {
      first_res = std::max(first_res, std::abs(freq(k, k) - design.first_order(k)));
      for (std::size_t l = 0; l < big_n; ++l)
        if (l != k) second_res = std::max(second_res, std::abs(freq(k, l) - design.second_order(k, l)));
    }
    report.checks.push_back(make_check("first_order_matches_enumeration", first_res, tol));
    report.checks.push_back(make_check("second_order_matches_enumeration", second_res, tol));
  }

  const auto mu = population_mean(pop);
  const double scale = std::max(1.0, max_abs(pop.values().data()));
  const double curve_tol = tol * scale;
  const double cov_tol = tol * scale * scale;

  const auto ht = design_moments(samples, [&](const Sample& s) { return ht_mean(pop, s).curve; });
  report.checks.push_back(make_check("ht_mean_unbiased", max_abs_diff(ht.mean, mu), curve_tol));

  const auto exact = ht_covariance_exact(pop, design);
  report.checks.push_back(make_check("ht_covariance_matches_enumeration",
                                     fdsurvey::max_abs_diff(exact.matrix.matrix(), ht.covariance),
                                     cov_tol));

  // Checks that need the population regression fit.
  bool fit_ok = true;
  try {
    (void)beta_population(pop);
  } catch (const SingularMatrixError& e) {
    fit_ok = false;
    report.checks.push_back(make_check("population_fit", std::nan(""), tol, e.what()));
  }

  if (fit_ok) {
    const auto diff = design_moments(samples, [&](const Sample& s) { return difference_mean(pop, s).curve; });
    report.checks.push_back(make_check("difference_mean_unbiased", max_abs_diff(diff.mean, mu), curve_tol));

    const auto approx = ma_covariance_approx(pop, design);
    report.checks.push_back(make_check("ma_covariance_matches_enumeration",
                                       fdsurvey::max_abs_diff(approx.matrix.matrix(), diff.covariance),
                                       cov_tol));

    const Matrix resid = population_residuals(pop);
    const Matrix expected_estimator = design_expectation(samples, [&](const Sample& s) {
      Matrix rows(s.size(), pop.grid_size());
      for (std::size_t r = 0; r < s.size(); ++r) {
        const auto src = resid.row(s.indices()[r]);
        std::copy(src.begin(), src.end(), rows.row(r).begin());
      }
      return ht_covariance_estimator(rows, s, big_n).matrix();
    });
    report.checks.push_back(make_check("covariance_estimator_unbiased",
                                       fdsurvey::max_abs_diff(expected_estimator, approx.matrix.matrix()),
                                       cov_tol));
  }

  // Hajek versus model-assisted with an intercept-only model.
  {
    const FunctionalPopulation ones(pop.grid(), pop.values(), Matrix(big_n, 1, 1.0), {"intercept"});
    double worst = 0.0;
    for (const auto& ws : samples) {
      const auto h = hajek_mean(pop, ws.sample).curve;
      const auto ma = model_assisted_mean(ones, ws.sample, 0.0).curve;
      worst = std::max(worst, max_abs_diff(h, ma));
    }
    report.checks.push_back(
        make_check("hajek_equals_intercept_model_assisted", worst, curve_tol));
  }

  // Calibration weights versus model-assisted with no floor.
  {
    const auto totals = pop.aux_totals();
    const double aux_scale = std::max(1.0, max_abs(totals));
    double worst_mean = 0.0, worst_eq = 0.0;
    std::size_t skipped = 0;
    for (const auto& ws : samples) {
      const auto data = extract_sample_data(pop, ws.sample);
      try {
        const auto w = calibration_weights(totals, data);
        const auto cal = calibrated_mean(w, data);
        const auto ma = model_assisted_mean(totals, data, 0.0).curve;
        worst_mean = std::max(worst_mean, max_abs_diff(cal, ma));
        for (std::size_t j = 0; j < pop.aux_dim(); ++j) {
          double s = 0.0;
          for (std::size_t r = 0; r < data.sample.size(); ++r) s += w.weights[r] * data.aux(r, j);
          worst_eq = std::max(worst_eq, std::abs(s - totals[j]) / aux_scale);
        }
      } catch (const SingularMatrixError&) {
        ++skipped;
      }
    }
    std::string note;
    if (skipped > 0) {
      std::ostringstream os;
      os << skipped << " samples with singular sampled moment matrix skipped";
      note = os.str();
    }
    report.checks.push_back(make_check("calibration_equals_model_assisted", worst_mean,
                                       options.calibration_tolerance * scale, note));
    report.checks.push_back(
        make_check("calibration_equations", worst_eq, options.calibration_tolerance, note));
  }

  return report;
}

}  // namespace fdsurvey
