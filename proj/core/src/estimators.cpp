#include "fdsurvey/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kHorvitzThompson: return "horvitz-thompson";
    case EstimatorKind::kHajek: return "hajek";
    case EstimatorKind::kModelAssisted: return "model-assisted";
    case EstimatorKind::kDifference: return "difference";
  }
  return "unknown";
}

namespace {

void check_population(const FunctionalPopulation& pop, const Sample& sample) {
  if (pop.size() != sample.design().population_size()) {
    std::ostringstream os;
    os << "sample design is for N = " << sample.design().population_size()
       << " but the population has " << pop.size() << " units";
    throw ValidationError(os.str());
  }
}

// (1/N) sum_s w_k x_k x_k' with w_k = 1/pi_k.
SymmetricMatrix weighted_gram(const Matrix& aux, std::span<const double> pi, double scale) {
  const std::size_t p = aux.cols();
  Matrix g(p, p);
  for (std::size_t r = 0; r < aux.rows(); ++r) {
    auto x = aux.row(r);
    const double w = scale / pi[r];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) g(i, j) += w * x[i] * x[j];
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return SymmetricMatrix(std::move(g));
}

// (1/N) sum_s x_k Y_k(t) / pi_k as a p x D matrix.
Matrix weighted_cross(const Matrix& aux, const Matrix& values, std::span<const double> pi,
                      double scale) {
  Matrix b(aux.cols(), values.cols());
  for (std::size_t r = 0; r < aux.rows(); ++r) {
    auto x = aux.row(r);
    auto y = values.row(r);
    const double w = scale / pi[r];
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wx = w * x[j];
      auto bj = b.row(j);
      for (std::size_t i = 0; i < y.size(); ++i) bj[i] += wx * y[i];
    }
  }
  return b;
}

std::vector<double> all_ones(std::size_t n) { return std::vector<double>(n, 1.0); }

double min_eigenvalue(const SymmetricMatrix& m) { return sym_eigen(m).values.back(); }

bool has_constant_column(const Matrix& aux) {
  for (std::size_t j = 0; j < aux.cols(); ++j) {
    const double c = aux(0, j);
    if (c == 0.0) continue;
    bool constant = true;
    for (std::size_t r = 1; r < aux.rows() && constant; ++r) constant = aux(r, j) == c;
    if (constant) return true;
  }
  return false;
}

}  // namespace

SampleData extract_sample_data(const FunctionalPopulation& pop, const Sample& sample) {
  check_population(pop, sample);
  const auto& idx = sample.indices();
  SampleData data{sample, Matrix(idx.size(), pop.aux_dim()), Matrix(idx.size(), pop.grid_size()),
                  pop.size()};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(pop.aux_row(idx[r]).begin(), pop.aux_dim(), data.aux.row(r).begin());
    std::copy_n(pop.curve(idx[r]).begin(), pop.grid_size(), data.values.row(r).begin());
  }
  return data;
}

MeanEstimate ht_mean(const FunctionalPopulation& pop, const Sample& sample) {
  check_population(pop, sample);
  std::vector<double> curve(pop.grid_size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(pop.size());
  for (std::size_t k : sample.indices()) {
    const double w = inv_n / sample.design().first_order(k);
    auto y = pop.curve(k);
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] += w * y[i];
  }
  return {std::move(curve), EstimatorKind::kHorvitzThompson, sample, std::nullopt};
}

MeanEstimate hajek_mean(const FunctionalPopulation& pop, const Sample& sample) {
  check_population(pop, sample);
  std::vector<double> curve(pop.grid_size(), 0.0);
  double weight_sum = 0.0;
  for (std::size_t k : sample.indices()) {
    const double w = 1.0 / sample.design().first_order(k);
    weight_sum += w;
    auto y = pop.curve(k);
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] += w * y[i];
  }
  for (double& v : curve) v /= weight_sum;
  return {std::move(curve), EstimatorKind::kHajek, sample, std::nullopt};
}

double default_floor(const SymmetricMatrix& gram) {
  return 1e-8 * trace(gram.matrix()) / static_cast<double>(gram.dim());
}

BetaEstimate beta_population(const FunctionalPopulation& pop) {
  const double scale = 1.0 / static_cast<double>(pop.size());
  const auto ones = all_ones(pop.size());
  auto gram = weighted_gram(pop.aux(), ones, scale);
  const auto inverse = spd_inverse(gram, kSingularityThreshold);
  const Matrix cross = weighted_cross(pop.aux(), pop.values(), ones, scale);
  BetaEstimate out;
  out.coefficients = inverse.matrix() * cross;
  out.min_eigenvalue = min_eigenvalue(gram);
  out.gram = std::move(gram);
  out.kind = BetaKind::kPopulation;
  return out;
}

BetaEstimate beta_sampled(const SampleData& data, std::optional<double> floor) {
  if (floor && !(*floor >= 0.0)) throw ValidationError("regularization floor must be >= 0");
  const double scale = 1.0 / static_cast<double>(data.population_size);
  const auto pi = data.sample.inclusion_probabilities();
  auto gram = weighted_gram(data.aux, pi, scale);
  const Matrix cross = weighted_cross(data.aux, data.values, pi, scale);

  const double a = floor ? *floor : default_floor(gram);
  BetaEstimate out;
  out.kind = BetaKind::kSampled;
  out.floor = a;
  if (a == 0.0) {
    out.coefficients = spd_inverse(gram, kSingularityThreshold).matrix() * cross;
    out.min_eigenvalue = min_eigenvalue(gram);
  } else {
    if (!(a > 0.0)) throw SingularMatrixError("sampled Gram matrix has zero trace", 0.0);
    const auto reg = regularized_inverse(gram, a);
    out.coefficients = reg.inverse.matrix() * cross;
    out.floor_applied = reg.floor_applied;
    out.min_eigenvalue = reg.min_eigenvalue;
  }
  out.gram = std::move(gram);
  return out;
}

BetaEstimate beta_sampled(const FunctionalPopulation& pop, const Sample& sample,
                          std::optional<double> floor) {
  return beta_sampled(extract_sample_data(pop, sample), floor);
}

Matrix sample_residuals(const SampleData& data, const BetaEstimate& beta) {
  Matrix e = data.values;
  const std::size_t p = data.aux.cols();
  for (std::size_t r = 0; r < e.rows(); ++r) {
    auto x = data.aux.row(r);
    auto er = e.row(r);
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = x[j];
      auto bj = beta.coefficients.row(j);
      for (std::size_t i = 0; i < er.size(); ++i) er[i] -= xj * bj[i];
    }
  }
  return e;
}

MeanEstimate model_assisted_mean(std::span<const double> aux_totals, const SampleData& data,
                                 std::optional<double> floor) {
  const std::size_t p = data.aux.cols();
  if (aux_totals.size() != p) throw ValidationError("aux totals length does not match aux dimension");
  const auto beta = beta_sampled(data, floor);
  const auto residuals = sample_residuals(data, beta);  // Y_k - Yhat_k
  const auto pi = data.sample.inclusion_probabilities();
  const double inv_n = 1.0 / static_cast<double>(data.population_size);
  const std::size_t d = data.values.cols();

  // (1/N) sum_U Yhat_k(t) = (1/N) (sum_U x_k)' beta(t).
  std::vector<double> curve(d, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    auto bj = beta.coefficients.row(j);
    for (std::size_t i = 0; i < d; ++i) curve[i] += inv_n * aux_totals[j] * bj[i];
  }
  // Minus the HT mean of (Yhat_k - Y_k), i.e. plus the HT mean of residuals.
  std::vector<double> residual_ht(d, 0.0);
  double scale = 0.0;
  for (std::size_t r = 0; r < residuals.rows(); ++r) {
    const double w = inv_n / pi[r];
    auto er = residuals.row(r);
    auto yr = data.values.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      residual_ht[i] += w * er[i];
      scale = std::max(scale, w * std::abs(yr[i]));
    }
  }
  for (std::size_t i = 0; i < d; ++i) curve[i] += residual_ht[i];

  if (!beta.floor_applied && has_constant_column(data.aux)) {
    const double tol = 1e-8 * std::max(scale * static_cast<double>(residuals.rows()), 1e-300);
    for (std::size_t i = 0; i < d; ++i) {
      if (std::abs(residual_ht[i]) > tol) {
        std::ostringstream os;
        os << "HT sum of residuals does not vanish at grid point " << i << " ("
           << residual_ht[i] << ") although the model has an intercept";
        throw NumericalError(os.str());
      }
    }
  }
  return {std::move(curve), EstimatorKind::kModelAssisted, data.sample, beta.floor};
}

MeanEstimate model_assisted_mean(const FunctionalPopulation& pop, const Sample& sample,
                                 std::optional<double> floor) {
  const auto totals = pop.aux_totals();
  return model_assisted_mean(totals, extract_sample_data(pop, sample), floor);
}

MeanEstimate difference_mean(const FunctionalPopulation& pop, const Sample& sample) {
  check_population(pop, sample);
  const auto beta = beta_population(pop);
  const std::size_t d = pop.grid_size();
  const std::size_t p = pop.aux_dim();
  const double inv_n = 1.0 / static_cast<double>(pop.size());
  const auto totals = pop.aux_totals();

  std::vector<double> curve(d, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    auto bj = beta.coefficients.row(j);
    for (std::size_t i = 0; i < d; ++i) curve[i] += inv_n * totals[j] * bj[i];
  }
  for (std::size_t k : sample.indices()) {
    const double w = inv_n / sample.design().first_order(k);
    auto x = pop.aux_row(k);
    auto y = pop.curve(k);
    for (std::size_t i = 0; i < d; ++i) {
      double fitted = 0.0;
      for (std::size_t j = 0; j < p; ++j) fitted += x[j] * beta.coefficients(j, i);
      curve[i] -= w * (fitted - y[i]);
    }
  }
  return {std::move(curve), EstimatorKind::kDifference, sample, std::nullopt};
}

CalibrationWeights calibration_weights(std::span<const double> aux_totals, const SampleData& data) {
  const std::size_t p = data.aux.cols();
  if (aux_totals.size() != p) throw ValidationError("aux totals length does not match aux dimension");
  const auto pi = data.sample.inclusion_probabilities();
  const auto moment = weighted_gram(data.aux, pi, 1.0);  // sum_s x x' / pi
  const auto inverse = spd_inverse(moment, kSingularityThreshold);

  // gap = sum_s x/pi - sum_U x.
  std::vector<double> gap(p, 0.0);
  for (std::size_t r = 0; r < data.aux.rows(); ++r) {
    auto x = data.aux.row(r);
    for (std::size_t j = 0; j < p; ++j) gap[j] += x[j] / pi[r];
  }
  for (std::size_t j = 0; j < p; ++j) gap[j] -= aux_totals[j];
  const auto lambda = inverse.matrix() * std::span<const double>(gap);

  CalibrationWeights out{data.sample.indices(), std::vector<double>(data.aux.rows())};
  for (std::size_t r = 0; r < data.aux.rows(); ++r) {
    auto x = data.aux.row(r);
    double correction = 0.0;
    for (std::size_t j = 0; j < p; ++j) correction += lambda[j] * x[j];
    out.weights[r] = (1.0 - correction) / pi[r];
  }
  return out;
}

std::vector<double> calibrated_mean(const CalibrationWeights& weights, const SampleData& data) {
  if (weights.weights.size() != data.values.rows())
    throw ValidationError("calibration weights do not match the sample");
  std::vector<double> curve(data.values.cols(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.population_size);
  for (std::size_t r = 0; r < data.values.rows(); ++r) {
    auto y = data.values.row(r);
    const double w = inv_n * weights.weights[r];
    for (std::size_t i = 0; i < y.size(); ++i) curve[i] += w * y[i];
  }
  return curve;
}

MeanEstimate estimate_mean(const FunctionalPopulation& pop, const Sample& sample,
                           const EstimatorConfig& cfg) {
  switch (cfg.kind) {
    case EstimatorKind::kHorvitzThompson: return ht_mean(pop, sample);
    case EstimatorKind::kHajek: return hajek_mean(pop, sample);
    case EstimatorKind::kModelAssisted: return model_assisted_mean(pop, sample, cfg.floor);
    case EstimatorKind::kDifference: return difference_mean(pop, sample);
  }
  throw ValidationError("unknown estimator kind");
}

}  // namespace fdsurvey
