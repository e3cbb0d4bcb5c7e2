#include "fdsurvey/covariance.hpp"

#include <sstream>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

std::string_view to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::kHtExact: return "ht-exact";
    case CovarianceKind::kMaApprox: return "ma-approx";
    case CovarianceKind::kMaEstimated: return "ma-estimated";
    case CovarianceKind::kEmpirical: return "empirical";
  }
  return "unknown";
}

namespace {

// Per-group totals S = sum_k y_k and centered cross-products
// C = sum_k (y_k - ybar)(y_k - ybar)' over rows `rows` of `scaled`.
struct GroupMoments {
  std::vector<double> total;
  Matrix centered;
  std::size_t count = 0;
};

GroupMoments group_moments(const Matrix& scaled, const std::vector<std::size_t>& rows) {
  const std::size_t d = scaled.cols();
  GroupMoments g{std::vector<double>(d, 0.0), Matrix(d, d), rows.size()};
  if (rows.empty()) return g;
  for (std::size_t r : rows) {
    auto y = scaled.row(r);
    for (std::size_t i = 0; i < d; ++i) g.total[i] += y[i];
  }
  std::vector<double> mean(d);
  for (std::size_t i = 0; i < d; ++i) mean[i] = g.total[i] / static_cast<double>(rows.size());
  std::vector<double> dev(d);
  for (std::size_t r : rows) {
    auto y = scaled.row(r);
    for (std::size_t i = 0; i < d; ++i) dev[i] = y[i] - mean[i];
    for (std::size_t i = 0; i < d; ++i) {
      auto ci = g.centered.row(i);
      const double di = dev[i];
      for (std::size_t j = i; j < d; ++j) ci[j] += di * dev[j];
    }
  }
  return g;
}

void add_outer(Matrix& out, double coef, std::span<const double> a, std::span<const double> b) {
  if (coef == 0.0) return;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto oi = out.row(i);
    const double ai = coef * a[i];
    for (std::size_t j = 0; j < b.size(); ++j) oi[j] += ai * b[j];
  }
}

SymmetricMatrix finish(Matrix upper_and_full, const Matrix& full_part, double scale) {
  // `upper_and_full` holds upper-triangle centered terms; `full_part` holds
  // full outer-product terms. Mirror, combine, scale.
  const std::size_t d = upper_and_full.rows();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double v = scale * (upper_and_full(i, j) + 0.5 * (full_part(i, j) + full_part(j, i)));
      out(i, j) = v;
      out(j, i) = v;
    }
  return SymmetricMatrix(std::move(out));
}

// Weighted double sum sum_{k,l} w_kl y_k y_l' where w is block-constant:
// w_kk = diag[h], w_kl = within[h] for k != l in group h, w_kl = between(h, g)
// across groups. Using sum_{k,l in h} = within S S' + (diag - within) Q and
// Q = C + S S' / m gives coefficient within + (diag - within)/m on S S' and
// (diag - within) on C.
template <class Between>
SymmetricMatrix block_double_sum(const Matrix& scaled, const std::vector<std::vector<std::size_t>>& groups,
                                 const std::vector<double>& diag, const std::vector<double>& within,
                                 Between between, double scale) {
  const std::size_t d = scaled.cols();
  std::vector<GroupMoments> moments;
  moments.reserve(groups.size());
  for (const auto& g : groups) moments.push_back(group_moments(scaled, g));

  Matrix centered(d, d);
  Matrix outer(d, d);
  for (std::size_t h = 0; h < groups.size(); ++h) {
    const auto& m = moments[h];
    if (m.count == 0) continue;
    const double gap = diag[h] - within[h];
    const double total_coef = within[h] + gap / static_cast<double>(m.count);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) centered(i, j) += gap * m.centered(i, j);
    add_outer(outer, total_coef, m.total, m.total);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g == h || moments[g].count == 0) continue;
      add_outer(outer, between(h, g), m.total, moments[g].total);
    }
  }
  return finish(std::move(centered), outer, scale);
}

}  // namespace

SymmetricMatrix ht_covariance_of(const Matrix& values, const SamplingDesign& design) {
  if (values.rows() != design.population_size()) throw ValidationError("curve table and design differ in N");
  const std::size_t strata = design.stratum_count();

  Matrix scaled = values;
  for (std::size_t k = 0; k < scaled.rows(); ++k) {
    const double inv_pi = 1.0 / design.first_order(k);
    for (double& v : scaled.row(k)) v *= inv_pi;
  }

  std::vector<std::vector<std::size_t>> groups(strata);
  std::vector<double> diag(strata), within(strata, 0.0);
  for (std::size_t h = 0; h < strata; ++h) {
    auto units = design.stratum_units(h);
    groups[h].assign(units.begin(), units.end());
    diag[h] = design.delta(units[0], units[0]);
    if (units.size() >= 2) within[h] = design.delta(units[0], units[1]);
  }
  auto between = [&](std::size_t h, std::size_t g) {
    return design.delta(groups[h][0], groups[g][0]);
  };
  const double n = static_cast<double>(values.rows());
  return block_double_sum(scaled, groups, diag, within, between, 1.0 / (n * n));
}

CovarianceEstimate ht_covariance_exact(const FunctionalPopulation& pop, const SamplingDesign& design) {
  return {ht_covariance_of(pop.values(), design), CovarianceKind::kHtExact};
}

CovarianceEstimate ma_covariance_approx(const FunctionalPopulation& pop, const SamplingDesign& design) {
  const auto beta = beta_population(pop);
  Matrix residuals = pop.values();
  for (std::size_t k = 0; k < pop.size(); ++k) {
    auto x = pop.aux_row(k);
    auto e = residuals.row(k);
    for (std::size_t j = 0; j < x.size(); ++j) {
      auto bj = beta.coefficients.row(j);
      for (std::size_t i = 0; i < e.size(); ++i) e[i] -= x[j] * bj[i];
    }
  }
  return {ht_covariance_of(residuals, design), CovarianceKind::kMaApprox};
}

SymmetricMatrix ht_covariance_estimator(const Matrix& sampled_values, const Sample& sample,
                                        std::size_t population_size) {
  const auto& design = sample.design();
  const auto& idx = sample.indices();
  if (sampled_values.rows() != idx.size()) throw ValidationError("row count does not match the sample size");
  const std::size_t strata = design.stratum_count();

  Matrix scaled = sampled_values;
  std::vector<std::vector<std::size_t>> groups(strata);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double inv_pi = 1.0 / design.first_order(idx[r]);
    for (double& v : scaled.row(r)) v *= inv_pi;
    groups[design.stratum_of(idx[r])].push_back(r);
  }

  auto weight = [&](std::size_t k, std::size_t l) {
    const double pkl = design.second_order(k, l);
    if (!(pkl > 0.0)) {
      std::ostringstream os;
      os << "second-order inclusion probability of units " << k << " and " << l << " is not positive";
      throw ValidationError(os.str());
    }
    return design.delta(k, l) / pkl;
  };

  std::vector<double> diag(strata, 0.0), within(strata, 0.0);
  for (std::size_t h = 0; h < strata; ++h) {
    if (groups[h].empty()) continue;
    const std::size_t k0 = idx[groups[h][0]];
    diag[h] = weight(k0, k0);
    if (groups[h].size() >= 2) within[h] = weight(k0, idx[groups[h][1]]);
  }
  auto between = [&](std::size_t h, std::size_t g) {
    return weight(idx[groups[h][0]], idx[groups[g][0]]);
  };
  const double n = static_cast<double>(population_size);
  return block_double_sum(scaled, groups, diag, within, between, 1.0 / (n * n));
}

CovarianceEstimate ma_covariance_estimate(const SampleData& data, std::optional<double> floor) {
  const auto beta = beta_sampled(data, floor);
  const auto residuals = sample_residuals(data, beta);
  return {ht_covariance_estimator(residuals, data.sample, data.population_size),
          CovarianceKind::kMaEstimated};
}

CovarianceEstimate ma_covariance_estimate(const FunctionalPopulation& pop, const Sample& sample,
                                          std::optional<double> floor) {
  return ma_covariance_estimate(extract_sample_data(pop, sample), floor);
}

CovarianceEstimate estimated_covariance(const FunctionalPopulation& pop, const Sample& sample,
                                        const EstimatorConfig& cfg, std::span<const double> estimate) {
  const SampleData data = extract_sample_data(pop, sample);
  Matrix rows;
  switch (cfg.kind) {
    case EstimatorKind::kHorvitzThompson:
      rows = data.values;
      break;
    case EstimatorKind::kHajek:
      if (estimate.size() != pop.grid_size()) throw ValidationError("estimate does not match the grid");
      rows = data.values;
      for (std::size_t r = 0; r < rows.rows(); ++r)
        for (std::size_t i = 0; i < rows.cols(); ++i) rows(r, i) -= estimate[i];
      break;
    case EstimatorKind::kModelAssisted:
      rows = sample_residuals(data, beta_sampled(data, cfg.floor));
      break;
    case EstimatorKind::kDifference:
      rows = sample_residuals(data, beta_population(pop));
      break;
  }
  return {ht_covariance_estimator(rows, sample, pop.size()), CovarianceKind::kMaEstimated};
}

CovarianceEstimate target_covariance(const FunctionalPopulation& pop, const SamplingDesign& design,
                                     EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kHorvitzThompson:
      return ht_covariance_exact(pop, design);
    case EstimatorKind::kHajek: {
      const auto mu = population_mean(pop);
      Matrix centered = pop.values();
      for (std::size_t k = 0; k < centered.rows(); ++k)
        for (std::size_t i = 0; i < centered.cols(); ++i) centered(k, i) -= mu[i];
      return {ht_covariance_of(centered, design), CovarianceKind::kMaApprox};
    }
    case EstimatorKind::kModelAssisted:
    case EstimatorKind::kDifference:
      return ma_covariance_approx(pop, design);
  }
  throw ValidationError("unknown estimator kind");
}

}  // namespace fdsurvey
