#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/sampling.hpp"

namespace fdsurvey {

enum class CovarianceKind { kHtExact, kMaApprox, kMaEstimated, kEmpirical };

std::string_view to_string(CovarianceKind kind);

/// D x D covariance of a mean estimator between grid points. Stored
/// unscaled: no factor n is applied here.
struct CovarianceEstimate {
  SymmetricMatrix matrix;
  CovarianceKind kind;
};

/// (1/N^2) sum_k sum_l Delta_kl (Y_k(r)/pi_k)(Y_l(t)/pi_l) for an arbitrary
/// N x D table of curves, using the design's declared probabilities.
///
/// Shipped designs have Delta_kl constant within each stratum and between
/// each pair of strata, so the double sum collapses to per-stratum totals and
/// centered cross-products in O(N D^2); the centering keeps the cancellation
/// for constant curves exact to roundoff.
SymmetricMatrix ht_covariance_of(const Matrix& values, const SamplingDesign& design);

/// Design covariance of the HT mean estimator.
CovarianceEstimate ht_covariance_exact(const FunctionalPopulation& pop, const SamplingDesign& design);

/// HT covariance of the population residuals Y_k - x_k' beta-tilde: the
/// approximate covariance of the model-assisted estimator, and exactly the
/// covariance of the difference estimator.
CovarianceEstimate ma_covariance_approx(const FunctionalPopulation& pop, const SamplingDesign& design);

/// HT covariance estimator
///   (1/N^2) sum_{k,l in s} (Delta_kl / pi_kl) (e_k(r)/pi_k)(e_l(t)/pi_l)
/// applied to the given rows (one per sampled unit, in sample order).
/// Throws ValidationError if a sampled pair has pi_kl <= 0.
SymmetricMatrix ht_covariance_estimator(const Matrix& sampled_values, const Sample& sample,
                                        std::size_t population_size);

/// Residual-based estimator of the model-assisted covariance: the HT
/// covariance estimator applied to Y_k - x_k' beta_a. Only sample data is
/// needed (beta_a does not use the aux totals).
CovarianceEstimate ma_covariance_estimate(const SampleData& data, std::optional<double> floor);
CovarianceEstimate ma_covariance_estimate(const FunctionalPopulation& pop, const Sample& sample,
                                          std::optional<double> floor);

/// Covariance estimate matching an estimator: the HT covariance estimator
/// applied to Y_k (HT), Y_k - mu-hat (Hajek), Y_k - x_k' beta_a (model
/// assisted) or Y_k - x_k' beta-tilde (difference).
CovarianceEstimate estimated_covariance(const FunctionalPopulation& pop, const Sample& sample,
                                        const EstimatorConfig& cfg, std::span<const double> estimate);

/// Design covariance that estimated_covariance targets: exact for HT and
/// difference, the residual approximation for model assisted, and the
/// linearized HT covariance of Y_k - mu for Hajek.
CovarianceEstimate target_covariance(const FunctionalPopulation& pop, const SamplingDesign& design,
                                     EstimatorKind kind);

}  // namespace fdsurvey
