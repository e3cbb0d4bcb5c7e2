#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/matrix.hpp"
#include "fdsurvey/sampling.hpp"

namespace fdsurvey {

/// Design expectation and covariance of a curve-valued statistic, computed
/// by summing over every possible sample.
struct DesignMoments {
  std::vector<double> mean;
  Matrix covariance;  // sum_s p(s) (T(s) - E T)(T(s) - E T)'
};

using SampleStatistic = std::function<std::vector<double>(const Sample&)>;

DesignMoments design_moments(const std::vector<WeightedSample>& samples, const SampleStatistic& stat);

/// p(s)-weighted average of a matrix-valued statistic.
Matrix design_expectation(const std::vector<WeightedSample>& samples,
                          const std::function<Matrix(const Sample&)>& stat);

struct OracleCheck {
  std::string name;
  double residual = 0.0;   // largest absolute discrepancy
  double tolerance = 0.0;  // absolute tolerance the residual is held to
  bool passed = false;
  std::string note;
};

struct OracleReport {
  std::uint64_t sample_count = 0;
  std::vector<OracleCheck> checks;

  bool all_passed() const;
};

struct OracleOptions {
  double tolerance = 1e-10;              // identities that hold exactly
  double calibration_tolerance = 1e-8;   // calibration and equivalence identities
  std::uint64_t cap = 1'000'000;
};

/// Exhaustive verification on a tiny population: enumerates every sample and
/// checks the inclusion-probability identities, unbiasedness of the HT and
/// difference estimators, both covariance formulas against the enumerated
/// covariances, unbiasedness of the HT covariance estimator on frozen
/// population residuals, the Hajek and calibration equivalences of the
/// model-assisted estimator, and the calibration equations. Curve tolerances
/// are scaled by max(1, largest |value| involved).
OracleReport run_oracle_checks(const FunctionalPopulation& pop, const SamplingDesign& design,
                               const OracleOptions& options = {});

}  // namespace fdsurvey
