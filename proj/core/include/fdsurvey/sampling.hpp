#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fdsurvey/rng.hpp"

namespace fdsurvey {

class Sample;

enum class DesignKind { kSrswor, kStratifiedSrswor };

/// A fixed-size design with closed-form inclusion probabilities: simple random
/// sampling without replacement, or SRSWOR independently within strata.
/// Unit indices are 0-based. Copies are cheap and share immutable state.
class SamplingDesign {
 public:
  static SamplingDesign srswor(std::size_t population_size, std::size_t sample_size);

  /// `stratum_of_unit[k]` is the stratum label (0..H-1) of unit k, and
  /// `sample_sizes[h]` is n_h. Requires 1 <= n_h <= N_h for every stratum.
  static SamplingDesign stratified(std::vector<std::size_t> stratum_of_unit,
                                   std::vector<std::size_t> sample_sizes);

  DesignKind kind() const noexcept;
  std::size_t population_size() const noexcept;
  std::size_t sample_size() const noexcept;
  bool is_census() const noexcept { return sample_size() == population_size(); }

  std::size_t stratum_count() const noexcept;
  std::size_t stratum_of(std::size_t k) const;
  std::span<const std::size_t> stratum_units(std::size_t h) const;
  std::size_t stratum_sample_size(std::size_t h) const;

  /// pi_k.
  double first_order(std::size_t k) const;
  /// pi_kl for k != l, and pi_kk = pi_k.
  double second_order(std::size_t k, std::size_t l) const;
  /// Delta_kl = pi_kl - pi_k pi_l.
  double delta(std::size_t k, std::size_t l) const;

  /// Minimum first- and second-order probabilities (lambda, lambda*); both
  /// must be positive for a usable design.
  double min_first_order() const;
  double min_second_order() const;

  /// Copy whose *declared* probabilities are shifted by the given offsets
  /// while drawing and enumeration stay untouched. Used to check that the
  /// exhaustive verification catches wrong probability formulas.
  SamplingDesign with_declared_offsets(double first_order_offset,
                                       double second_order_offset) const;

  Sample draw(RngStream& rng) const;

 private:
  struct State;
  explicit SamplingDesign(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  void check_unit(std::size_t k) const;

  std::shared_ptr<const State> state_;
  double first_offset_ = 0.0;
  double second_offset_ = 0.0;
};

/// Sorted distinct unit indices drawn under a design, of size exactly n.
class Sample {
 public:
  /// Sorts the indices; throws ValidationError for duplicates, out-of-range
  /// indices, or a size different from the design's n (or, for stratified
  /// designs, a per-stratum count different from n_h).
  Sample(SamplingDesign design, std::vector<std::size_t> indices);

  const SamplingDesign& design() const noexcept { return design_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool contains(std::size_t k) const;

  /// pi_k for each sampled unit, in index order.
  std::vector<double> inclusion_probabilities() const;

 private:
  SamplingDesign design_;
  std::vector<std::size_t> indices_;
};

struct WeightedSample {
  Sample sample;
  double probability;
};

/// Number of possible samples, saturating at UINT64_MAX.
std::uint64_t sample_space_size(const SamplingDesign& design);

/// Every possible sample with its exact probability p(s). Throws
/// EnumerationCapError when there would be more than `cap` samples.
std::vector<WeightedSample> enumerate_samples(const SamplingDesign& design,
                                              std::uint64_t cap = 1'000'000);

}  // namespace fdsurvey
