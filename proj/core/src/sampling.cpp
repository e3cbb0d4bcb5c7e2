#include "fdsurvey/sampling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

struct SamplingDesign::State {
  DesignKind kind = DesignKind::kSrswor;
  std::size_t population = 0;
  std::size_t sample = 0;
  std::vector<std::size_t> stratum_of;             // per unit
  std::vector<std::vector<std::size_t>> units;     // per stratum, ascending
  std::vector<std::size_t> stratum_sample;         // n_h
};

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (a != 0 && b > kMax / a) return kMax;
  return a * b;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i; cancel the common factor first.
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t factor = (n - k + i) / (i / g);
    r = saturating_mul(r / g, factor);
    if (r == std::numeric_limits<std::uint64_t>::max()) return r;
  }
  return r;
}

double within_pair_probability(std::size_t big_n, std::size_t small_n) {
  if (big_n < 2) return 0.0;
  return static_cast<double>(small_n) * static_cast<double>(small_n - 1) /
         (static_cast<double>(big_n) * static_cast<double>(big_n - 1));
}

// Partial Fisher-Yates over positions [0, pool); displaced entries live in a
// sparse map so memory is O(count).
std::vector<std::size_t> choose_positions(std::size_t pool, std::size_t count, RngStream& rng) {
  std::unordered_map<std::size_t, std::size_t> swapped;
  std::vector<std::size_t> chosen(count);
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.index(pool - i);
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    chosen[i] = vj;
    swapped[j] = vi;
  }
  return chosen;
}

}  // namespace

SamplingDesign SamplingDesign::srswor(std::size_t population_size, std::size_t sample_size) {
  if (sample_size < 1 || sample_size > population_size) {
    std::ostringstream os;
    os << "SRSWOR needs 1 <= n <= N, got n=" << sample_size << ", N=" << population_size;
    throw ValidationError(os.str());
  }
  auto s = std::make_shared<State>();
  s->kind = DesignKind::kSrswor;
  s->population = population_size;
  s->sample = sample_size;
  s->stratum_of.assign(population_size, 0);
  s->units.emplace_back(population_size);
  for (std::size_t k = 0; k < population_size; ++k) s->units[0][k] = k;
  s->stratum_sample = {sample_size};
  return SamplingDesign(std::move(s));
}

SamplingDesign SamplingDesign::stratified(std::vector<std::size_t> stratum_of_unit,
                                          std::vector<std::size_t> sample_sizes) {
  if (stratum_of_unit.empty()) throw ValidationError("stratified design needs at least one unit");
  const std::size_t strata = sample_sizes.size();
  auto s = std::make_shared<State>();
  s->kind = DesignKind::kStratifiedSrswor;
  s->population = stratum_of_unit.size();
  s->units.resize(strata);
  for (std::size_t k = 0; k < stratum_of_unit.size(); ++k) {
    if (stratum_of_unit[k] >= strata) {
      std::ostringstream os;
      os << "unit " << k << " has stratum " << stratum_of_unit[k] << " but only " << strata
         << " sample sizes were given";
      throw ValidationError(os.str());
    }
    s->units[stratum_of_unit[k]].push_back(k);
  }
  for (std::size_t h = 0; h < strata; ++h) {
    if (sample_sizes[h] < 1 || sample_sizes[h] > s->units[h].size()) {
      std::ostringstream os;
      os << "stratum " << h << " needs 1 <= n_h <= N_h, got n_h=" << sample_sizes[h]
         << ", N_h=" << s->units[h].size();
      throw ValidationError(os.str());
    }
    s->sample += sample_sizes[h];
  }
  s->stratum_of = std::move(stratum_of_unit);
  s->stratum_sample = std::move(sample_sizes);
  return SamplingDesign(std::move(s));
}

DesignKind SamplingDesign::kind() const noexcept { return state_->kind; }
std::size_t SamplingDesign::population_size() const noexcept { return state_->population; }
std::size_t SamplingDesign::sample_size() const noexcept { return state_->sample; }
std::size_t SamplingDesign::stratum_count() const noexcept { return state_->units.size(); }

std::size_t SamplingDesign::stratum_of(std::size_t k) const {
  check_unit(k);
  return state_->stratum_of[k];
}

std::span<const std::size_t> SamplingDesign::stratum_units(std::size_t h) const {
  return state_->units.at(h);
}

std::size_t SamplingDesign::stratum_sample_size(std::size_t h) const {
  return state_->stratum_sample.at(h);
}

void SamplingDesign::check_unit(std::size_t k) const {
  if (k >= state_->population) {
    std::ostringstream os;
    os << "unit index " << k << " out of range for population of size " << state_->population;
    throw ValidationError(os.str());
  }
}

double SamplingDesign::first_order(std::size_t k) const {
  check_unit(k);
  const std::size_t h = state_->stratum_of[k];
  return static_cast<double>(state_->stratum_sample[h]) /
             static_cast<double>(state_->units[h].size()) +
         first_offset_;
}

double SamplingDesign::second_order(std::size_t k, std::size_t l) const {
  check_unit(k);
  check_unit(l);
  if (k == l) return first_order(k);
  const std::size_t hk = state_->stratum_of[k];
  const std::size_t hl = state_->stratum_of[l];
  double p;
  if (hk == hl) {
    p = within_pair_probability(state_->units[hk].size(), state_->stratum_sample[hk]);
  } else {
    p = (static_cast<double>(state_->stratum_sample[hk]) / static_cast<double>(state_->units[hk].size())) *
        (static_cast<double>(state_->stratum_sample[hl]) / static_cast<double>(state_->units[hl].size()));
  }
  return p + second_offset_;
}

double SamplingDesign::delta(std::size_t k, std::size_t l) const {
  return second_order(k, l) - first_order(k) * first_order(l);
}

double SamplingDesign::min_first_order() const {
  double m = 1.0;
  for (std::size_t h = 0; h < stratum_count(); ++h) m = std::min(m, first_order(state_->units[h][0]));
  return m;
}

double SamplingDesign::min_second_order() const {
  double m = 1.0;
  for (std::size_t h = 0; h < stratum_count(); ++h) {
    const auto& uh = state_->units[h];
    if (uh.size() >= 2) m = std::min(m, second_order(uh[0], uh[1]));
    for (std::size_t g = h + 1; g < stratum_count(); ++g)
      m = std::min(m, second_order(uh[0], state_->units[g][0]));
  }
  return m;
}

SamplingDesign SamplingDesign::with_declared_offsets(double first_order_offset,
                                                     double second_order_offset) const {
  SamplingDesign copy = *this;
  copy.first_offset_ += first_order_offset;
  copy.second_offset_ += second_order_offset;
  return copy;
}

Sample SamplingDesign::draw(RngStream& rng) const {
  std::vector<std::size_t> indices;
  indices.reserve(state_->sample);
  for (std::size_t h = 0; h < state_->units.size(); ++h) {
    const auto& uh = state_->units[h];
    for (std::size_t pos : choose_positions(uh.size(), state_->stratum_sample[h], rng))
      indices.push_back(uh[pos]);
  }
  return Sample(*this, std::move(indices));
}

Sample::Sample(SamplingDesign design, std::vector<std::size_t> indices)
    : design_(std::move(design)), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw ValidationError("sample contains duplicate unit indices");
  if (!indices_.empty() && indices_.back() >= design_.population_size()) {
    std::ostringstream os;
    os << "sample index " << indices_.back() << " out of range for population of size "
       << design_.population_size();
    throw ValidationError(os.str());
  }
  if (indices_.size() != design_.sample_size()) {
    std::ostringstream os;
    os << "sample has " << indices_.size() << " units but the design fixes n = "
       << design_.sample_size();
    throw ValidationError(os.str());
  }
  if (design_.stratum_count() > 1) {
    std::vector<std::size_t> counts(design_.stratum_count(), 0);
    for (std::size_t k : indices_) ++counts[design_.stratum_of(k)];
    for (std::size_t h = 0; h < counts.size(); ++h)
      if (counts[h] != design_.stratum_sample_size(h)) {
        std::ostringstream os;
        os << "sample has " << counts[h] << " units in stratum " << h << " but the design fixes n_h = "
           << design_.stratum_sample_size(h);
        throw ValidationError(os.str());
      }
  }
}

bool Sample::contains(std::size_t k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

std::vector<double> Sample::inclusion_probabilities() const {
  std::vector<double> pi(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) pi[i] = design_.first_order(indices_[i]);
  return pi;
}

std::uint64_t sample_space_size(const SamplingDesign& design) {
  std::uint64_t total = 1;
  for (std::size_t h = 0; h < design.stratum_count(); ++h)
    total = saturating_mul(total, binomial(design.stratum_units(h).size(), design.stratum_sample_size(h)));
  return total;
}

namespace {

std::vector<std::vector<std::size_t>> combinations(std::span<const std::size_t> pool, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pos(k);
  for (std::size_t i = 0; i < k; ++i) pos[i] = i;
  const std::size_t n = pool.size();
  for (;;) {
    std::vector<std::size_t> combo(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = pool[pos[i]];
    out.push_back(std::move(combo));
    // Advance to the next lexicographic combination.
    std::size_t i = k;
    while (i > 0 && pos[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++pos[i - 1];
    for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
  return out;
}

}  // namespace

std::vector<WeightedSample> enumerate_samples(const SamplingDesign& design, std::uint64_t cap) {
  const std::uint64_t total = sample_space_size(design);
  if (total > cap) throw EnumerationCapError(total, cap);

  // Cartesian product of within-stratum combinations; every sample is
  // equally likely, with probability prod_h 1/C(N_h, n_h) = 1/total.
  std::vector<std::vector<std::size_t>> partial{{}};
  for (std::size_t h = 0; h < design.stratum_count(); ++h) {
    const auto combos = combinations(design.stratum_units(h), design.stratum_sample_size(h));
    std::vector<std::vector<std::size_t>> next;
    next.reserve(partial.size() * combos.size());
    for (const auto& head : partial)
      for (const auto& c : combos) {
        auto merged = head;
        merged.insert(merged.end(), c.begin(), c.end());
        next.push_back(std::move(merged));
      }
    partial = std::move(next);
  }

  const double p = 1.0 / static_cast<double>(total);
  std::vector<WeightedSample> out;
  out.reserve(partial.size());
  for (auto& idx : partial) out.push_back({Sample(design, std::move(idx)), p});
  return out;
}

}  // namespace fdsurvey
