#include "fdsurvey/curve_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ValidationError("time grid needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw ValidationError("time grid has a non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      std::ostringstream os;
      os << "time grid is not strictly increasing at index " << i;
      throw ValidationError(os.str());
    }
  }
}

TimeGrid TimeGrid::uniform(std::size_t count, double horizon) {
  if (count < 2) throw ValidationError("time grid needs at least two points");
  if (!(horizon > 0.0)) throw ValidationError("time grid horizon must be positive");
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    pts[i] = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
  return TimeGrid(std::move(pts));
}

FunctionalPopulation::FunctionalPopulation(TimeGrid grid, Matrix values, Matrix aux,
                                           std::vector<std::string> aux_names)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      aux_(std::move(aux)),
      aux_names_(std::move(aux_names)) {
  if (values_.rows() == 0) throw ValidationError("population must contain at least one unit");
  if (values_.cols() != grid_.size()) {
    std::ostringstream os;
    os << "curve table has " << values_.cols() << " columns but the grid has " << grid_.size()
       << " points";
    throw ValidationError(os.str());
  }
  if (aux_.rows() != values_.rows()) throw ValidationError("aux table and curve table differ in row count");
  if (aux_.cols() == 0) throw ValidationError("at least one auxiliary variable is required");
  if (!all_finite(values_)) throw ValidationError("curve table has non-finite entries");
  if (!all_finite(aux_)) throw ValidationError("aux table has non-finite entries");
  if (aux_names_.empty()) {
    for (std::size_t j = 0; j < aux_.cols(); ++j) aux_names_.push_back("x" + std::to_string(j + 1));
  } else if (aux_names_.size() != aux_.cols()) {
    throw ValidationError("aux name count does not match aux column count");
  }
}

std::vector<double> FunctionalPopulation::aux_totals() const {
  std::vector<double> totals(aux_.cols(), 0.0);
  for (std::size_t k = 0; k < aux_.rows(); ++k) {
    auto x = aux_.row(k);
    for (std::size_t j = 0; j < x.size(); ++j) totals[j] += x[j];
  }
  return totals;
}

FunctionalPopulation FunctionalPopulation::with_values(Matrix values) const {
  return FunctionalPopulation(grid_, std::move(values), aux_, aux_names_);
}

double interpolate(std::span<const double> curve, const TimeGrid& grid, double t) {
  if (curve.size() != grid.size()) throw ValidationError("curve length does not match grid");
  if (!(t >= grid.front() && t <= grid.back())) {
    std::ostringstream os;
    os << "time " << t << " is outside the grid span [" << grid.front() << ", " << grid.back()
       << "]";
    throw DomainError(os.str());
  }
  const auto pts = grid.points();
  // First grid point strictly greater than t; the bracketing interval ends there.
  auto upper = std::upper_bound(pts.begin(), pts.end(), t);
  if (upper == pts.end()) return curve.back();
  const std::size_t i = static_cast<std::size_t>(upper - pts.begin()) - 1;
  if (t == pts[i]) return curve[i];
  const double slope = (curve[i + 1] - curve[i]) / (pts[i + 1] - pts[i]);
  return curve[i] + slope * (t - pts[i]);
}

std::vector<double> population_mean(const FunctionalPopulation& pop) {
  std::vector<double> mean(pop.grid_size(), 0.0);
  for (std::size_t k = 0; k < pop.size(); ++k) {
    auto y = pop.curve(k);
    for (std::size_t i = 0; i < y.size(); ++i) mean[i] += y[i];
  }
  for (double& m : mean) m /= static_cast<double>(pop.size());
  return mean;
}

}  // namespace fdsurvey
