#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fdsurvey/matrix.hpp"

namespace fdsurvey {

/// Measurement instants t_1 < ... < t_D shared by every unit. Grids may be
/// non-uniform. By convention t_1 = 0 and t_D = T, but any strictly
/// increasing finite grid is accepted.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// D equally spaced points on [0, horizon].
  static TimeGrid uniform(std::size_t count, double horizon);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const noexcept { return points_[i]; }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  std::span<const double> points() const noexcept { return points_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> points_;
};

/// N discretized curves (rows of `values`, N x D) with their auxiliary
/// vectors (rows of `aux`, N x p). Immutable after construction.
class FunctionalPopulation {
 public:
  FunctionalPopulation(TimeGrid grid, Matrix values, Matrix aux,
                       std::vector<std::string> aux_names = {});

  const TimeGrid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  const Matrix& aux() const noexcept { return aux_; }
  const std::vector<std::string>& aux_names() const noexcept { return aux_names_; }

  std::size_t size() const noexcept { return values_.rows(); }
  std::size_t grid_size() const noexcept { return values_.cols(); }
  std::size_t aux_dim() const noexcept { return aux_.cols(); }

  std::span<const double> curve(std::size_t k) const noexcept { return values_.row(k); }
  std::span<const double> aux_row(std::size_t k) const noexcept { return aux_.row(k); }

  /// sum_{k in U} x_k.
  std::vector<double> aux_totals() const;

  /// Same units and aux, different curve table (e.g. residual curves).
  FunctionalPopulation with_values(Matrix values) const;

 private:
  TimeGrid grid_;
  Matrix values_;
  Matrix aux_;
  std::vector<std::string> aux_names_;
};

/// Piecewise-linear interpolation of grid values at time t; exact at grid
/// points. Throws DomainError when t lies outside [t_1, t_D].
double interpolate(std::span<const double> curve, const TimeGrid& grid, double t);

/// Column-wise mean of the curve table, mu_N(t_i).
std::vector<double> population_mean(const FunctionalPopulation& pop);

}  // namespace fdsurvey
