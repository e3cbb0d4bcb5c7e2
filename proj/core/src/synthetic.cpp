#include "fdsurvey/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fdsurvey/error.hpp"
#include "fdsurvey/rng.hpp"

namespace fdsurvey {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_kernel(const ResidualKernel& kernel) {
  std::visit(Overloaded{
                 [](const WhiteNoiseKernel& k) {
                   if (!(k.variance >= 0.0)) throw ConfigError("white-noise variance must be >= 0");
                 },
                 [](const ExponentialKernel& k) {
                   if (!(k.variance >= 0.0)) throw ConfigError("kernel variance must be >= 0");
                   if (!(k.length_scale > 0.0)) throw ConfigError("kernel length scale must be > 0");
                 },
                 [](const PeriodicExponentialKernel& k) {
                   if (!(k.variance >= 0.0)) throw ConfigError("kernel variance must be >= 0");
                   if (!(k.length_scale > 0.0) || !(k.period > 0.0) || !(k.periodic_length > 0.0))
                     throw ConfigError("kernel length scales and period must be > 0");
                   if (!(k.periodic_weight >= 0.0 && k.periodic_weight <= 1.0))
                     throw ConfigError("periodic weight must lie in [0, 1]");
                 },
             },
             kernel);
}

}  // namespace

double kernel_value(const ResidualKernel& kernel, double t, double r) {
  const double d = std::abs(t - r);
  return std::visit(
      Overloaded{
          [&](const WhiteNoiseKernel& k) { return d == 0.0 ? k.variance : 0.0; },
          [&](const ExponentialKernel& k) { return k.variance * std::exp(-d / k.length_scale); },
          [&](const PeriodicExponentialKernel& k) {
            const double s = std::sin(std::numbers::pi * d / k.period);
            const double periodic = std::exp(-2.0 * s * s / (k.periodic_length * k.periodic_length));
            const double local = std::exp(-d / k.length_scale);
            return k.variance * (k.periodic_weight * periodic + (1.0 - k.periodic_weight) * local);
          },
      },
      kernel);
}

Matrix kernel_matrix(const ResidualKernel& kernel, const TimeGrid& grid) {
  validate_kernel(kernel);
  const std::size_t d = grid.size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      m(i, j) = kernel_value(kernel, grid[i], grid[j]);
      m(j, i) = m(i, j);
    }
  return m;
}

double AuxDistribution::covariate_variance() const noexcept {
  if (intercept_only) return 0.0;
  return level_sd * level_sd +
         past_noise_sd * past_noise_sd / static_cast<double>(std::max<std::size_t>(past_points, 1));
}

FunctionalPopulation generate_population(const SuperpopulationConfig& cfg, std::size_t units,
                                         const TimeGrid& grid) {
  if (units == 0) throw ConfigError("population size must be at least 1");
  const std::size_t d = grid.size();
  const std::size_t p = cfg.aux.dim();
  if (cfg.beta_curves.rows() != p || cfg.beta_curves.cols() != d) {
    std::ostringstream os;
    os << "beta_curves must be " << p << " x " << d << ", got " << cfg.beta_curves.rows() << " x "
       << cfg.beta_curves.cols();
    throw ConfigError(os.str());
  }
  if (!cfg.aux.intercept_only && (cfg.aux.past_points == 0 || !(cfg.aux.level_sd >= 0.0) ||
                                  !(cfg.aux.past_noise_sd >= 0.0)))
    throw ConfigError("invalid auxiliary distribution parameters");
  if (!(cfg.unit_scale_dispersion >= 0.0)) throw ConfigError("unit scale dispersion must be >= 0");

  const auto gamma = SymmetricMatrix(kernel_matrix(cfg.kernel, grid));
  const auto eig = sym_eigen(gamma);
  double scale = 0.0;
  for (double v : eig.values) scale = std::max(scale, std::abs(v));
  if (eig.values.back() < -kPsdTolerance * scale) {
    std::ostringstream os;
    os << "residual kernel is not positive semidefinite on the grid (eigenvalue "
       << eig.values.back() << ")";
    throw ConfigError(os.str());
  }
  // Noise factor V sqrt(max(eta, 0)).
  Matrix factor(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t i = 0; i < d; ++i) factor(i, k) = eig.vectors(i, k) * root;
  }

  Matrix aux(units, p);
  Matrix values(units, d);
  std::vector<double> z(d);
  const double disp = cfg.unit_scale_dispersion;
  for (std::size_t k = 0; k < units; ++k) {
    aux(k, 0) = 1.0;
    if (!cfg.aux.intercept_only) {
      RngStream aux_stream(cfg.seed, StreamPurpose::kAuxiliary, k);
      const double level = cfg.aux.level_mean + cfg.aux.level_sd * aux_stream.normal();
      double past = 0.0;
      for (std::size_t j = 0; j < cfg.aux.past_points; ++j)
        past += level + cfg.aux.past_noise_sd * aux_stream.normal();
      aux(k, 1) = past / static_cast<double>(cfg.aux.past_points);
    }

    RngStream noise(cfg.seed, StreamPurpose::kResidual, k);
    const double unit_scale = disp > 0.0 ? std::exp(disp * noise.normal() - disp * disp) : 1.0;
    for (double& zi : z) zi = noise.normal();

    auto x = aux.row(k);
    auto y = values.row(k);
    for (std::size_t i = 0; i < d; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < p; ++j) mean += x[j] * cfg.beta_curves(j, i);
      double eps = 0.0;
      auto fi = factor.row(i);
      for (std::size_t m = 0; m < d; ++m) eps += fi[m] * z[m];
      y[i] = mean + unit_scale * eps;
    }
  }

  std::vector<std::string> names{"intercept"};
  if (!cfg.aux.intercept_only) names.emplace_back("past_mean");
  return FunctionalPopulation(grid, std::move(values), std::move(aux), std::move(names));
}

SuperpopulationConfig desk_scale_config(const TimeGrid& grid, double target_correlation,
                                        std::uint64_t seed) {
  if (!(target_correlation > 0.0 && target_correlation < 1.0))
    throw ConfigError("target correlation must lie in (0, 1)");
  const std::size_t d = grid.size();
  const double span = grid.back() - grid.front();

  SuperpopulationConfig cfg;
  cfg.seed = seed;
  cfg.beta_curves = Matrix(2, d);
  double min_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    const double s = (grid[i] - grid.front()) / span;
    cfg.beta_curves(0, i) = 1.0 + 0.5 * std::sin(4.0 * std::numbers::pi * s);
    cfg.beta_curves(1, i) = 1.0 + 0.15 * std::sin(2.0 * std::numbers::pi * s);
    min_slope = std::min(min_slope, cfg.beta_curves(1, i));
  }
  const double rho2 = target_correlation * target_correlation;
  const double variance = min_slope * min_slope * cfg.aux.covariate_variance() * (1.0 / rho2 - 1.0);
  cfg.kernel = ExponentialKernel{variance, 0.1 * span};
  return cfg;
}

double aux_response_correlation(const FunctionalPopulation& pop, std::size_t grid_index,
                                std::size_t aux_index) {
  const std::size_t n = pop.size();
  double my = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    my += pop.values()(k, grid_index);
    mx += pop.aux()(k, aux_index);
  }
  my /= static_cast<double>(n);
  mx /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dy = pop.values()(k, grid_index) - my;
    const double dx = pop.aux()(k, aux_index) - mx;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace fdsurvey
