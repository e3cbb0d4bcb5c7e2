#include "fdsurvey/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fdsurvey/error.hpp"
#include "fdsurvey/population_csv.hpp"

namespace fdsurvey {

namespace {

std::string fixed(double v, int width, int precision) {
  if (std::isnan(v)) return std::string(static_cast<std::size_t>(std::max(0, width - 2)), ' ') + "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, precision, v);
  return buf;
}

std::string csv_value(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

}  // namespace

void write_metadata(std::ostream& out, const Metadata& meta) {
  for (const auto& [key, value] : meta) out << key << '=' << value << '\n';
}

void write_curve_csv(std::ostream& out, const TimeGrid& grid, std::span<const double> curve,
                     const std::string& value_name) {
  if (curve.size() != grid.size()) throw ValidationError("curve length does not match the grid");
  out << "t," << value_name << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << format_double(grid[i]) << ',' << format_double(curve[i]) << '\n';
}

void write_matrix_csv(std::ostream& out, const TimeGrid& grid, const Matrix& m) {
  if (m.rows() != grid.size() || m.cols() != grid.size())
    throw ValidationError("matrix does not match the grid");
  out << 't';
  for (std::size_t j = 0; j < grid.size(); ++j) out << ',' << format_double(grid[j]);
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]);
    for (std::size_t j = 0; j < grid.size(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

void write_band_csv(std::ostream& out, const TimeGrid& grid, const ConfidenceBand& band) {
  if (band.center.size() != grid.size()) throw ValidationError("band does not match the grid");
  out << "t,center,lower,upper,sigma_hat\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]) << ',' << format_double(band.center[i]) << ','
        << format_double(band.lower(i)) << ',' << format_double(band.upper(i)) << ','
        << format_double(band.sigma_hat[i]) << '\n';
  }
}

Metadata band_metadata(const ConfidenceBand& band) {
  return {
      {"c_alpha", format_double(band.c_alpha)},
      {"alpha", format_double(band.alpha)},
      {"n_sims", std::to_string(band.n_sims)},
      {"sample_size", std::to_string(band.sample_size)},
      {"band_seed", std::to_string(band.seed)},
  };
}

void write_report_table(std::ostream& out, const std::vector<MonteCarloReport>& reports) {
  out << "     n      RMSE       RB2        VR        q5       q25    Median       q75       q95  coverage\n";
  for (const auto& r : reports) {
    char nbuf[32];
    std::snprintf(nbuf, sizeof nbuf, "%6zu", r.sample_size);
    out << nbuf << fixed(r.rmse, 10, 4) << fixed(r.rb_squared, 10, 4) << fixed(r.vr, 10, 4)
        << fixed(r.er_quantiles.q5, 10, 4) << fixed(r.er_quantiles.q25, 10, 4)
        << fixed(r.er_quantiles.median, 10, 4) << fixed(r.er_quantiles.q75, 10, 4)
        << fixed(r.er_quantiles.q95, 10, 4)
        << fixed(r.coverage ? *r.coverage : std::nan(""), 10, 4) << '\n';
  }
  for (const auto& r : reports) {
    if (!r.excluded_replicates.empty() || !r.failed_replicates.empty() || !r.degenerate_replicates.empty()) {
      out << "n=" << r.sample_size << ": " << r.failed_replicates.size() << " failed, "
          << r.excluded_replicates.size() << " excluded from E_r, " << r.degenerate_replicates.size()
          << " degenerate bands\n";
    }
  }
}

void write_report_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports) {
  out << "n,replicates,estimator,rmse,rb_squared,vr,q5,q25,median,q75,q95,integrated_mse,coverage,"
         "failed,excluded,degenerate\n";
  for (const auto& r : reports) {
    out << r.sample_size << ',' << r.replicates << ',' << to_string(r.estimator) << ','
        << csv_value(r.rmse) << ',' << csv_value(r.rb_squared) << ',' << csv_value(r.vr) << ','
        << csv_value(r.er_quantiles.q5) << ',' << csv_value(r.er_quantiles.q25) << ','
        << csv_value(r.er_quantiles.median) << ',' << csv_value(r.er_quantiles.q75) << ','
        << csv_value(r.er_quantiles.q95) << ',' << csv_value(r.integrated_mse) << ','
        << (r.coverage ? csv_value(*r.coverage) : std::string("NA")) << ','
        << r.failed_replicates.size() << ',' << r.excluded_replicates.size() << ','
        << r.degenerate_replicates.size() << '\n';
  }
}

void write_relative_errors_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports) {
  out << "n,replicate,E_r\n";
  for (const auto& r : reports) {
    // relative_errors skips failed and excluded replicates; recover indices.
    std::size_t next = 0;
    for (std::size_t rep = 0; rep < r.replicates && next < r.relative_errors.size(); ++rep) {
      const auto skipped = [&](const std::vector<std::size_t>& v) {
        return std::binary_search(v.begin(), v.end(), rep);
      };
      if (skipped(r.failed_replicates) || skipped(r.excluded_replicates)) continue;
      out << r.sample_size << ',' << rep << ',' << format_double(r.relative_errors[next++]) << '\n';
    }
  }
}

void write_oracle_report(std::ostream& out, const OracleReport& report) {
  out << "samples enumerated: " << report.sample_count << '\n';
  for (const auto& c : report.checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-40s residual=%.3e tolerance=%.3e ", c.name.c_str(), c.residual,
                  c.tolerance);
    out << buf << (c.passed ? "PASS" : "FAIL");
    if (!c.note.empty()) out << "  (" << c.note << ')';
    out << '\n';
  }
  out << (report.all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

}  // namespace fdsurvey
