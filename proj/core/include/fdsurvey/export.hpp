#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdsurvey/bands.hpp"
#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/matrix.hpp"
#include "fdsurvey/montecarlo.hpp"
#include "fdsurvey/oracle.hpp"

namespace fdsurvey {

/// Ordered key=value pairs written one per line.
using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_metadata(std::ostream& out, const Metadata& meta);

/// Columns: t,<value_name>.
void write_curve_csv(std::ostream& out, const TimeGrid& grid, std::span<const double> curve,
                     const std::string& value_name = "estimate");

/// D x D matrix with grid times as the header row and first column.
void write_matrix_csv(std::ostream& out, const TimeGrid& grid, const Matrix& m);

/// Columns: t,center,lower,upper,sigma_hat.
void write_band_csv(std::ostream& out, const TimeGrid& grid, const ConfidenceBand& band);

/// c_alpha, alpha, n_sims, n and seed of a band.
Metadata band_metadata(const ConfidenceBand& band);

/// Fixed-width table: n, RMSE, RB2, VR, E_r quantiles, coverage.
void write_report_table(std::ostream& out, const std::vector<MonteCarloReport>& reports);

/// Same content as write_report_table in CSV form, at full precision.
void write_report_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports);

/// Per-replicate relative errors: columns n,replicate,E_r.
void write_relative_errors_csv(std::ostream& out, const std::vector<MonteCarloReport>& reports);

/// One line per check: name, residual, tolerance, PASS/FAIL, note.
void write_oracle_report(std::ostream& out, const OracleReport& report);

}  // namespace fdsurvey
