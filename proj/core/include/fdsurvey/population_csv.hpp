#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdsurvey/curve_model.hpp"

namespace fdsurvey {

/// Raw cells of a comma-separated file with a header row.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of the named column; throws ValidationError if absent.
  std::size_t column_index(const std::string& name) const;
  std::vector<std::string> column(const std::string& name) const;
};

/// Splits on commas, trims surrounding whitespace, skips blank lines.
/// Every data row must have as many cells as the header.
CsvTable read_csv_table(std::istream& in, const std::string& source = "<stream>");

/// Builds a population from a table laid out as one row per unit: D curve
/// columns labelled `t=<time>` (which define the grid, in order), followed by
/// auxiliary columns. Columns named in `label_columns` (e.g. a stratum label)
/// are skipped. Parse errors cite the source line.
FunctionalPopulation population_from_table(const CsvTable& table,
                                           const std::vector<std::string>& label_columns = {});

FunctionalPopulation read_population_csv(const std::filesystem::path& path,
                                         const std::vector<std::string>& label_columns = {});

void write_population_csv(std::ostream& out, const FunctionalPopulation& pop);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict decimal parse of a whole cell; throws ValidationError on failure.
double parse_double(const std::string& text, const std::string& context);

}  // namespace fdsurvey
