#include "fdsurvey/population_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fdsurvey/error.hpp"

namespace fdsurvey {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ValidationError("cannot format number");
  return std::string(buf, end);
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ValidationError(context + ": cannot parse '" + text + "' as a finite number");
  return value;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw ValidationError(source + ": no column named '" + name + "'");
}

std::vector<std::string> CsvTable::column(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

CsvTable read_csv_table(std::istream& in, const std::string& source) {
  CsvTable table;
  table.source = source;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected " << table.header.size() << " fields, found "
         << cells.size();
      throw ValidationError(os.str());
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ValidationError(source + ": empty file (no header row)");
  return table;
}

FunctionalPopulation population_from_table(const CsvTable& table,
                                           const std::vector<std::string>& label_columns) {
  std::vector<double> times;
  std::vector<std::size_t> curve_cols;
  std::vector<std::size_t> aux_cols;
  std::vector<std::string> aux_names;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const std::string& name = table.header[j];
    if (name.rfind("t=", 0) == 0) {
      if (!aux_cols.empty()) {
        throw ValidationError(table.source + ":1: curve column '" + name +
                              "' appears after auxiliary columns");
      }
      times.push_back(parse_double(name.substr(2), table.source + ":1: column '" + name + "'"));
      curve_cols.push_back(j);
      continue;
    }
    bool is_label = false;
    for (const auto& l : label_columns) is_label = is_label || l == name;
    if (is_label) continue;
    aux_cols.push_back(j);
    aux_names.push_back(name);
  }
  for (const auto& l : label_columns) (void)table.column_index(l);
  if (curve_cols.size() < 2) throw ValidationError(table.source + ":1: need at least two 't=<time>' columns");
  if (aux_cols.empty()) throw ValidationError(table.source + ":1: no auxiliary columns");
  if (table.rows.empty()) throw ValidationError(table.source + ": no data rows");

  Matrix values(table.rows.size(), curve_cols.size());
  Matrix aux(table.rows.size(), aux_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = table.source + ":" + std::to_string(table.line_numbers[r]);
    for (std::size_t i = 0; i < curve_cols.size(); ++i)
      values(r, i) = parse_double(row[curve_cols[i]], where + ": column '" + table.header[curve_cols[i]] + "'");
    for (std::size_t j = 0; j < aux_cols.size(); ++j)
      aux(r, j) = parse_double(row[aux_cols[j]], where + ": column '" + table.header[aux_cols[j]] + "'");
  }
  return FunctionalPopulation(TimeGrid(std::move(times)), std::move(values), std::move(aux),
                              std::move(aux_names));
}

FunctionalPopulation read_population_csv(const std::filesystem::path& path,
                                         const std::vector<std::string>& label_columns) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open population file " + path.string());
  return population_from_table(read_csv_table(in, path.string()), label_columns);
}

void write_population_csv(std::ostream& out, const FunctionalPopulation& pop) {
  for (std::size_t i = 0; i < pop.grid_size(); ++i)
    out << (i ? "," : "") << "t=" << format_double(pop.grid()[i]);
  for (const auto& name : pop.aux_names()) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < pop.size(); ++k) {
    auto y = pop.curve(k);
    for (std::size_t i = 0; i < y.size(); ++i) out << (i ? "," : "") << format_double(y[i]);
    for (double x : pop.aux_row(k)) out << ',' << format_double(x);
    out << '\n';
  }
}

}  // namespace fdsurvey
