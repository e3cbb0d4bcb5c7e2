#include "fdsurvey_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fdsurvey/error.hpp"
#include "fdsurvey/population_csv.hpp"
#include "fdsurvey/rng.hpp"
#include "fdsurvey/synthetic.hpp"

namespace fdsurvey::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"input",
       {"population", "labels", "synthetic", "units", "grid_points", "horizon", "correlation", "kernel",
        "residual_variance", "length_scale", "period", "dispersion", "intercept_only", "strata"}},
      {"design", {"kind", "n", "stratum_column", "stratum_sizes", "sample_file"}},
      {"estimator", {"kind", "floor"}},
      {"band", {"alpha", "n_sims"}},
      {"campaign", {"replicates", "sample_sizes", "coverage"}},
      {"oracle", {"cap", "tolerance", "first_order_offset", "second_order_offset"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::filesystem::path source) : tree_(tree), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ValidationError(source_.string() + ": " + key + ": " + message);
  }

  std::optional<std::string> get(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    std::string s = *v;
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::optional<double> number(const std::string& key) const {
    auto s = get(key);
    if (!s) return std::nullopt;
    try {
      return parse_double(*s, source_.string() + ": " + key);
    } catch (const ValidationError& e) {
      throw ValidationError(e.what());
    }
  }

  std::optional<std::uint64_t> count(const std::string& key) const {
    auto s = get(key);
    if (!s) return std::nullopt;
    return parse_count(key, *s);
  }

  std::optional<bool> flag(const std::string& key) const {
    auto s = get(key);
    if (!s) return std::nullopt;
    std::string v = *s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(key, "expected true or false, got '" + *s + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    auto s = get(key);
    if (!s) return out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) fail(key, "empty list item");
      out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  }

  std::uint64_t parse_count(const std::string& key, const std::string& text) const {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
      fail(key, "expected a non-negative integer, got '" + text + "'");
    return v;
  }

  std::filesystem::path path(const std::string& key) const {
    std::filesystem::path p = *get(key);
    if (p.is_relative()) p = source_.parent_path() / p;
    return p;
  }

 private:
  const pt::ptree& tree_;
  std::filesystem::path source_;
};

void require(bool ok, const Reader& r, const std::string& key, const std::string& message) {
  if (!ok) r.fail(key, message);
}

}  // namespace

EstimatorKind parse_estimator_kind(const std::string& text) {
  if (text == "ht" || text == "horvitz_thompson") return EstimatorKind::kHorvitzThompson;
  if (text == "hajek") return EstimatorKind::kHajek;
  if (text == "model_assisted" || text == "ma") return EstimatorKind::kModelAssisted;
  if (text == "difference") return EstimatorKind::kDifference;
  throw ValidationError("unknown estimator kind '" + text +
                        "' (expected ht, hajek, model_assisted or difference)");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << source.string() << ":" << e.line() << ": " << e.message();
    throw ValidationError(os.str());
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ValidationError(source.string() + ": key '" + section + "' outside a section");
      throw ValidationError(source.string() + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key))
        throw ValidationError(source.string() + ": unknown key '" + key + "' in [" + section + "]");
    }
  }

  const Reader r(tree, source);
  RunConfig cfg;
  cfg.source = source;

  // [input]
  const bool synthetic = r.flag("input.synthetic").value_or(false);
  if (r.get("input.population")) {
    if (synthetic) r.fail("input", "give either population or synthetic, not both");
    cfg.input.population = r.path("input.population");
    for (const char* k : {"units", "grid_points", "horizon", "correlation", "kernel", "residual_variance",
                          "length_scale", "period", "dispersion", "intercept_only", "strata"}) {
      if (r.get(std::string("input.") + k))
        r.fail(std::string("input.") + k, "only valid for a synthetic population");
    }
  } else if (synthetic) {
    SyntheticSpec s;
    s.units = r.count("input.units").value_or(s.units);
    s.grid_points = r.count("input.grid_points").value_or(s.grid_points);
    s.horizon = r.number("input.horizon").value_or(s.horizon);
    s.correlation = r.number("input.correlation").value_or(s.correlation);
    s.kernel = r.get("input.kernel").value_or(s.kernel);
    s.residual_variance = r.number("input.residual_variance");
    s.length_scale = r.number("input.length_scale");
    s.period = r.number("input.period").value_or(s.period);
    s.dispersion = r.number("input.dispersion").value_or(s.dispersion);
    s.intercept_only = r.flag("input.intercept_only").value_or(false);
    s.strata = r.count("input.strata").value_or(1);
    require(s.units >= 2, r, "input.units", "must be at least 2");
    require(s.grid_points >= 2, r, "input.grid_points", "must be at least 2");
    require(s.horizon > 0.0, r, "input.horizon", "must be positive");
    require(s.correlation > 0.0 && s.correlation < 1.0, r, "input.correlation", "must lie in (0, 1)");
    require(s.kernel == "exponential" || s.kernel == "white" || s.kernel == "periodic", r, "input.kernel",
            "expected exponential, white or periodic");
    require(!s.residual_variance || *s.residual_variance >= 0.0, r, "input.residual_variance",
            "must be >= 0");
    require(!s.length_scale || *s.length_scale > 0.0, r, "input.length_scale", "must be positive");
    require(s.period > 0.0, r, "input.period", "must be positive");
    require(s.dispersion >= 0.0, r, "input.dispersion", "must be >= 0");
    require(s.strata >= 1 && s.strata <= s.units, r, "input.strata", "must lie in [1, units]");
    cfg.input.synthetic = s;
  } else {
    r.fail("input", "set either population = <csv> or synthetic = true");
  }
  cfg.input.label_columns = r.list("input.labels");

  // [design]
  cfg.design.kind = r.get("design.kind").value_or("srswor");
  require(cfg.design.kind == "srswor" || cfg.design.kind == "stratified", r, "design.kind",
          "expected srswor or stratified");
  if (auto n = r.count("design.n")) {
    require(*n >= 1, r, "design.n", "must be at least 1");
    cfg.design.sample_size = *n;
  }
  cfg.design.stratum_column = r.get("design.stratum_column").value_or("");
  for (const auto& item : r.list("design.stratum_sizes")) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0)
      r.fail("design.stratum_sizes", "expected label:size items, got '" + item + "'");
    const auto size = r.parse_count("design.stratum_sizes", item.substr(colon + 1));
    require(size >= 1, r, "design.stratum_sizes", "stratum sample sizes must be at least 1");
    cfg.design.stratum_sizes.emplace_back(item.substr(0, colon), size);
  }
  if (r.get("design.sample_file")) cfg.design.sample_file = r.path("design.sample_file");
  if (cfg.design.kind == "stratified") {
    require(!cfg.design.stratum_sizes.empty(), r, "design.stratum_sizes", "required for a stratified design");
    require(!cfg.design.sample_size, r, "design.n", "not used by a stratified design (use stratum_sizes)");
    if (cfg.input.population)
      require(!cfg.design.stratum_column.empty(), r, "design.stratum_column",
              "required for a stratified design on a CSV population");
  } else {
    require(cfg.design.stratum_sizes.empty(), r, "design.stratum_sizes", "only valid for a stratified design");
  }

  // [estimator]
  if (auto kind = r.get("estimator.kind")) {
    try {
      cfg.estimator.kind = parse_estimator_kind(*kind);
    } catch (const ValidationError& e) {
      r.fail("estimator.kind", e.what());
    }
  }
  if (auto floor = r.get("estimator.floor"); floor && *floor != "default") {
    const double a = *r.number("estimator.floor");
    require(a >= 0.0, r, "estimator.floor", "must be >= 0 (0 disables the floor)");
    cfg.estimator.floor = a;
  }

  // [band]
  cfg.band.alpha = r.number("band.alpha").value_or(cfg.band.alpha);
  require(cfg.band.alpha > 0.0 && cfg.band.alpha < 1.0, r, "band.alpha", "must lie in (0, 1)");
  cfg.band.n_sims = r.count("band.n_sims").value_or(cfg.band.n_sims);
  require(cfg.band.n_sims >= 100, r, "band.n_sims", "must be at least 100");

  // [campaign]
  cfg.campaign.replicates = r.count("campaign.replicates").value_or(cfg.campaign.replicates);
  require(cfg.campaign.replicates >= 2, r, "campaign.replicates", "must be at least 2");
  for (const auto& item : r.list("campaign.sample_sizes")) {
    const auto n = r.parse_count("campaign.sample_sizes", item);
    require(n >= 1, r, "campaign.sample_sizes", "sample sizes must be at least 1");
    cfg.campaign.sample_sizes.push_back(n);
  }
  require(cfg.campaign.sample_sizes.empty() || cfg.design.kind == "srswor", r, "campaign.sample_sizes",
          "only valid with an srswor design");
  cfg.campaign.coverage = r.flag("campaign.coverage").value_or(false);

  // [oracle]
  cfg.oracle.cap = r.count("oracle.cap").value_or(cfg.oracle.cap);
  require(cfg.oracle.cap >= 1, r, "oracle.cap", "must be at least 1");
  cfg.oracle.tolerance = r.number("oracle.tolerance").value_or(cfg.oracle.tolerance);
  require(cfg.oracle.tolerance > 0.0, r, "oracle.tolerance", "must be positive");
  cfg.oracle.first_order_offset = r.number("oracle.first_order_offset").value_or(0.0);
  cfg.oracle.second_order_offset = r.number("oracle.second_order_offset").value_or(0.0);

  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return parse_config(in, path);
}

RunConfig default_oracle_config() {
  RunConfig cfg;
  cfg.source = "<default oracle fixture>";
  SyntheticSpec s;
  s.units = 5;
  s.grid_points = 4;
  cfg.input.synthetic = s;
  cfg.design.sample_size = 2;
  return cfg;
}

std::vector<std::size_t> read_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open sample file " + path.string());
  std::vector<std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t v = 0;
      const auto* end = tok.data() + tok.size();
      auto [ptr, ec] = std::from_chars(tok.data(), end, v);
      if (ec != std::errc() || ptr != end || v == 0) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": expected a 1-based unit index, got '" << tok << "'";
        throw ValidationError(os.str());
      }
      out.push_back(v - 1);
    }
  }
  if (out.empty()) throw ValidationError(path.string() + ": no unit indices");
  return out;
}

namespace {

FunctionalPopulation synthetic_population(const SyntheticSpec& s, std::uint64_t seed) {
  const TimeGrid grid = TimeGrid::uniform(s.grid_points, s.horizon);
  auto model = desk_scale_config(grid, s.correlation, derive_seed(seed, StreamPurpose::kGeneric, 0));
  double variance = std::visit([](const auto& k) { return k.variance; }, model.kernel);
  if (s.residual_variance) variance = *s.residual_variance;
  const double length = s.length_scale.value_or(0.1 * s.horizon);
  if (s.kernel == "white") model.kernel = WhiteNoiseKernel{variance};
  else if (s.kernel == "periodic") model.kernel = PeriodicExponentialKernel{variance, length, s.period, 1.0, 0.5};
  else model.kernel = ExponentialKernel{variance, length};
  model.unit_scale_dispersion = s.dispersion;
  if (s.intercept_only) {
    model.aux.intercept_only = true;
    Matrix beta(1, grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) beta(0, i) = model.beta_curves(0, i);
    model.beta_curves = std::move(beta);
  }
  return generate_population(model, s.units, grid);
}

}  // namespace

Setup build_setup(const RunConfig& cfg, std::uint64_t seed, std::optional<std::size_t> sample_size) {
  std::optional<FunctionalPopulation> pop;
  std::vector<std::string> labels;  // per unit, stratified designs only

  if (cfg.input.population) {
    std::ifstream in(*cfg.input.population);
    if (!in) throw ValidationError("cannot open population file " + cfg.input.population->string());
    const auto table = read_csv_table(in, cfg.input.population->string());
    auto skip = cfg.input.label_columns;
    if (!cfg.design.stratum_column.empty()) {
      labels = table.column(cfg.design.stratum_column);
      if (std::find(skip.begin(), skip.end(), cfg.design.stratum_column) == skip.end())
        skip.push_back(cfg.design.stratum_column);
    }
    pop = population_from_table(table, skip);
  } else {
    const auto& s = *cfg.input.synthetic;
    pop = synthetic_population(s, seed);
    if (cfg.design.kind == "stratified") {
      labels.resize(s.units);
      for (std::size_t k = 0; k < s.units; ++k) labels[k] = std::to_string(k * s.strata / s.units);
    }
  }

  const std::size_t big_n = pop->size();
  if (cfg.design.kind == "srswor") {
    const std::size_t n = sample_size ? *sample_size : cfg.design.sample_size.value_or(0);
    if (n == 0) throw ValidationError(cfg.source.string() + ": design.n is required");
    if (n > big_n) {
      std::ostringstream os;
      os << cfg.source.string() << ": sample size " << n << " exceeds population size " << big_n;
      throw ValidationError(os.str());
    }
    return {std::move(*pop), SamplingDesign::srswor(big_n, n), {}};
  }

  // Strata are numbered in the order their sizes are listed.
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> sizes;
  std::vector<std::string> names;
  for (const auto& [label, size] : cfg.design.stratum_sizes) {
    if (!index.emplace(label, sizes.size()).second)
      throw ValidationError(cfg.source.string() + ": stratum '" + label + "' listed twice");
    sizes.push_back(size);
    names.push_back(label);
  }
  std::vector<std::size_t> stratum_of(big_n);
  for (std::size_t k = 0; k < big_n; ++k) {
    const auto it = index.find(labels[k]);
    if (it == index.end())
      throw ValidationError(cfg.source.string() + ": no sample size given for stratum '" + labels[k] + "'");
    stratum_of[k] = it->second;
  }
  return {std::move(*pop), SamplingDesign::stratified(std::move(stratum_of), std::move(sizes)), names};
}

}  // namespace fdsurvey::cli
