#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdsurvey/curve_model.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/sampling.hpp"

namespace fdsurvey::cli {

/// Parameters of the built-in synthetic population.
struct SyntheticSpec {
  std::size_t units = 2000;
  std::size_t grid_points = 48;
  double horizon = 1.0;
  double correlation = 0.95;
  std::string kernel = "exponential";  // exponential | white | periodic
  std::optional<double> residual_variance;  // overrides the correlation-derived value
  std::optional<double> length_scale;
  double period = 0.25;
  double dispersion = 0.0;
  bool intercept_only = false;
  std::size_t strata = 1;  // contiguous blocks of equal size, labelled 0..H-1
};

struct InputSpec {
  std::optional<std::filesystem::path> population;  // CSV path (relative to the config file)
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::string> label_columns;
};

struct DesignSpec {
  std::string kind = "srswor";  // srswor | stratified
  std::optional<std::size_t> sample_size;
  std::string stratum_column;  // CSV input only
  std::vector<std::pair<std::string, std::size_t>> stratum_sizes;  // label:n_h
  std::optional<std::filesystem::path> sample_file;  // 1-based indices
};

struct BandSpec {
  double alpha = 0.05;
  std::size_t n_sims = 10000;
};

struct CampaignSpec {
  std::size_t replicates = 1000;
  std::vector<std::size_t> sample_sizes;  // empty = the design's n
  bool coverage = false;
};

struct OracleSpec {
  std::uint64_t cap = 1'000'000;
  double tolerance = 1e-10;
  double first_order_offset = 0.0;
  double second_order_offset = 0.0;
};

struct RunConfig {
  std::filesystem::path source;  // the config file, for messages and relative paths
  InputSpec input;
  DesignSpec design;
  EstimatorConfig estimator;
  BandSpec band;
  CampaignSpec campaign;
  OracleSpec oracle;
};

/// Reads an INI-style file with [input], [design], [estimator], [band],
/// [campaign] and [oracle] sections. Unknown sections or keys and
/// out-of-range values raise ValidationError citing the file.
RunConfig parse_config(std::istream& in, const std::filesystem::path& source);
RunConfig load_config(const std::filesystem::path& path);

/// Configuration of the default oracle fixture: N=5, n=2, p=2, D=4.
RunConfig default_oracle_config();

/// Population plus design built from a configuration, with stratum labels
/// when the design is stratified.
struct Setup {
  FunctionalPopulation population;
  SamplingDesign design;
  std::vector<std::string> stratum_labels;
};

/// Loads or generates the population and builds the design. `seed` feeds
/// the synthetic generator. `sample_size` overrides the SRSWOR n.
Setup build_setup(const RunConfig& cfg, std::uint64_t seed,
                  std::optional<std::size_t> sample_size = std::nullopt);

/// Reads whitespace- or comma-separated 1-based unit indices.
std::vector<std::size_t> read_sample_file(const std::filesystem::path& path);

EstimatorKind parse_estimator_kind(const std::string& text);

}  // namespace fdsurvey::cli
