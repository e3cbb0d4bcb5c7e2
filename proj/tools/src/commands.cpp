#include "fdsurvey_cli/commands.hpp"

#include <fstream>
#include <sstream>

#include "fdsurvey/bands.hpp"
#include "fdsurvey/covariance.hpp"
#include "fdsurvey/error.hpp"
#include "fdsurvey/estimators.hpp"
#include "fdsurvey/export.hpp"
#include "fdsurvey/montecarlo.hpp"
#include "fdsurvey/oracle.hpp"
#include "fdsurvey/population_csv.hpp"
#include "fdsurvey/rng.hpp"

namespace fdsurvey::cli {

namespace {

std::string index_list(const std::vector<std::size_t>& idx, std::size_t base) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(idx[i] + base);
  }
  return out;
}

Sample choose_sample(const RunConfig& cfg, const SamplingDesign& design, std::uint64_t seed) {
  if (cfg.design.sample_file) return Sample(design, read_sample_file(*cfg.design.sample_file));
  RngStream rng(seed, StreamPurpose::kSampleDraw, 0);
  return design.draw(rng);
}

Metadata run_metadata(const std::string& command, const RunConfig& cfg, std::uint64_t seed,
                      const Setup& setup) {
  Metadata meta = {
      {"command", command},
      {"seed", std::to_string(seed)},
      {"config", cfg.source.string()},
      {"estimator", std::string(to_string(cfg.estimator.kind))},
      {"population_size", std::to_string(setup.population.size())},
      {"grid_points", std::to_string(setup.population.grid_size())},
      {"aux_dim", std::to_string(setup.population.aux_dim())},
      {"design", setup.design.kind() == DesignKind::kSrswor ? "srswor" : "stratified"},
  };
  return meta;
}

void add_estimate_metadata(Metadata& meta, const MeanEstimate& est) {
  if (est.kind == EstimatorKind::kModelAssisted)
    meta.emplace_back("floor", est.floor ? format_double(*est.floor) : std::string("none"));
  meta.emplace_back("sample_size", std::to_string(est.sample.size()));
  meta.emplace_back("sample", index_list(est.sample.indices(), 1));
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

CommandResult cmd_estimate(const RunConfig& cfg, std::uint64_t seed) {
  const Setup setup = build_setup(cfg, seed);
  const Sample sample = choose_sample(cfg, setup.design, seed);
  const MeanEstimate est = estimate_mean(setup.population, sample, cfg.estimator);

  Metadata meta = run_metadata("estimate", cfg, seed, setup);
  add_estimate_metadata(meta, est);

  CommandResult result;
  result.files["estimate.csv"] =
      render([&](std::ostream& os) { write_curve_csv(os, setup.population.grid(), est.curve); });
  result.files["estimate_meta.txt"] = render([&](std::ostream& os) { write_metadata(os, meta); });
  result.summary = "estimated " + std::string(to_string(est.kind)) + " mean from " +
                   std::to_string(sample.size()) + " units (seed " + std::to_string(seed) + ")\n";
  return result;
}

CommandResult cmd_bands(const RunConfig& cfg, std::uint64_t seed, std::size_t workers) {
  const Setup setup = build_setup(cfg, seed);
  const auto& grid = setup.population.grid();
  const Sample sample = choose_sample(cfg, setup.design, seed);
  const MeanEstimate est = estimate_mean(setup.population, sample, cfg.estimator);
  const CovarianceEstimate cov = estimated_covariance(setup.population, sample, cfg.estimator, est.curve);

  ConfidenceBand band;
  try {
    band = build_band(est, cov, sample.size(), cfg.band.alpha, cfg.band.n_sims,
                      derive_seed(seed, StreamPurpose::kBandSimulation, 0), workers);
  } catch (const DegenerateVarianceError& e) {
    std::ostringstream os;
    os << e.what() << " (t = " << format_double(grid[e.grid_index()]) << ")";
    throw NumericalError(os.str());
  }

  Metadata meta = run_metadata("bands", cfg, seed, setup);
  add_estimate_metadata(meta, est);
  for (auto& kv : band_metadata(band)) meta.push_back(std::move(kv));

  CommandResult result;
  result.files["band.csv"] = render([&](std::ostream& os) { write_band_csv(os, grid, band); });
  result.files["band_meta.txt"] = render([&](std::ostream& os) { write_metadata(os, meta); });
  result.files["covariance.csv"] =
      render([&](std::ostream& os) { write_matrix_csv(os, grid, cov.matrix.matrix()); });
  result.summary = "band at alpha=" + format_double(band.alpha) + ": c_alpha=" + format_double(band.c_alpha) +
                   " (seed " + std::to_string(seed) + ")\n";
  return result;
}

CommandResult cmd_montecarlo(const RunConfig& cfg, std::uint64_t seed, std::size_t workers) {
  std::vector<std::size_t> sizes = cfg.campaign.sample_sizes;
  const Setup base = build_setup(cfg, seed, sizes.empty() ? std::nullopt : std::optional(sizes.front()));
  const auto& pop = base.population;
  if (sizes.empty()) sizes.push_back(base.design.sample_size());
  for (std::size_t n : sizes) {
    if (n > pop.size()) {
      std::ostringstream os;
      os << cfg.source.string() << ": campaign sample size " << n << " exceeds population size " << pop.size();
      throw ValidationError(os.str());
    }
  }

  std::vector<MonteCarloReport> reports;
  CommandResult result;
  Metadata meta = run_metadata("montecarlo", cfg, seed, base);
  meta.emplace_back("replicates", std::to_string(cfg.campaign.replicates));
  meta.emplace_back("coverage", cfg.campaign.coverage ? "true" : "false");
  if (cfg.campaign.coverage) {
    meta.emplace_back("alpha", format_double(cfg.band.alpha));
    meta.emplace_back("n_sims", std::to_string(cfg.band.n_sims));
  }

  const auto& grid = pop.grid();
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const SamplingDesign design =
        base.design.kind() == DesignKind::kSrswor ? SamplingDesign::srswor(pop.size(), sizes[j]) : base.design;
    CampaignConfig cc;
    cc.estimator = cfg.estimator;
    cc.replicates = cfg.campaign.replicates;
    cc.compute_coverage = cfg.campaign.coverage;
    cc.alpha = cfg.band.alpha;
    cc.n_sims = cfg.band.n_sims;
    cc.master_seed = derive_seed(seed, StreamPurpose::kGeneric, j + 1);
    cc.workers = workers;

    MonteCarloReport report = run_campaign(pop, design, cc);
    const auto target = target_covariance(pop, design, cfg.estimator.kind);
    const std::string tag = "_n" + std::to_string(design.sample_size());

    result.files["gamma_emp" + tag + ".csv"] =
        render([&](std::ostream& os) { write_matrix_csv(os, grid, report.gamma_emp.matrix.matrix()); });
    result.files["gamma_target" + tag + ".csv"] =
        render([&](std::ostream& os) { write_matrix_csv(os, grid, target.matrix.matrix()); });
    result.files["approx_error" + tag + ".csv"] = render([&](std::ostream& os) {
      write_matrix_csv(os, grid, report.gamma_emp.matrix.matrix() - target.matrix.matrix());
    });
    if (report.first_estimate) {
      result.files["estimate_error" + tag + ".csv"] = render([&](std::ostream& os) {
        write_matrix_csv(os, grid, target.matrix.matrix() - report.first_estimate->matrix.matrix());
      });
    }
    meta.emplace_back("campaign_seed" + tag, std::to_string(cc.master_seed));
    meta.emplace_back("failed_replicates" + tag, index_list(report.failed_replicates, 0));
    meta.emplace_back("excluded_replicates" + tag, index_list(report.excluded_replicates, 0));
    if (cfg.campaign.coverage)
      meta.emplace_back("degenerate_replicates" + tag, index_list(report.degenerate_replicates, 0));
    reports.push_back(std::move(report));
  }

  result.files["report.txt"] = render([&](std::ostream& os) { write_report_table(os, reports); });
  result.files["report.csv"] = render([&](std::ostream& os) { write_report_csv(os, reports); });
  result.files["relative_errors.csv"] = render([&](std::ostream& os) { write_relative_errors_csv(os, reports); });
  result.files["montecarlo_meta.txt"] = render([&](std::ostream& os) { write_metadata(os, meta); });
  result.summary = result.files["report.txt"];
  return result;
}

CommandResult cmd_oracle_check(const RunConfig& cfg, std::uint64_t seed) {
  Setup setup = build_setup(cfg, seed);
  SamplingDesign design = setup.design;
  if (cfg.oracle.first_order_offset != 0.0 || cfg.oracle.second_order_offset != 0.0)
    design = design.with_declared_offsets(cfg.oracle.first_order_offset, cfg.oracle.second_order_offset);

  OracleOptions options;
  options.cap = cfg.oracle.cap;
  options.tolerance = cfg.oracle.tolerance;
  const OracleReport report = run_oracle_checks(setup.population, design, options);

  CommandResult result;
  result.summary = render([&](std::ostream& os) { write_oracle_report(os, report); });
  Metadata meta = run_metadata("oracle-check", cfg, seed, setup);
  meta.emplace_back("sample_size", std::to_string(design.sample_size()));
  meta.emplace_back("first_order_offset", format_double(cfg.oracle.first_order_offset));
  meta.emplace_back("second_order_offset", format_double(cfg.oracle.second_order_offset));
  result.files["oracle.txt"] = result.summary;
  result.files["oracle_meta.txt"] = render([&](std::ostream& os) { write_metadata(os, meta); });
  result.exit_code = report.all_passed() ? kExitOk : kExitOracleFailure;
  return result;
}

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ValidationError("cannot write " + path.string());
  }
}

}  // namespace fdsurvey::cli
