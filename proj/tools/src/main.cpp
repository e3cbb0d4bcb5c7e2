#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "fdsurvey/error.hpp"
#include "fdsurvey_cli/commands.hpp"

using namespace fdsurvey;

int main(int argc, char** argv) {
  CLI::App app{"Design-based estimation of mean curves from survey samples"};
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir = "fdsurvey-out";

  app.add_option("command", command, "estimate | bands | montecarlo | oracle-check")
      ->required()
      ->check(CLI::IsMember({"estimate", "bands", "montecarlo", "oracle-check"}));
  app.add_option("--config", config_path, "configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (random if omitted)");
  app.add_option("--workers", workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  if (seed_opt->count() == 0) {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  try {
    cli::RunConfig cfg;
    if (!config_path.empty()) cfg = cli::load_config(config_path);
    else if (command == "oracle-check") cfg = cli::default_oracle_config();
    else throw ValidationError("--config is required for " + command);

    cli::CommandResult result;
    if (command == "estimate") result = cli::cmd_estimate(cfg, seed);
    else if (command == "bands") result = cli::cmd_bands(cfg, seed, workers);
    else if (command == "montecarlo") result = cli::cmd_montecarlo(cfg, seed, workers);
    else result = cli::cmd_oracle_check(cfg, seed);

    cli::write_outputs(out_dir, result.files);
    std::cout << result.summary;
    return result.exit_code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return cli::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitValidation;
  }
}
