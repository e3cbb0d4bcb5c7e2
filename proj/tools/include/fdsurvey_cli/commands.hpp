#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "fdsurvey_cli/config.hpp"

namespace fdsurvey::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitOracleFailure = 4,
};

/// Output files of a command, keyed by file name. Commands compute
/// everything in memory first so that a failing run writes nothing.
using OutputFiles = std::map<std::string, std::string>;

struct CommandResult {
  OutputFiles files;
  std::string summary;  // printed to stdout
  int exit_code = kExitOk;
};

CommandResult cmd_estimate(const RunConfig& cfg, std::uint64_t seed);
CommandResult cmd_bands(const RunConfig& cfg, std::uint64_t seed, std::size_t workers);
CommandResult cmd_montecarlo(const RunConfig& cfg, std::uint64_t seed, std::size_t workers);
CommandResult cmd_oracle_check(const RunConfig& cfg, std::uint64_t seed);

/// Creates `dir` if needed and writes every file.
void write_outputs(const std::filesystem::path& dir, const OutputFiles& files);

}  // namespace fdsurvey::cli
