#pragma once

// Subcommand dispatch for the command-line tool. Kept in a library so tests
// can run commands in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sivrelax/cli/config.hpp"

namespace sivrelax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitFit = 4;

/// Bumped whenever a CSV column layout changes.
inline constexpr int kCsvSchemaVersion = 1;

struct CliOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;  // stdout when absent
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  int threads = 1;
};

const std::vector<std::string>& command_names();

/// One-line description per command, for --help.
std::string command_summary(const std::string& command);

/// Runs one command. Results go to `out` (or a file under out_dir), messages
/// to `err`. Returns an exit code from the constants above.
int run(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Singlet rate coefficient C used when the config does not set one: chosen
/// so the faster T1 mode at the misalignment angle has Arrhenius prefactor
/// 2.10 kHz.
double default_rate_coefficient(const RunConfig& c);

}  // namespace sivrelax::cli
