#pragma once

#include "ppfa/app/config.hpp"
#include "ppfa/monitoring.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace ppfa::app {

struct CommandOptions
{
  std::filesystem::path data;
  std::filesystem::path config;
  std::filesystem::path model;
  std::filesystem::path out;
  std::filesystem::path trace; // optional training trace table
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

/// Config file (or defaults when no path is given) with --seed/--alpha applied.
RunConfig resolve_config(const CommandOptions& opts);

// Each command throws ppfa::Error on failure and prints a short summary to `log`.
void cmd_train(const CommandOptions& opts, std::ostream& log);
void cmd_score(const CommandOptions& opts, std::ostream& log);
void cmd_select(const CommandOptions& opts, std::ostream& log);
void cmd_simulate(const CommandOptions& opts, std::ostream& log);

void write_report(const std::filesystem::path& path, const MonitorReport& report);
void write_trace(const std::filesystem::path& path, const TrainingTrace& trace);

/// Full command-line entry point. Returns the process exit code; on failure
/// writes "error: <category>" and then the message on a second line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ppfa::app
