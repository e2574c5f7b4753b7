#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmsim::cli {

class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string usage) : std::runtime_error(what), usage_(std::move(usage)) {}
  const std::string& usage() const { return usage_; }

 private:
  std::string usage_;
};

enum class Command { Localize, Navigate, Sweep, Audit };

struct RunConfig {
  Command command = Command::Navigate;
  std::filesystem::path scenario_path;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::filesystem::path output_dir = "results";
  std::vector<std::string> overrides;
  std::size_t jobs = 1;
  std::size_t trace_files = 1;
  std::vector<std::size_t> n_values;
  double radius = 45.0;
  bool ellipse_sqrt = false;
  std::filesystem::path trace_path;

  bool show_help = false;
  std::string help_text;
};

/// "3..12" or "3,5,9" (or a mix: "3..5,9").
std::vector<std::size_t> parse_n_values(const std::string& spec);

/// Throws UsageError on unknown commands/flags or missing required options.
/// `--help` yields a config with show_help set. The seed falls back to
/// SWARMSIM_SEED when --seed is absent.
RunConfig parse_args(int argc, const char* const* argv);

/// Runs the command; returns the process exit status.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swarmsim::cli
