#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace greenberg::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDomain = 3, kIo = 4 };

/// Parsed invocation. Unset optionals fall back to per-subcommand defaults
/// that mirror the published experiments.
struct RunConfig {
  std::string subcommand;
  std::optional<double> v0;
  std::optional<double> v0_min;
  std::optional<double> v0_max;
  std::optional<std::size_t> steps;
  std::optional<double> k0;
  double kj = 1.0;
  std::optional<std::size_t> n;
  std::optional<std::size_t> transient;
  std::optional<std::size_t> keep;
  std::optional<double> tolerance;
  std::optional<double> delta;
  std::optional<double> threshold;
  std::vector<std::string> formats;  ///< empty: subcommand default
  std::optional<std::string> out;    ///< "-" is stdout; otherwise a path stem

  /// ArgumentError on conflicting or non-positive settings.
  void validate() const;
};

/// Parses argv into a RunConfig. Returns nullopt after printing help or a
/// usage error; `exit_code` receives the status to return.
std::optional<RunConfig> parse(int argc, const char* const* argv, std::ostream& out,
                               std::ostream& err, int& exit_code);

/// Executes a validated config. Diagnostics go to `err`; data written to
/// stdout goes to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse + run with exception-to-exit-code mapping.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace greenberg::cli
