#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "config.hpp"

namespace metricflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonHamiltonian = 10;
inline constexpr int kExitAuditFailed = 20;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataError = 65;
inline constexpr int kExitNoInput = 66;
inline constexpr int kExitInternal = 70;

/// The invocation is incomplete (for example a missing observable).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommandOptions {
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> a;
  std::optional<std::string> b;
  std::optional<std::string> c;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;  // JSON document or CSV table
};

CommandResult cmd_classify(const SystemConfig& cfg, const CommandOptions& opts);
CommandResult cmd_evolve_metric(const SystemConfig& cfg, const CommandOptions& opts);
CommandResult cmd_audit(const SystemConfig& cfg, const CommandOptions& opts);
CommandResult cmd_bracket(const SystemConfig& cfg, const CommandOptions& opts);

/// Loads the config and dispatches on `command` (classify, evolve-metric,
/// audit, bracket). Failures become a JSON error object with the matching
/// exit code.
CommandResult run_command(const std::string& command, const std::string& config_path, const CommandOptions& opts);

}  // namespace metricflow::cli
