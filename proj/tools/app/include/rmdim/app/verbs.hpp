#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmdim/app/json_io.hpp"
#include "rmdim/metric_dim.hpp"

namespace rmdim::app {

inline constexpr std::string_view kVersion = "0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<SolveMode> mode;
};

struct VerbOutput {
  std::string verb;
  std::string csv;
  Json aggregate;
  /// Invariant checks that failed; a nonempty list maps to exit code 2.
  std::vector<std::string> failures;
};

const std::vector<std::string>& known_verbs();

/// Runs one verb on a parsed config. Throws ConfigError (or another rmdim::Error) on bad input.
VerbOutput run_verb(std::string_view verb, const Json& config, const RunOptions& opt = {});

/// Built-in invariant suite over all modules; takes no config.
VerbOutput run_selftest(const RunOptions& opt = {});

/// FNV-1a of the canonical config text with the effective seed folded in, as 16 hex digits.
std::string config_hash(const Json& config, std::uint64_t seed);

}  // namespace rmdim::app
