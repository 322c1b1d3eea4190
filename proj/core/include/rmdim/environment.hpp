#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmdim {

using EnvState = std::size_t;

enum class EnvKind { PointMass, CyclicRotation, Iid, Markov };

std::string_view to_string(EnvKind k) noexcept;
EnvKind env_kind_from_string(std::string_view s);

/// Finite model of the driving system: labelled states, a transition rule
/// (deterministic successor or row-stochastic table) and the law P.
class BaseEnvironment {
 public:
  static BaseEnvironment point_mass(std::string label = "w0");
  /// theta(i) = i + shift (mod m); uniform law unless one is given.
  static BaseEnvironment cyclic(std::vector<std::string> states, std::size_t shift = 1,
                                std::optional<std::vector<double>> law = std::nullopt);
  /// Every step draws a fresh state from `law`.
  static BaseEnvironment iid(std::vector<std::string> states, std::vector<double> law);
  static BaseEnvironment markov(std::vector<std::string> states, std::vector<std::vector<double>> transition,
                                std::vector<double> law);

  EnvKind kind() const noexcept { return kind_; }
  bool deterministic() const noexcept { return kind_ == EnvKind::PointMass || kind_ == EnvKind::CyclicRotation; }
  std::size_t size() const noexcept { return labels_.size(); }

  const std::string& label(EnvState s) const { return labels_.at(s); }
  EnvState index_of(std::string_view label) const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  const std::vector<double>& law() const noexcept { return law_; }
  /// P(theta w = to | w = from).
  double transition(EnvState from, EnvState to) const;
  /// Successors reachable with positive probability, ascending.
  std::vector<EnvState> successors(EnvState from) const;
  /// theta(from); only for deterministic kinds.
  EnvState successor(EnvState from) const;

  bool assume_ergodic = false;

 private:
  BaseEnvironment() = default;
  void validate() const;

  EnvKind kind_ = EnvKind::PointMass;
  std::vector<std::string> labels_;
  std::vector<double> law_;
  std::vector<EnvState> successor_;             // deterministic kinds
  std::vector<std::vector<double>> transition_;  // iid / markov
};

/// A sampled base trajectory w_0, theta w_0, ..., theta^{L-1} w_0.
struct EnvPath {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  std::vector<EnvState> states;

  std::size_t length() const noexcept { return states.size(); }
  EnvState operator[](std::size_t k) const { return states.at(k); }
  /// Path of theta^n w: drops the first n states.
  EnvPath shifted(std::size_t n) const;
  friend bool operator==(const EnvPath&, const EnvPath&) = default;
};

/// Successor of `state` given a uniform draw in [0,1). Deterministic kinds ignore the draw.
EnvState step(const BaseEnvironment& env, EnvState state, double draw);
EnvState step(const BaseEnvironment& env, std::string_view state, double draw);

/// `count` independent paths; path i uses the counter-based stream seed ^ i.
/// The initial state is drawn from the law unless `initial` is given.
std::vector<EnvPath> sample_paths(const BaseEnvironment& env, std::size_t count, std::size_t length,
                                  std::uint64_t seed, std::optional<EnvState> initial = std::nullopt);

/// Paths with weights whose weighted sum realizes E[.] over P.
struct WeightedPaths {
  std::vector<EnvPath> paths;
  std::vector<double> weights;
  /// True when the weights are the exact law (deterministic kinds).
  bool exact = false;
};

/// Deterministic kinds: one path per positive-law state weighted by the law.
/// Random kinds: `count` Monte-Carlo paths with equal weights.
WeightedPaths expectation_paths(const BaseEnvironment& env, std::size_t count, std::size_t length,
                                std::uint64_t seed);

struct StationarityReport {
  bool pass = false;
  double max_deviation = 0.0;
};

StationarityReport check_stationarity(const BaseEnvironment& env, double tol = 1e-12);

/// Strong connectivity of the positive-probability transition graph.
bool is_irreducible(const BaseEnvironment& env);

/// Relative visit frequency of each state along a path.
std::vector<double> empirical_frequencies(const BaseEnvironment& env, const EnvPath& path);

}  // namespace rmdim
