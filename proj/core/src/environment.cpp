#include "rmdim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmdim/error.hpp"
#include "rmdim/rng.hpp"

namespace rmdim {
namespace {

constexpr double kLawTol = 1e-12;

std::vector<double> uniform_law(std::size_t m) { return std::vector<double>(m, 1.0 / static_cast<double>(m)); }

void check_distribution(const std::vector<double>& p, const std::string& path) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("weights must be finite and nonnegative", path);
    sum += v;
  }
  if (std::abs(sum - 1.0) > kLawTol)
    throw ConfigError("weights sum to " + std::to_string(sum) + ", expected 1", path);
}

// First index whose cumulative weight exceeds `draw`; zero-weight entries are never chosen.
EnvState invert_cdf(const std::vector<double>& p, double draw) {
  double acc = 0.0;
  EnvState last = 0;
  for (EnvState i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (draw < acc) return i;
  }
  return last;
}

}  // namespace

std::string_view to_string(EnvKind k) noexcept {
  switch (k) {
    case EnvKind::PointMass: return "point-mass";
    case EnvKind::CyclicRotation: return "cyclic-rotation";
    case EnvKind::Iid: return "iid";
    case EnvKind::Markov: return "markov";
  }
  return "?";
}

EnvKind env_kind_from_string(std::string_view s) {
  if (s == "point-mass") return EnvKind::PointMass;
  if (s == "cyclic-rotation") return EnvKind::CyclicRotation;
  if (s == "iid") return EnvKind::Iid;
  if (s == "markov") return EnvKind::Markov;
  throw ConfigError("unknown environment kind '" + std::string(s) + "'", "environment.kind");
}

BaseEnvironment BaseEnvironment::point_mass(std::string label) {
  BaseEnvironment env;
  env.kind_ = EnvKind::PointMass;
  env.labels_ = {std::move(label)};
  env.law_ = {1.0};
  env.successor_ = {0};
  env.validate();
  return env;
}

BaseEnvironment BaseEnvironment::cyclic(std::vector<std::string> states, std::size_t shift,
                                        std::optional<std::vector<double>> law) {
  BaseEnvironment env;
  env.kind_ = EnvKind::CyclicRotation;
  const std::size_t m = states.size();
  if (m == 0) throw ConfigError("environment needs at least one state", "environment.states");
  env.labels_ = std::move(states);
  env.law_ = law ? std::move(*law) : uniform_law(m);
  env.successor_.resize(m);
  for (std::size_t i = 0; i < m; ++i) env.successor_[i] = (i + shift) % m;
  env.validate();
  return env;
}

BaseEnvironment BaseEnvironment::iid(std::vector<std::string> states, std::vector<double> law) {
  BaseEnvironment env;
  env.kind_ = EnvKind::Iid;
  env.labels_ = std::move(states);
  env.law_ = std::move(law);
  env.transition_.assign(env.labels_.size(), env.law_);
  env.validate();
  return env;
}

BaseEnvironment BaseEnvironment::markov(std::vector<std::string> states, std::vector<std::vector<double>> transition,
                                        std::vector<double> law) {
  BaseEnvironment env;
  env.kind_ = EnvKind::Markov;
  env.labels_ = std::move(states);
  env.law_ = std::move(law);
  env.transition_ = std::move(transition);
  env.validate();
  return env;
}

void BaseEnvironment::validate() const {
  const std::size_t m = labels_.size();
  if (m == 0) throw ConfigError("environment needs at least one state", "environment.states");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (labels_[i] == labels_[j]) throw ConfigError("duplicate state label '" + labels_[i] + "'", "environment.states");
  if (law_.size() != m) throw ConfigError("law has wrong length", "environment.law");
  check_distribution(law_, "environment.law");
  if (kind_ == EnvKind::PointMass && m != 1) throw ConfigError("point-mass environment must have one state", "environment.states");
  if (!deterministic()) {
    if (transition_.size() != m) throw ConfigError("transition must be square", "environment.transition");
    for (std::size_t i = 0; i < m; ++i) {
      if (transition_[i].size() != m) throw ConfigError("transition must be square", "environment.transition");
      check_distribution(transition_[i], "environment.transition[" + std::to_string(i) + "]");
    }
  }
}

EnvState BaseEnvironment::index_of(std::string_view label) const {
  for (EnvState i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw InputError("unknown environment state '" + std::string(label) + "'");
}

double BaseEnvironment::transition(EnvState from, EnvState to) const {
  if (from >= size() || to >= size()) throw InputError("environment state out of range");
  if (deterministic()) return successor_[from] == to ? 1.0 : 0.0;
  return transition_[from][to];
}

std::vector<EnvState> BaseEnvironment::successors(EnvState from) const {
  if (from >= size()) throw InputError("environment state out of range");
  if (deterministic()) return {successor_[from]};
  std::vector<EnvState> out;
  for (EnvState j = 0; j < size(); ++j)
    if (transition_[from][j] > 0.0) out.push_back(j);
  return out;
}

EnvState BaseEnvironment::successor(EnvState from) const {
  if (!deterministic()) throw InputError("successor() requires a deterministic environment");
  if (from >= size()) throw InputError("environment state out of range");
  return successor_[from];
}

EnvPath EnvPath::shifted(std::size_t n) const {
  if (n > states.size()) throw InputError("cannot shift a path past its end");
  EnvPath p;
  p.seed = seed;
  p.index = index;
  p.states.assign(states.begin() + static_cast<std::ptrdiff_t>(n), states.end());
  return p;
}

EnvState step(const BaseEnvironment& env, EnvState state, double draw) {
  if (state >= env.size()) throw InputError("unknown environment state index " + std::to_string(state));
  if (env.deterministic()) return env.successor(state);
  std::vector<double> row(env.size());
  for (EnvState j = 0; j < env.size(); ++j) row[j] = env.transition(state, j);
  return invert_cdf(row, draw);
}

EnvState step(const BaseEnvironment& env, std::string_view state, double draw) {
  return step(env, env.index_of(state), draw);
}

std::vector<EnvPath> sample_paths(const BaseEnvironment& env, std::size_t count, std::size_t length,
                                  std::uint64_t seed, std::optional<EnvState> initial) {
  if (count == 0 || length == 0) throw InputError("sample_paths needs count >= 1 and length >= 1");
  if (initial && *initial >= env.size()) throw InputError("initial state out of range");
  std::vector<EnvPath> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Philox4x32 gen(stream_key(seed, i));
    EnvPath& p = out[i];
    p.seed = seed;
    p.index = i;
    p.states.reserve(length);
    const double first_draw = gen.uniform();
    p.states.push_back(initial ? *initial : invert_cdf(env.law(), first_draw));
    for (std::size_t k = 1; k < length; ++k) p.states.push_back(step(env, p.states.back(), gen.uniform()));
  }
  return out;
}

WeightedPaths expectation_paths(const BaseEnvironment& env, std::size_t count, std::size_t length,
                                std::uint64_t seed) {
  WeightedPaths w;
  if (env.deterministic()) {
    w.exact = true;
    for (EnvState s = 0; s < env.size(); ++s) {
      if (env.law()[s] <= 0.0) continue;
      EnvPath p = sample_paths(env, 1, length, seed, s).front();
      p.index = w.paths.size();
      w.paths.push_back(std::move(p));
      w.weights.push_back(env.law()[s]);
    }
    return w;
  }
  w.paths = sample_paths(env, count, length, seed);
  w.weights.assign(count, 1.0 / static_cast<double>(count));
  return w;
}

StationarityReport check_stationarity(const BaseEnvironment& env, double tol) {
  const std::size_t m = env.size();
  std::vector<double> pushed(m, 0.0);
  for (EnvState i = 0; i < m; ++i)
    for (EnvState j = 0; j < m; ++j) pushed[j] += env.law()[i] * env.transition(i, j);
  StationarityReport r;
  for (EnvState j = 0; j < m; ++j) r.max_deviation = std::max(r.max_deviation, std::abs(pushed[j] - env.law()[j]));
  r.pass = r.max_deviation <= tol;
  return r;
}

bool is_irreducible(const BaseEnvironment& env) {
  const std::size_t m = env.size();
  auto reach_all = [&](bool reverse) {
    std::vector<char> seen(m, 0);
    std::vector<EnvState> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const EnvState u = stack.back();
      stack.pop_back();
      for (EnvState v = 0; v < m; ++v) {
        const double p = reverse ? env.transition(v, u) : env.transition(u, v);
        if (p > 0.0 && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach_all(false) && reach_all(true);
}

std::vector<double> empirical_frequencies(const BaseEnvironment& env, const EnvPath& path) {
  std::vector<double> f(env.size(), 0.0);
  if (path.states.empty()) return f;
  for (EnvState s : path.states) f.at(s) += 1.0;
  for (double& v : f) v /= static_cast<double>(path.length());
  return f;
}

}  // namespace rmdim
