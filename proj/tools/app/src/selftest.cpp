#include <chrono>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "rmdim/app/verbs.hpp"
#include "rmdim/bundle.hpp"
#include "rmdim/capacity.hpp"
#include "rmdim/cover_dim.hpp"
#include "rmdim/metric_dim.hpp"
#include "rmdim/random.hpp"
#include "rmdim/rng.hpp"

namespace rmdim::app {

namespace {

using Outcome = std::pair<bool, std::string>;

struct Check {
  const char* name;
  std::function<Outcome(const RunOptions&)> run;
};

Outcome dcover_value(const char* text, int expected, const RunOptions& opt) {
  const VerbOutput out = run_verb("dcover", Json::parse(text), opt);
  const int v = out.aggregate.at("value").get<int>();
  return {v == expected && out.failures.empty(), fmt::format("D = {}, expected {}", v, expected)};
}

const char* kRotationOcap = R"({
  "seed": 7,
  "environment": {"kind": "point-mass", "states": ["w"]},
  "system": {"generator": "rotation_grid", "params": {"m": 12, "offset": 5}},
  "set": [0],
  "n_list": [12, 60],
  "paths": {"count": 1, "length": 61},
  "test_functions": 4
})";

const char* kSegmentSbp = R"({
  "seed": 3,
  "environment": {"kind": "point-mass", "states": ["w"]},
  "system": {"generator": "rotation_grid", "params": {"m": 12, "offset": 5, "geometry": "line"}},
  "sbp": {
    "cover": [[0, 1, 2, 3, 4, 5, 6], [5, 6, 7, 8, 9, 10, 11]],
    "margins": [0.13636363636363635],
    "delta": 0.13636363636363635,
    "eps": 0.2,
    "n_list": [12, 60, 120]
  },
  "paths": {"count": 1, "length": 120}
})";

std::vector<Check> checks() {
  std::vector<Check> c;
  c.push_back({"dcover-circle4", [](const RunOptions& o) {
                 return dcover_value(
                     R"({"seed": 1, "space": {"type": "poset", "preset": "circle4"},
                         "cover": [["a", "c", "d"], ["b", "c", "d"]]})",
                     1, o);
               }});
  c.push_back({"dcover-interval3", [](const RunOptions& o) {
                 return dcover_value(
                     R"({"seed": 1, "space": {"type": "poset", "preset": "interval3"},
                         "cover": [["a", "c"], ["b", "c"]]})",
                     1, o);
               }});
  c.push_back({"dcover-whole-space", [](const RunOptions& o) {
                 return dcover_value(
                     R"({"seed": 1, "space": {"type": "poset", "preset": "sphere6"},
                         "cover": [["a", "b", "c", "d", "e", "f"]]})",
                     0, o);
               }});
  c.push_back({"exact-not-above-upper", [](const RunOptions&) {
                 Philox4x32 gen(stream_key(11, 0));
                 for (int t = 0; t < 40; ++t) {
                   const FinitePoset p = random_poset(7, 0.35, gen);
                   const Cover a = random_open_cover(p, 3, gen);
                   const int exact = dim_cover_exact(p, a).value;
                   const int upper = dim_cover_upper(p, a, 1000).value;
                   if (exact > upper || exact > ord(a, Subset::full(p.size())))
                     return Outcome{false, fmt::format("trial {}: exact {} upper {}", t, exact, upper)};
                 }
                 return Outcome{true, "40 random posets"};
               }});
  c.push_back({"kingman", [](const RunOptions&) {
                 Philox4x32 gen(stream_key(12, 0));
                 const auto env = BaseEnvironment::iid({"u", "v"}, {0.5, 0.5});
                 std::size_t bad = 0;
                 for (int t = 0; t < 6; ++t) {
                   const BundleSystem sys = random_poset_bundle(env, 6, 0.4, gen);
                   const Cover a = random_open_cover(sys.poset(), 3, gen);
                   for (const auto& path : sample_paths(env, 2, 6, 100 + t)) bad += kingman_check(sys, path, a, 6).size();
                 }
                 return Outcome{bad == 0, fmt::format("{} violations", bad)};
               }});
  c.push_back({"sep-cov-sandwich", [](const RunOptions&) {
                 Philox4x32 gen(stream_key(13, 0));
                 const auto env = BaseEnvironment::cyclic({"u", "v"});
                 for (int t = 0; t < 8; ++t) {
                   const BundleSystem sys = random_metric_bundle(env, 20, 2, gen);
                   const EnvPath path = sample_paths(env, 1, 4, t).front();
                   const auto r = sandwich_check(sys, path, EpsProcess::constant(0.2), 3);
                   if (!r.pass)
                     return Outcome{false, fmt::format("trial {}: sep(2e) {} cov(e) {} sep(e) {}", t, r.sep_2eps,
                                                       r.cov_2eps, r.sep_eps)};
                 }
                 return Outcome{true, "8 random clouds"};
               }});
  c.push_back({"isometry-sep-constant", [](const RunOptions&) {
                 const auto env = BaseEnvironment::point_mass();
                 const BundleSystem sys = make_rotation_grid(env, 12, {5});
                 const EnvPath path = sample_paths(env, 1, 9, 0).front();
                 std::size_t first = 0;
                 for (std::size_t n = 1; n <= 8; ++n) {
                   const std::size_t s = sep(sys, path, EpsProcess::constant(0.25), n).value;
                   if (n == 1) first = s;
                   if (s != first) return Outcome{false, fmt::format("sep changed at n={}: {} vs {}", n, s, first)};
                 }
                 return Outcome{true, fmt::format("sep = {} for n = 1..8", first)};
               }});
  c.push_back({"ocap-rotation", [](const RunOptions& o) {
                 const VerbOutput out = run_verb("ocap", Json::parse(kRotationOcap), o);
                 const double est = out.aggregate.at("estimate").get<double>();
                 return Outcome{est == 5.0 / 60.0 && out.failures.empty(),
                                fmt::format("b_60/60 = {}, expected 1/12", format_double(est))};
               }});
  c.push_back({"sbp-segment", [](const RunOptions& o) {
                 const VerbOutput out = run_verb("sbp-embed", Json::parse(kSegmentSbp), o);
                 const Json& cert = out.aggregate.at("certificate");
                 return Outcome{cert.at("pass").get<bool>() && out.failures.empty(),
                                fmt::format("N = {}, max #I = {}", cert.at("N").get<std::size_t>(),
                                            cert.at("max_index_size").get<std::size_t>())};
               }});
  c.push_back({"determinism", [](const RunOptions& o) {
                 RunOptions one = o, many = o;
                 one.threads = 1;
                 many.threads = 4;
                 const Json cfg = Json::parse(kRotationOcap);
                 const bool same = run_verb("ocap", cfg, one).csv == run_verb("ocap", cfg, many).csv;
                 return Outcome{same, same ? "csv identical for 1 and 4 threads" : "csv differs across thread counts"};
               }});
  return c;
}

}  // namespace

VerbOutput run_selftest(const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  VerbOutput out;
  out.verb = "selftest";
  CsvTable csv({"check", "pass", "detail"});
  Json results = Json::object();
  for (const auto& check : checks()) {
    Outcome r;
    try {
      r = check.run(opt);
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    csv.add({check.name, cell(r.first), r.second});
    results[check.name] = r.first;
    if (!r.first) out.failures.push_back(fmt::format("{}: {}", check.name, r.second));
  }
  out.csv = csv.str();
  out.aggregate = {{"verb", "selftest"},
                   {"version", std::string(kVersion)},
                   {"checks", results},
                   {"assertions_passed", out.failures.empty()},
                   {"failures", out.failures},
                   {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  return out;
}

}  // namespace rmdim::app
