// Acceptance harness: one PASS/FAIL line per criterion with pinned tolerances.
// Usage: acceptance [--configs DIR] [--allow-fail=ID[,ID...]]

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "oracles.hpp"
#include "rmdim/app/config.hpp"
#include "rmdim/app/verbs.hpp"
#include "rmdim/capacity.hpp"
#include "rmdim/cover_dim.hpp"
#include "rmdim/error.hpp"
#include "rmdim/metric_dim.hpp"
#include "rmdim/random.hpp"

using namespace rmdim;
using namespace rmdim::app;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string g_configs = RMDIM_CONFIGS;

Json load(const std::string& verb) {
  std::ifstream f(g_configs + "/" + verb + ".json");
  if (!f) throw std::runtime_error("missing bundled config for " + verb);
  return Json::parse(f);
}

// Every q_n computed anywhere in the suite is checked against (#alpha)^n - 1.
struct CorollaryAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;
} g_audit;

int audited_q(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n) {
  const int q = q_n(sys, path, alpha, n);
  ++g_audit.checked;
  if (static_cast<double>(q) > std::pow(static_cast<double>(alpha.size()), static_cast<double>(n)) - 1.0)
    ++g_audit.violations;
  return q;
}

void audit_report(const MdimReport& r) {
  g_audit.checked += r.rows.size();
  g_audit.violations += r.corollary_violations;
}

FinitePoset preset(const char* name) { return preset_poset(name); }

// ------------------------------------------------------------------ 1

Outcome cover_dim_oracle() {
  Philox4x32 gen(stream_key(1001, 0));
  std::size_t mismatches = 0;
  const FinitePoset anti = FinitePoset::antichain(5);
  for (int t = 0; t < 20; ++t) {
    const Cover alpha = random_open_cover(anti, 1 + gen.below(4), gen);
    const int d = dim_cover_exact(anti, alpha).value;
    if (d != 0 || oracle::dim(anti, oracle::to_masks(alpha)) != 0) ++mismatches;
  }
  const FinitePoset interval = preset("interval3");
  const Cover ia({Subset(3, {0, 2}), Subset(3, {1, 2})});
  const int di = dim_cover_exact(interval, ia).value;
  const int oi = oracle::dim(interval, oracle::to_masks(ia));
  const FinitePoset circle = preset("circle4");
  const Cover ca({circle.up_set(0), circle.up_set(1)});
  const int dc = dim_cover_exact(circle, ca).value;
  const int oc = oracle::dim(circle, oracle::to_masks(ca));
  const bool ok = mismatches == 0 && di == 1 && oi == 1 && dc == 1 && oc == 1;
  return {ok, fmt::format("antichain mismatches {}/20, interval D={} oracle={}, circle D={} oracle={}", mismatches,
                          di, oi, dc, oc)};
}

// ------------------------------------------------------------------ 2

Outcome subadditivity_suite() {
  Philox4x32 gen(stream_key(1002, 0));
  std::size_t join_bad = 0, kingman_bad = 0, kingman_checked = 0, cov_bad = 0, cov_checked = 0;
  for (int t = 0; t < 100; ++t) {
    const FinitePoset p = random_poset(4 + gen.below(7), 0.35, gen);
    const Cover a = random_open_cover(p, 2 + gen.below(3), gen);
    const Cover b = random_open_cover(p, 2 + gen.below(3), gen);
    const Cover ab(join({a, b}).distinct_nonempty());
    if (dim_cover_exact(p, ab).value > dim_cover_exact(p, a).value + dim_cover_exact(p, b).value) ++join_bad;
  }

  const Json cfg = load("mdim");
  const Reader root(cfg, "");
  const BaseEnvironment env = parse_environment(root.child("environment"));
  const BundleSystem sys = parse_system(root.child("system"), env, parse_space(root.child("space")));
  const Cover alpha = parse_cover(cfg.at("covers")[0], sys.carrier(), "covers[0]");
  for (const auto& path : sample_paths(env, 20, 7, 1002)) {
    for (std::size_t n = 1; n < 6; ++n)
      for (std::size_t m = 1; n + m <= 6; ++m) {
        ++kingman_checked;
        const int whole = audited_q(sys, path, alpha, n + m);
        if (whole > audited_q(sys, path, alpha, n) + audited_q(sys, path.shifted(n), alpha, m)) ++kingman_bad;
      }
  }

  const auto menv = BaseEnvironment::iid({"u", "v"}, {0.5, 0.5});
  SolveOptions exact;
  exact.mode = SolveMode::Exact;
  for (int t = 0; t < 100; ++t) {
    const BundleSystem ms = random_metric_bundle(menv, 8 + gen.below(13), 1 + gen.below(2), gen);
    const auto path = sample_paths(menv, 1, 5, 5000 + t).front();
    const auto eps = EpsProcess::constant(0.15 + 0.05 * static_cast<double>(gen.below(4)));
    for (std::size_t n = 1; n < 4; ++n)
      for (std::size_t m = 1; n + m <= 4; ++m) {
        ++cov_checked;
        const double lhs = std::log(static_cast<double>(cov(ms, path, eps, n + m, exact).value));
        const double rhs = std::log(static_cast<double>(cov(ms, path, eps, n, exact).value)) +
                           std::log(static_cast<double>(cov(ms, path.shifted(n), eps, m, exact).value));
        if (lhs > rhs + 1e-12) ++cov_bad;
      }
  }
  return {join_bad + kingman_bad + cov_bad == 0,
          fmt::format("join {}/100, q_n splits {}/{}, log cov splits {}/{} violations", join_bad, kingman_bad,
                      kingman_checked, cov_bad, cov_checked)};
}

// ------------------------------------------------------------------ 3 (evaluated last)

Outcome corollary_bound() {
  return {g_audit.violations == 0 && g_audit.checked > 0,
          fmt::format("{} violations over {} computed q_n", g_audit.violations, g_audit.checked)};
}

// ------------------------------------------------------------------ 4

Outcome sandwich() {
  Philox4x32 gen(stream_key(1004, 0));
  const auto env = BaseEnvironment::markov({"s", "t"}, {{0.3, 0.7}, {0.6, 0.4}}, {6.0 / 13.0, 7.0 / 13.0});
  std::size_t bad = 0;
  for (int t = 0; t < 200; ++t) {
    const BundleSystem sys = random_metric_bundle(env, 10 + gen.below(31), 1 + gen.below(3), gen);
    const auto path = sample_paths(env, 1, 3, 7000 + t).front();
    const double eps = 0.05 + 0.05 * static_cast<double>(gen.below(6));
    const auto r = sandwich_check(sys, path, EpsProcess::constant(eps), 1 + gen.below(3));
    if (!r.pass || r.sep_2eps > r.cov_2eps || r.cov_2eps > r.sep_eps) ++bad;
  }
  return {bad == 0, fmt::format("{}/200 violations", bad)};
}

// ------------------------------------------------------------------ 5

Outcome rotation_zero_mmdim() {
  const VerbOutput out = run_verb("mmdim", load("mmdim"), {});
  double worst = 0.0;
  std::size_t cells = 0, nonzero = 0;
  for (const auto& f : out.aggregate.at("fibers"))
    for (const auto& s : f.at("S_sep")) {
      ++cells;
      worst = std::max(worst, s.get<double>());
      nonzero += s.get<double>() != 0.0;
    }
  const double slope = out.aggregate.at("mean_slope").get<double>();
  const double ratio = out.aggregate.at("mean_min_ratio").get<double>();
  const bool ok = nonzero == 0 && slope == 0.0 && ratio == 0.0 && out.failures.empty();
  return {ok, fmt::format("S' nonzero in {}/{} cells (max {}), mean slope {}, mean min-ratio {}; "
                          "S' = log sep(n_max)/n_max is log(m_eps)/n_max > 0 at finite n",
                          nonzero, cells, format_double(worst), format_double(slope), format_double(ratio))};
}

// ------------------------------------------------------------------ 6

Outcome full_shift_slope() {
  const auto env = BaseEnvironment::point_mass();
  // Counting oracle first: independent exhaustive MIS against the product formula.
  std::size_t oracle_bad = 0, oracle_checked = 0;
  for (std::size_t a = 2; a <= 5; ++a) {
    std::vector<double> alphabet;
    for (std::size_t i = 0; i < a; ++i) alphabet.push_back(static_cast<double>(i) / static_cast<double>(a - 1));
    const BundleSystem sys = make_product_shift(env, alphabet, 1);
    const auto path = sample_paths(env, 1, 2, 0).front();
    const auto pts = sys.fiber(0).indices();
    for (double eps : {0.25, 0.125, 0.0625})
      for (std::size_t n = 1; n <= 2; ++n) {
        std::vector<std::bitset<256>> adj(pts.size());
        std::bitset<256> all;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          all[i] = true;
          for (std::size_t j = 0; j < pts.size(); ++j)
            adj[i][j] = i != j && oracle::close(oracle::bowen(sys, path, eps, n, pts[i], pts[j]));
        }
        ++oracle_checked;
        const std::size_t brute = oracle::mis_small(adj, all);
        bool ok = brute == oracle::product_shift_sep(alphabet, 1, eps, n);
        if (pts.size() <= 64) {
          SolveOptions o;
          o.mode = SolveMode::Exact;
          ok = ok && sep(sys, path, EpsProcess::constant(eps), n, o).value == brute;
        }
        oracle_bad += !ok;
      }
  }

  std::vector<double> alphabet;
  for (std::size_t i = 0; i <= 64; ++i) alphabet.push_back(static_cast<double>(i) / 64.0);
  const BundleSystem sys = make_product_shift(env, alphabet, 1);
  const WeightedPaths paths = expectation_paths(env, 1, 3, 0);
  const std::vector<double> grid{0.25, 0.125, 0.0625};
  const std::vector<std::size_t> n_list{1, 2, 3};

  MmdimOptions greedy;
  greedy.solve.mode = SolveMode::Greedy;
  greedy.compute_cov = true;
  const MmdimReport full = mmdim_estimate(sys, paths, grid, n_list, greedy);
  MmdimOptions sub;
  sub.solve.mode = SolveMode::Exact;
  sub.subsample = 64;
  sub.compute_cov = false;
  const MmdimReport small = mmdim_estimate(sys, paths, grid, n_list, sub);

  std::size_t bracket_bad = 0;
  for (std::size_t c = 0; c < full.cells.size(); ++c) {
    const auto& cell = full.cells[c];
    const std::size_t truth = oracle::product_shift_sep(alphabet, 1, cell.eps, cell.n);
    // greedy sep <= sep <= cov <= greedy cov, and an exact sep on a subsample never exceeds sep
    if (cell.sep > truth || cell.cov < truth || small.cells[c].sep > truth) ++bracket_bad;
  }
  std::vector<double> x, y;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    x.push_back(-std::log(grid[e]));
    y.push_back(std::log(static_cast<double>(oracle::product_shift_sep(alphabet, 1, grid[e], 3))) / 3.0);
  }
  const double oracle_slope = least_squares_slope(x, y);
  const double slope = full.mean_slope;
  const bool ok = oracle_bad == 0 && bracket_bad == 0 && slope >= 0.8 && slope <= 1.2;
  return {ok, fmt::format("slope {} (oracle {}), counting oracle mismatches {}/{}, bracket failures {}/{}",
                          format_double(slope), format_double(oracle_slope), oracle_bad, oracle_checked,
                          bracket_bad, full.cells.size())};
}

// ------------------------------------------------------------------ 7

Outcome inclusion_zero() {
  Philox4x32 gen(stream_key(1007, 0));
  const auto env = BaseEnvironment::point_mass();
  const auto path = sample_paths(env, 1, 16, 0).front();
  std::size_t bad = 0, instances = 0;
  for (const char* name : {"circle4", "pseudo_circle6", "sphere6"}) {
    const FinitePoset p = preset(name);
    const BundleSystem sys = make_inclusion_system(env, std::make_shared<const Carrier>(p), {Subset::full(p.size())});
    for (int t = 0; t < 4; ++t) {
      ++instances;
      const Cover alpha = random_open_cover(p, 2 + gen.below(3), gen);
      const std::size_t k = alpha.size();
      const int qk = audited_q(sys, path, alpha, k);
      for (std::size_t n = k; n <= 16; ++n) bad += audited_q(sys, path, alpha, n) != qk;
      const MdimReport r = mdim_estimate(sys, alpha, {{path}, {1.0}, true}, 16);
      audit_report(r);
      bad += r.estimate > static_cast<double>(qk) / 16.0;
    }
  }
  return {bad == 0, fmt::format("{} failures over {} inclusion instances, n up to 16", bad, instances)};
}

// ------------------------------------------------------------------ 8

Outcome sub_bundle_monotone() {
  Philox4x32 gen(stream_key(1008, 0));
  const auto env = BaseEnvironment::iid({"u", "v"}, {0.4, 0.6});
  std::size_t bad = 0, checked = 0, built = 0;
  while (built < 20) {
    const BundleSystem sys = random_poset_bundle(env, 7, 0.35, gen);
    std::vector<Subset> seeds;
    for (std::size_t w = 0; w < env.size(); ++w) {
      Subset s(7);
      sys.fiber(w).for_each([&](std::size_t x) {
        if (gen.below(3) == 0) s.insert(x);
      });
      seeds.push_back(s);
    }
    const auto closed = forward_invariant_closure(sys, seeds);
    if (std::any_of(closed.begin(), closed.end(), [](const Subset& s) { return s.empty(); })) continue;
    ++built;
    const BundleSystem sub = restrict_to(sys, closed);
    const Cover alpha = random_open_cover(sys.poset(), 2 + gen.below(2), gen);
    for (const auto& path : sample_paths(env, 2, 4, 9000 + built))
      for (std::size_t n = 1; n <= 4; ++n) {
        ++checked;
        bad += audited_q(sub, path, alpha, n) > audited_q(sys, path, alpha, n);
      }
  }
  return {bad == 0, fmt::format("{}/{} violations on 20 invariant sub-bundles", bad, checked)};
}

// ------------------------------------------------------------------ 9

Outcome orbit_capacity() {
  const VerbOutput out = run_verb("ocap", load("ocap"), {});
  const double est = out.aggregate.at("estimate").get<double>();
  bool ok = est == 1.0 / 12.0 && out.failures.empty();

  Philox4x32 gen(stream_key(1009, 0));
  const auto env = BaseEnvironment::markov({"s", "t"}, {{0.5, 0.5}, {0.2, 0.8}}, {2.0 / 7.0, 5.0 / 7.0});
  std::size_t mass_bad = 0, defect_bad = 0;
  for (int t = 0; t < 10; ++t) {
    const BundleSystem sys = random_metric_bundle(env, 12, 1, gen);
    Subset e(12);
    for (std::size_t x = 0; x < 12; ++x)
      if (gen.below(4) == 0) e.insert(x);
    const std::size_t n = 20 + gen.below(41);
    const auto path = sample_paths(env, 1, n + 1, 11000 + t).front();
    const auto mu = empirical_maximizing_measure(sys, path, e, n);
    mass_bad += mu.mass() != static_cast<double>(birkhoff_count(sys, path, e, n).b) / static_cast<double>(n);
    for (int f = 0; f < 10; ++f) {
      TestFunction tf;
      tf.values.assign(env.size(), std::vector<double>(12));
      for (auto& row : tf.values)
        for (auto& v : row) v = 2.0 * gen.uniform() - 1.0;
      defect_bad += invariance_defect(mu, tf) > 2.0 * tf.sup_norm() / static_cast<double>(n);
    }
  }
  ok = ok && mass_bad == 0 && defect_bad == 0;
  return {ok, fmt::format("rotation b_60/60 = {} (1/12 = {}), mass mismatches {}/10, defect violations {}/100",
                          format_double(est), format_double(1.0 / 12.0), mass_bad, defect_bad)};
}

// ------------------------------------------------------------------ 10

Outcome partition_identity() {
  Philox4x32 gen(stream_key(1010, 0));
  std::size_t valid = 0, sum_bad = 0, inv_bad = 0;
  double worst = 0.0;
  while (valid < 50) {
    const std::size_t m = 20 + gen.below(181);
    std::vector<double> pos(m);
    for (std::size_t i = 0; i < m; ++i) pos[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    const FiniteMetricSpace space = FiniteMetricSpace::line(pos);
    const std::size_t pieces = 2 + gen.below(4), overlap = 2 + gen.below(6);
    Cover alpha;
    for (std::size_t j = 0; j < pieces; ++j) {
      const std::size_t lo = j * m / pieces, hi = (j + 1) * m / pieces;
      Subset s(m);
      for (std::size_t i = lo >= overlap ? lo - overlap : 0; i < std::min(m, hi + overlap); ++i) s.insert(i);
      alpha.members.push_back(s);
    }
    const double step = 1.0 / static_cast<double>(m - 1);
    std::vector<double> margins;
    for (std::size_t j = 0; j < pieces; ++j)
      margins.push_back(step * (0.5 + static_cast<double>(gen.below(overlap))));
    const double delta = step * (0.5 + static_cast<double>(gen.below(overlap)));
    PartitionOfUnity pu;
    try {
      pu = partition_of_unity(space, shrink_cover(space, alpha, margins), delta);
    } catch (const MarginError&) {
      continue;
    } catch (const DeltaError&) {
      continue;
    }
    ++valid;
    for (std::size_t x = 0; x < m; ++x) {
      double sum = 0.0;
      bool frac = false;
      for (std::size_t j = 0; j < pieces; ++j) {
        const double phi = pu.phi[j][x];
        // support inside U_j, phi_j <= psi_j, phi_j = min(psi_j, 1 - earlier), psi_j = 1 on the shrunk member
        if (phi < 0.0 || phi > pu.psi[j][x] || (phi > 0.0 && !alpha.members[j].contains(x)) ||
            phi != std::max(0.0, std::min(pu.psi[j][x], 1.0 - sum)) ||
            (pu.cover.shrunk.members[j].contains(x) && pu.psi[j][x] != 1.0))
          ++inv_bad;
        frac |= phi > 0.0 && phi < 1.0;
        sum += phi;
      }
      inv_bad += pu.fractional.contains(x) != frac;
      worst = std::max(worst, std::abs(sum - 1.0));
      sum_bad += std::abs(sum - 1.0) > 1e-12;
    }
  }
  return {sum_bad == 0 && inv_bad == 0, fmt::format("50 instances: sum violations {}, invariant violations {}, "
                                                    "max |sum phi - 1| = {}",
                                                    sum_bad, inv_bad, format_double(worst))};
}

// ------------------------------------------------------------------ 11

Outcome sbp_certificate() {
  const Json cfg = load("sbp-embed");
  const double eps = cfg.at("sbp").at("eps").get<double>();
  const auto n_list = cfg.at("sbp").at("n_list").get<std::vector<std::size_t>>();
  const VerbOutput out = run_verb("sbp-embed", cfg, {});
  const Json& c = out.aggregate.at("certificate");
  const std::size_t n = c.at("N").get<std::size_t>();
  const bool ok = eps == 0.2 && n == 120 && n_list.back() == 120 && c.at("index_bound_ok").get<bool>() &&
                  c.at("corner_ok").get<bool>() && c.at("compatibility_ok").get<bool>() && out.failures.empty();
  return {ok, fmt::format("eps {}, N {}, max #I {} < eps N = {}, corner {}, compatibility {} ({} collision groups)",
                          format_double(eps), n, c.at("max_index_size").get<std::size_t>(), format_double(eps * 120),
                          c.at("corner_ok").get<bool>(), c.at("compatibility_ok").get<bool>(),
                          c.at("collision_groups").get<std::size_t>())};
}

// ------------------------------------------------------------------ 12

Outcome determinism() {
  std::size_t bad = 0;
  std::vector<std::string> verbs{"dcover", "mdim", "mmdim", "htop", "ocap", "small", "sbp-embed"};
  for (const auto& v : verbs) {
    const Json cfg = load(v);
    RunOptions one, three;
    one.threads = 1;
    three.threads = 3;
    const std::string a = run_verb(v, cfg, one).csv;
    const std::string b = run_verb(v, cfg, one).csv;
    const std::string c = run_verb(v, cfg, three).csv;
    bad += a != b || a != c || a.empty();
  }
  bad += run_selftest({}).csv != run_selftest({}).csv;
  return {bad == 0, fmt::format("{}/{} verbs with differing CSV across reruns and thread counts", bad,
                                verbs.size() + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> allowed;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--allow-fail=", 0) == 0) {
      std::stringstream s(a.substr(13));
      for (std::string id; std::getline(s, id, ',');) allowed.insert(std::stoi(id));
    } else if (a == "--configs" && i + 1 < argc) {
      g_configs = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--configs DIR] [--allow-fail=ID,...]\n";
      return 1;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "cover-dimension oracle agreement", 1.0, cover_dim_oracle},
      {2, "subadditivity suite", 120.0, subadditivity_suite},
      {4, "sandwich inequality", 120.0, sandwich},
      {5, "finite entropy gives zero metric mean dimension", 60.0, rotation_zero_mmdim},
      {6, "full-shift slope", 600.0, full_shift_slope},
      {7, "inclusion system has mean dimension zero", 60.0, inclusion_zero},
      {8, "sub-bundle monotonicity", 60.0, sub_bundle_monotone},
      {9, "orbit capacity exactness", 60.0, orbit_capacity},
      {10, "partition-of-unity identity", 60.0, partition_identity},
      {11, "SBP embedding certificate", 120.0, sbp_certificate},
      {12, "determinism", 300.0, determinism},
      {3, "corollary bound q_n <= (#alpha)^n - 1", 1.0, corollary_bound},
  };

  std::map<int, std::string> lines;
  int hard_failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt::format("; over time budget {} s", c.budget_s);
    }
    const bool tolerated = !o.pass && allowed.count(c.id);
    if (!o.pass && !tolerated) ++hard_failures;
    lines[c.id] = fmt::format("{} [{:2}] {}: {} ({:.2f} s){}", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs,
                              tolerated ? " [known failure, tolerated]" : "");
  }
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  std::cout << (hard_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE OK") << '\n';
  return hard_failures ? 2 : 0;
}
