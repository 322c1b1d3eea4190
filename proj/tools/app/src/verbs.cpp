#include "rmdim/app/verbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "rmdim/app/config.hpp"
#include "rmdim/capacity.hpp"
#include "rmdim/cover_dim.hpp"
#include "rmdim/error.hpp"
#include "rmdim/rng.hpp"

namespace rmdim::app {

const std::vector<std::string>& known_verbs() {
  static const std::vector<std::string> v{"dcover", "mdim", "mmdim", "htop", "ocap", "small", "sbp-embed", "selftest"};
  return v;
}

std::string config_hash(const Json& config, std::uint64_t seed) {
  Json c = config;
  if (c.is_object()) c["seed"] = seed;
  return fmt::format("{:016x}", fnv1a64(dump_json(c, -1)));
}

namespace {

template <class F>
auto at_config(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), path);
  }
}

struct Context {
  const Reader& root;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  SolveMode mode = SolveMode::Auto;
  mutable Json environment = nullptr;  // diagnostics of the loaded environment
};

struct SystemBundle {
  BaseEnvironment env;
  std::shared_ptr<const Carrier> space;
  std::optional<BundleSystem> sys;
};

Json environment_report(const BaseEnvironment& env) {
  const StationarityReport st = check_stationarity(env);
  const bool irreducible = is_irreducible(env);
  if (env.assume_ergodic && !irreducible)
    throw ConfigError("assume_ergodic is set but the environment chain is reducible", "environment.assume_ergodic");
  return {{"kind", std::string(to_string(env.kind()))},
          {"stationary", st.pass},
          {"stationarity_deviation", st.max_deviation},
          {"irreducible", irreducible},
          {"assume_ergodic", env.assume_ergodic}};
}

SystemBundle load_system(const Context& ctx) {
  const Reader& root = ctx.root;
  SystemBundle b{parse_environment(root.child("environment")), nullptr, std::nullopt};
  ctx.environment = environment_report(b.env);
  if (auto s = root.child_opt("space")) b.space = parse_space(*s);
  b.sys.emplace(parse_system(root.child("system"), b.env, b.space));
  return b;
}

WeightedPaths load_paths(const Context& ctx, const BaseEnvironment& env, std::size_t min_length) {
  const auto r = ctx.root.child_opt("paths");
  const PathSpec spec = parse_paths(r ? &*r : nullptr, min_length);
  return expectation_paths(env, spec.count, spec.length, ctx.seed);
}

std::vector<std::size_t> increasing_list(const Reader& r, std::string_view key) {
  const auto v = r.get<std::vector<std::size_t>>(key);
  if (v.empty()) throw ConfigError("list is empty", r.path_of(key));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == 0 || (i && v[i] <= v[i - 1]))
      throw ConfigError("values must be strictly increasing positive integers", r.path_of(key));
  return v;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::string join_labels(const Carrier& c, const Subset& s) {
  std::string out;
  s.for_each([&](std::size_t x) {
    if (!out.empty()) out += ' ';
    out += point_label(c, x);
  });
  return out;
}

// ---------------------------------------------------------------- dcover

VerbOutput dcover(const Context& ctx) {
  const auto space = parse_space(ctx.root.child("space"));
  if (!is_poset(*space)) throw ConfigError("dcover needs a poset space", "space.type");
  const auto& p = std::get<FinitePoset>(*space);
  const Cover alpha = parse_cover(ctx.root.at("cover"), *space, "cover");
  const auto budget = ctx.root.get_or<std::uint64_t>("budget", 100000);
  if (!is_open_cover(*space, Subset::full(p.size()), alpha))
    throw ConfigError("cover is not an open cover of the poset (members must be up-sets covering every element)", "cover");
  const bool exact = ctx.mode == SolveMode::Exact || (ctx.mode == SolveMode::Auto && p.size() <= 16);
  const DimResult r = exact ? dim_cover_exact(p, alpha) : dim_cover_upper(p, alpha, budget);
  VerbOutput out;
  CsvTable csv({"member", "elements"});
  for (std::size_t i = 0; i < r.witness.size(); ++i) csv.add({cell(i), join_labels(*space, r.witness.members[i])});
  out.csv = csv.str();
  Json w = Json::array();
  for (const auto& m : r.witness.members) w.push_back(join_labels(*space, m));
  out.aggregate = {{"value", r.value},
                   {"exact", r.exact},
                   {"nodes_explored", r.nodes_explored},
                   {"ord_input", ord(alpha, Subset::full(p.size()))},
                   {"elements", p.size()},
                   {"witness", w}};
  if (!refines(r.witness, alpha)) out.failures.push_back("witness does not refine the input cover");
  if (!is_open_cover(*space, Subset::full(p.size()), r.witness)) out.failures.push_back("witness is not an open cover");
  if (ord(r.witness, Subset::full(p.size())) != r.value) out.failures.push_back("witness order differs from value");
  return out;
}

// ---------------------------------------------------------------- mdim

Json mdim_json(const MdimReport& r) {
  return {{"mean_over_n", doubles(r.mean_over_n)},
          {"running_inf", doubles(r.running_inf)},
          {"estimate", r.estimate},
          {"corollary_violations", r.corollary_violations}};
}

VerbOutput mdim(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  const auto n_max = ctx.root.get<std::size_t>("n_max");
  if (n_max == 0) throw ConfigError("n_max must be positive", "n_max");
  std::vector<Cover> covers;
  std::vector<std::pair<std::size_t, std::size_t>> refinements;
  if (ctx.root.has("cover")) covers.push_back(parse_cover(ctx.root.at("cover"), sys.carrier(), "cover"));
  if (const Json* cs = ctx.root.find("covers")) {
    if (!cs->is_array() || cs->empty()) throw ConfigError("expected a nonempty list of covers", "covers");
    for (std::size_t i = 0; i < cs->size(); ++i)
      covers.push_back(parse_cover((*cs)[i], sys.carrier(), "covers[" + std::to_string(i) + "]"));
  }
  if (covers.empty()) throw ConfigError("give cover or covers", "cover");
  for (const auto& pr : ctx.root.get_or<std::vector<std::vector<std::size_t>>>("refinements", {})) {
    if (pr.size() != 2 || pr[0] >= covers.size() || pr[1] >= covers.size())
      throw ConfigError("each refinement is [finer, coarser] cover indices", "refinements");
    refinements.emplace_back(pr[0], pr[1]);
  }
  const bool kingman = ctx.root.get_or<bool>("kingman", false);
  const bool export_system = ctx.root.get_or<bool>("export_system", false);
  const WeightedPaths paths = load_paths(ctx, b.env, n_max);

  const MdimSupReport rep = mdim_sup_estimate(sys, covers, refinements, paths, n_max, ctx.threads);
  VerbOutput out;
  CsvTable csv({"cover", "path_id", "n", "q_n", "ord_joined", "joined_members", "nodes", "mdim_estimate"});
  for (std::size_t c = 0; c < rep.per_cover.size(); ++c)
    for (const auto& row : rep.per_cover[c].rows)
      csv.add({cell(c), cell(row.path), cell(row.n), cell(row.q), cell(row.ord_joined), cell(row.joined_members),
               std::to_string(row.nodes), cell(rep.per_cover[c].running_inf[row.n - 1])});
  out.csv = csv.str();
  Json per = Json::array();
  for (std::size_t c = 0; c < rep.per_cover.size(); ++c) {
    per.push_back(mdim_json(rep.per_cover[c]));
    if (rep.per_cover[c].corollary_violations)
      out.failures.push_back(fmt::format("cover {}: q_n exceeded (#alpha)^n - 1 or ord of the joined cover", c));
  }
  Json mono = Json::array();
  for (auto [fine, coarse, n] : rep.monotonicity_failures) {
    mono.push_back({fine, coarse, n});
    out.failures.push_back(fmt::format("refinement monotonicity failed: cover {} vs {} at n={}", fine, coarse, n));
  }
  out.aggregate = {{"covers", per},
                   {"estimate", rep.estimate},
                   {"monotonicity_failures", mono},
                   {"exact_expectation", paths.exact},
                   {"paths", paths.paths.size()}};
  if (kingman) {
    std::size_t violations = 0;
    for (std::size_t c = 0; c < covers.size(); ++c)
      for (const auto& path : paths.paths) violations += kingman_check(sys, path, covers[c], n_max).size();
    out.aggregate["kingman_violations"] = violations;
    if (violations) out.failures.push_back(fmt::format("{} Kingman subadditivity violations", violations));
  }
  if (export_system) out.aggregate["system"] = system_to_json(sys);
  return out;
}

// ---------------------------------------------------------------- mmdim / htop

MmdimOptions metric_options(const Context& ctx) {
  MmdimOptions o;
  o.solve.mode = ctx.mode;
  o.solve.exact_cap = ctx.root.get_or<std::size_t>("exact_cap", 64);
  o.subsample = ctx.root.get_or<std::size_t>("subsample", 0);
  o.threads = ctx.threads;
  return o;
}

std::vector<double> eps_grid(const Reader& root) {
  if (root.has("eps_grid")) return root.get<std::vector<double>>("eps_grid");
  return {0.25, 0.125, 0.0625, 0.03125, 0.015625};
}

VerbOutput mmdim(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  sys.metric();
  const auto grid = eps_grid(ctx.root);
  const auto n_list = increasing_list(ctx.root, "n_list");
  MmdimOptions opt = metric_options(ctx);
  opt.compute_cov = ctx.root.get_or<bool>("compute_cov", true);
  const WeightedPaths paths = load_paths(ctx, b.env, n_list.back());
  const MmdimReport rep = mmdim_estimate(sys, paths, grid, n_list, opt);

  VerbOutput out;
  CsvTable csv({"path_id", "eps", "n", "sep", "cov", "sep_mode", "cov_mode"});
  for (const auto& c : rep.cells)
    csv.add({cell(c.path), cell(c.eps), cell(c.n), cell(c.sep), opt.compute_cov ? cell(c.cov) : "",
             cell(to_string(c.sep_bound)), opt.compute_cov ? cell(to_string(c.cov_bound)) : "skipped"});
  out.csv = csv.str();
  Json fibers = Json::array();
  for (const auto& f : rep.fibers) {
    Json seq = Json::array();
    for (const auto& s : f.s_sep_sequence) seq.push_back(doubles(s));
    fibers.push_back({{"path_id", f.path},
                      {"S_cov", doubles(f.s_cov)},
                      {"S_sep", doubles(f.s_sep)},
                      {"S_sep_sequence", seq},
                      {"ratio", doubles(f.ratio)},
                      {"min_ratio", f.min_ratio},
                      {"slope", f.slope}});
  }
  out.aggregate = {{"eps_grid", doubles(grid)},
                   {"n_list", n_list},
                   {"fibers", fibers},
                   {"mean_min_ratio", rep.mean_min_ratio},
                   {"mean_slope", rep.mean_slope},
                   {"stderr_min_ratio", rep.stderr_min_ratio},
                   {"stderr_slope", rep.stderr_slope},
                   {"exact_expectation", rep.exact_expectation},
                   {"mixed_modes", rep.mixed_modes}};
  // Exact cells must be monotone: sep and cov grow as eps shrinks and as n grows.
  const std::size_t ne = grid.size(), nn = n_list.size();
  for (std::size_t p = 0; p < paths.paths.size(); ++p)
    for (std::size_t e = 0; e < ne; ++e)
      for (std::size_t k = 0; k < nn; ++k) {
        const auto& c = rep.cells[(p * ne + e) * nn + k];
        auto check = [&](const MmdimCell& lo, const char* what) {
          if (lo.sep_bound == Bound::Exact && c.sep_bound == Bound::Exact && lo.sep > c.sep)
            out.failures.push_back(fmt::format("sep not monotone in {} (path {}, eps {}, n {})", what, c.path,
                                               format_double(c.eps), c.n));
          if (opt.compute_cov && lo.cov_bound == Bound::Exact && c.cov_bound == Bound::Exact && lo.cov > c.cov)
            out.failures.push_back(fmt::format("cov not monotone in {} (path {}, eps {}, n {})", what, c.path,
                                               format_double(c.eps), c.n));
        };
        if (e > 0) check(rep.cells[(p * ne + e - 1) * nn + k], "eps");
        if (k > 0) check(rep.cells[(p * ne + e) * nn + k - 1], "n");
      }
  return out;
}

VerbOutput htop(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  sys.metric();
  const auto eps_min = ctx.root.get<double>("eps_min");
  const auto n_list = increasing_list(ctx.root, "n_list");
  const MmdimOptions opt = metric_options(ctx);
  const WeightedPaths paths = load_paths(ctx, b.env, n_list.back());
  const HtopReport rep = htop_estimate(sys, paths, eps_min, n_list, opt);
  VerbOutput out;
  CsvTable csv({"path_id", "n", "sep", "mode", "rate"});
  for (const auto& r : rep.rows) csv.add({cell(r.path), cell(r.n), cell(r.sep), cell(to_string(r.bound)), cell(r.rate)});
  out.csv = csv.str();
  bool greedy = false;
  for (const auto& r : rep.rows) greedy = greedy || r.bound != Bound::Exact;
  out.aggregate = {{"eps_min", eps_min},
                   {"estimate", rep.estimate},
                   {"per_path", doubles(rep.per_path)},
                   {"stderr", rep.stderr_estimate},
                   {"exact_expectation", rep.exact_expectation},
                   {"mixed_modes", greedy}};
  return out;
}

// ---------------------------------------------------------------- ocap / small

VerbOutput ocap(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  const Subset e = parse_subset(ctx.root.at("set"), sys.carrier(), "set");
  const auto n_list = increasing_list(ctx.root, "n_list");
  const bool subadd = ctx.root.get_or<bool>("subadditivity", true);
  const auto tests = ctx.root.get_or<std::size_t>("test_functions", 0);
  const std::size_t n_max = n_list.back();
  const WeightedPaths paths = load_paths(ctx, b.env, n_max + 1);
  const OcapReport rep = ocap_estimate(sys, paths, e, n_list, ctx.threads, subadd);

  VerbOutput out;
  CsvTable csv({"path_id", "n", "b_n", "rate"});
  for (const auto& r : rep.rows) csv.add({cell(r.path), cell(r.n), cell(r.b), cell(r.rate)});
  out.csv = csv.str();
  Json measures = Json::array();
  for (std::size_t p = 0; p < paths.paths.size(); ++p) {
    const auto mu = empirical_maximizing_measure(sys, paths.paths[p], e, n_max);
    const double bn = rep.per_path[p];
    Json m = {{"path_id", paths.paths[p].index}, {"mass", mu.mass()}, {"b_n_over_n", bn}};
    if (mu.mass() != bn) out.failures.push_back(fmt::format("path {}: measure mass differs from b_n/n", p));
    Philox4x32 gen(stream_key(ctx.seed ^ 0x7465737466ull, p));
    double worst = 0.0;
    for (std::size_t t = 0; t < tests; ++t) {
      TestFunction f;
      f.values.assign(b.env.size(), std::vector<double>(sys.carrier_size()));
      for (auto& row : f.values)
        for (auto& v : row) v = 2.0 * gen.uniform() - 1.0;
      const double d = invariance_defect(mu, f);
      const double bound = 2.0 * f.sup_norm() / static_cast<double>(n_max);
      worst = std::max(worst, d / bound);
      if (d > bound) out.failures.push_back(fmt::format("path {}: invariance defect above 2|f|/n", p));
    }
    if (tests) m["max_defect_over_bound"] = worst;
    measures.push_back(m);
  }
  out.aggregate = {{"estimate", rep.estimate},
                   {"per_path", doubles(rep.per_path)},
                   {"subadditivity_checked", rep.subadditivity_checked},
                   {"subadditivity_violations", rep.subadditivity_violations},
                   {"measures", measures},
                   {"exact_expectation", rep.exact_expectation}};
  if (rep.subadditivity_violations)
    out.failures.push_back(fmt::format("{} b_n subadditivity violations", rep.subadditivity_violations));
  return out;
}

VerbOutput small(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  const Subset e = parse_subset(ctx.root.at("set"), sys.carrier(), "set");
  const auto n_max = ctx.root.get<std::size_t>("n_max");
  if (n_max == 0) throw ConfigError("n_max must be positive", "n_max");
  const auto tol = ctx.root.get<double>("tol");
  const WeightedPaths paths = load_paths(ctx, b.env, n_max);
  const SmallnessVerdict v = smallness_test(sys, e, paths, n_max, tol);
  VerbOutput out;
  CsvTable csv({"path_id", "n", "rate", "small"});
  for (std::size_t p = 0; p < paths.paths.size(); ++p)
    csv.add({cell(paths.paths[p].index), cell(n_max), cell(v.per_path[p]), cell(v.per_path[p] <= tol)});
  out.csv = csv.str();
  // A single periodic point has rate about 1/m on an m-point orbit; this makes that scaling visible.
  out.aggregate = {{"small", v.small},
                   {"max_estimate", v.max_estimate},
                   {"tol", tol},
                   {"estimate_times_m", v.max_estimate * static_cast<double>(sys.carrier_size())}};
  if (auto scan = ctx.root.child_opt("ball_scan")) {
    const std::size_t center = parse_point(scan->at("center"), sys.carrier(), scan->path_of("center"));
    const auto radii = scan->get<std::vector<double>>("radii");
    scan->finish();
    Json rows = Json::array();
    std::size_t small_count = 0;
    for (const auto& r : ball_boundary_scan(sys, paths.paths.front(), center, radii, n_max, tol)) {
      rows.push_back({{"radius", r.radius}, {"boundary_size", r.boundary_size}, {"ocap", r.ocap}, {"small", r.small}});
      small_count += r.small;
    }
    out.aggregate["ball_scan"] = rows;
    out.aggregate["ball_scan_small_fraction"] =
        radii.empty() ? 0.0 : static_cast<double>(small_count) / static_cast<double>(radii.size());
  }
  return out;
}

// ---------------------------------------------------------------- sbp-embed

VerbOutput sbp_embed(const Context& ctx) {
  SystemBundle b = load_system(ctx);
  const BundleSystem& sys = *b.sys;
  const auto& space = sys.metric();
  const Reader s = ctx.root.child("sbp");
  const Cover alpha = parse_cover(s.at("cover"), sys.carrier(), "sbp.cover");
  const auto margins = s.get<std::vector<double>>("margins");
  const auto delta = s.get<double>("delta");
  const auto radius = s.get_or<double>("radius", 0.0);
  const auto variant_name = s.get_or<std::string>("variant", "recursive");
  if (variant_name != "recursive" && variant_name != "literal")
    throw ConfigError("variant is recursive or literal", "sbp.variant");
  const PhiVariant variant = variant_name == "recursive" ? PhiVariant::Recursive : PhiVariant::Literal;
  const auto eps = s.get<double>("eps");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive", "sbp.eps");
  const auto n_list = increasing_list(s, "n_list");
  s.finish();

  const ShrunkCover shrunk = at_config("sbp.margins", [&] { return shrink_cover(space, alpha, margins, radius); });
  const PartitionOfUnity pu = at_config("sbp.delta", [&] { return partition_of_unity(space, shrunk, delta, variant); });
  const std::vector<PartitionOfUnity> pus(b.env.size(), pu);
  const WeightedPaths paths = load_paths(ctx, b.env, n_list.back());

  VerbOutput out;
  double worst_sum = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    double sum = 0.0;
    for (std::size_t j = 0; j < pu.size(); ++j) sum += pu.phi[j][x];
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  if (variant == PhiVariant::Recursive && worst_sum > 1e-12)
    out.failures.push_back("partition of unity does not sum to one");

  CsvTable csv({"path_id", "N", "max_I", "max_frequency", "eps_N", "pass"});
  Json smallest = Json::array();
  for (const auto& path : paths.paths) {
    const auto rows = sbp_scan(sys, path, pus, n_list, eps, ctx.threads);
    Json first = nullptr;
    for (const auto& r : rows) {
      csv.add({cell(path.index), cell(r.n), cell(r.max_index_size), cell(r.max_frequency),
               cell(eps * static_cast<double>(r.n)), cell(r.pass)});
      if (r.pass && first.is_null()) first = r.n;
    }
    smallest.push_back(first);
  }
  out.csv = csv.str();

  const auto cert = sbp_embedding(sys, paths.paths.front(), pus, n_list.back(), eps);
  Json sizes = Json::array();
  for (const auto& idx : cert.index) sizes.push_back(idx.size());
  Json frac = Json::array();
  pu.fractional.for_each([&](std::size_t x) { frac.push_back(x); });
  Json shrunk_json = Json::array();
  for (const auto& m : shrunk.shrunk.members) shrunk_json.push_back(m.indices());
  out.aggregate = {{"smallest_passing_N", smallest},
                   {"variant", variant_name},
                   {"phi_sum_max_deviation", worst_sum},
                   {"fractional_set", frac},
                   {"shrunk_cover", shrunk_json},
                   {"certificate",
                    {{"N", cert.n},
                     {"k", cert.k},
                     {"eps", cert.eps},
                     {"index_sizes", sizes},
                     {"max_index_size", cert.max_index_size},
                     {"index_bound_ok", cert.index_bound_ok},
                     {"corner_ok", cert.corner_ok},
                     {"compatibility_ok", cert.compatibility_ok},
                     {"collision_groups", cert.collision_groups},
                     {"dimension_bound", cert.dimension_bound},
                     {"pass", cert.pass()}}}};
  return out;
}

}  // namespace

VerbOutput run_verb(std::string_view verb, const Json& config, const RunOptions& opt) {
  if (verb == "selftest") return run_selftest(opt);
  const auto& verbs = known_verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end())
    throw ConfigError("unknown verb '" + std::string(verb) + "'", "verb");
  const auto start = std::chrono::steady_clock::now();
  const Reader root(config, "");
  if (root.has("verb") && root.get<std::string>("verb") != verb)
    throw ConfigError("config is written for verb '" + root.get<std::string>("verb") + "'", "verb");
  root.find("description");
  Context ctx{root};
  ctx.seed = root.get<std::uint64_t>("seed");
  if (opt.seed) ctx.seed = *opt.seed;
  ctx.threads = root.get_or<std::size_t>("threads", std::max(1u, std::thread::hardware_concurrency()));
  if (opt.threads) ctx.threads = *opt.threads;
  if (ctx.threads == 0) throw ConfigError("threads must be positive", "threads");
  if (root.has("mode")) ctx.mode = solve_mode_from_string(root.get<std::string>("mode"));
  if (opt.mode) ctx.mode = *opt.mode;

  VerbOutput out;
  if (verb == "dcover") out = dcover(ctx);
  else if (verb == "mdim") out = mdim(ctx);
  else if (verb == "mmdim") out = mmdim(ctx);
  else if (verb == "htop") out = htop(ctx);
  else if (verb == "ocap") out = ocap(ctx);
  else if (verb == "small") out = small(ctx);
  else out = sbp_embed(ctx);
  root.finish();

  out.verb = std::string(verb);
  out.aggregate["verb"] = out.verb;
  out.aggregate["config_hash"] = config_hash(config, ctx.seed);
  out.aggregate["version"] = std::string(kVersion);
  out.aggregate["seed"] = ctx.seed;
  out.aggregate["threads"] = ctx.threads;
  out.aggregate["mode"] = std::string(to_string(ctx.mode));
  if (!ctx.environment.is_null()) out.aggregate["environment"] = ctx.environment;
  out.aggregate["assertions_passed"] = out.failures.empty();
  out.aggregate["failures"] = out.failures;
  out.aggregate["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace rmdim::app
