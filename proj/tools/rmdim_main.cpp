#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rmdim/app/verbs.hpp"
#include "rmdim/error.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rmdim;
using namespace rmdim::app;

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean dimension estimators for random bundle transformations"};
  std::string verb, config_path, out_dir = ".", mode;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string verbs_help;
  for (const auto& v : known_verbs()) verbs_help += (verbs_help.empty() ? "" : ", ") + v;
  app.add_option("verb", verb, "one of: " + verbs_help)->required();
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "output directory for <verb>.csv and <verb>.json");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: config, else all cores)");
  auto* mode_opt = app.add_option("--mode", mode, "separation solver")->check(CLI::IsMember({"exact", "greedy", "auto"}));
  app.set_version_flag("--version", std::string(kVersion));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto& verbs = known_verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end()) {
    std::cerr << "unknown verb '" << verb << "'\n\n" << app.help();
    return 1;
  }

  try {
    RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*threads_opt) opt.threads = threads;
    if (*mode_opt) opt.mode = solve_mode_from_string(mode);
    VerbOutput out;
    if (verb == "selftest") {
      out = run_selftest(opt);
    } else {
      if (!*config_opt) throw ConfigError("--config is required for verb " + verb);
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot open config file", config_path);
      Json cfg;
      try {
        cfg = Json::parse(f);
      } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what(), config_path);
      }
      out = run_verb(verb, cfg, opt);
    }
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / (verb + ".csv"), out.csv);
    write_file(fs::path(out_dir) / (verb + ".json"), dump_json(out.aggregate));
    if (!out.failures.empty()) {
      for (const auto& m : out.failures) std::cerr << "assertion failed: " << m << '\n';
      return 2;
    }
    return 0;
  } catch (const rmdim::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
