#include "afcomb/experiments.hpp"
#include "afcomb/types.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

namespace {

afc::Config load(const std::string& path, const std::string& preset_name) {
  if (!preset_name.empty()) {
    const auto& p = afc::preset(preset_name);
    return afc::Config::parse(p.text, "preset:" + p.name);
  }
  return afc::Config::load(path);
}

void print_validation(const afc::Validation& v, const std::string& source) {
  for (const auto& w : v.warnings) fmt::print(stderr, "{}: warning: {}\n", source, w);
  for (const auto& e : v.errors) fmt::print(stderr, "{}: error: {}\n", source, e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive filter combination experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::optional<std::int64_t> runs;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "run an experiment and write its CSV tables");
  auto* run_src = run->add_option_group("source");
  run_src->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  run_src->add_option("--preset", preset_name, "shipped preset name (see list-presets)");
  run_src->require_option(1);
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--runs", runs, "override the number of runs")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--threads", threads, "worker threads (default: AFCOMB_THREADS or all cores)");

  auto* val = app.add_subcommand("validate", "check a configuration against its experiment schema");
  auto* val_src = val->add_option_group("source");
  val_src->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  val_src->add_option("--preset", preset_name, "shipped preset name");
  val_src->require_option(1);

  auto* list = app.add_subcommand("list-presets", "list shipped presets");
  auto* show = app.add_subcommand("show-preset", "print a shipped preset");
  show->add_option("name", preset_name)->required();
  auto* keys = app.add_subcommand("keys", "list the keys an experiment accepts");
  std::string experiment;
  keys->add_option("experiment", experiment)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& p : afc::presets()) {
        const auto cfg = afc::Config::parse(p.text, p.name);
        fmt::print("{:<16} {}\n", p.name, cfg.raw("experiment"));
      }
      return 0;
    }
    if (*show) {
      fmt::print("{}", afc::preset(preset_name).text);
      return 0;
    }
    if (*keys) {
      for (const auto& k : afc::experiment_schema(experiment)) {
        fmt::print("{:<18} default {:<22} {}\n", k.name, k.fallback.empty() ? "-" : k.fallback, k.help);
      }
      return 0;
    }
    const afc::Config cfg = load(config_path, preset_name);
    if (*val) {
      const auto v = afc::validate_config(cfg);
      print_validation(v, cfg.source());
      if (!v.ok()) return 1;
      fmt::print("{}: ok\n", cfg.source());
      return 0;
    }
    afc::RunOptions opts;
    opts.runs = runs;
    opts.seed = seed;
    opts.threads = threads;
    const auto result = afc::run_experiment(cfg, opts);
    for (const auto& w : result.warnings) fmt::print(stderr, "{}: warning: {}\n", cfg.source(), w);
    std::filesystem::create_directories(out_dir);
    for (const auto& t : result.tables) {
      const auto path = afc::write_csv(t, out_dir);
      fmt::print("{} ({} rows)\n", path.string(), t.rows.size());
    }
  } catch (const afc::ConfigError& e) {
    fmt::print(stderr, "configuration error:\n{}\n", e.what());
    return 1;
  } catch (const afc::DivergenceError& e) {
    fmt::print(stderr, "diverged: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
