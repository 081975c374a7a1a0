#include "spraylab/io/runner.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"spraylab: numerical experiments with sprays"};
  app.require_subcommand(1);

  std::optional<std::string> out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::string config;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "seed, overrides the config");

  std::optional<std::string> name;
  bool as_json = false;
  auto* cat = app.add_subcommand("catalog", "list catalog sprays or describe one");
  cat->add_option("name", name, "catalog name");
  cat->add_flag("--json", as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (run->parsed()) return spraylab::io::run(config, {out, threads, seed});
  return spraylab::io::catalog_command(name, as_json);
}
