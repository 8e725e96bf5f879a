#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "comblab/scenario.hpp"

int main(int argc, char** argv) {
  using namespace comblab;
  CLI::App app{"comblab: p-Laplace experiments on the topologist's comb"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool allow_unconverged = false;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("config", config_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--threads", threads, "worker threads (default: COMBLAB_THREADS or 1)")->check(CLI::PositiveNumber);
  run->add_flag("--allow-unconverged", allow_unconverged, "export solutions that did not converge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 3);
  }

  RunOptions opts;
  opts.allow_unconverged = allow_unconverged;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.threads = 1;
  if (const char* env = std::getenv("COMBLAB_THREADS")) {
    try {
      opts.threads = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "error: COMBLAB_THREADS must be an integer\n";
      return 3;
    }
  }
  if (threads > 0) opts.threads = threads;

  ScenarioConfig cfg;
  try {
    cfg = load_scenario(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  }

  const auto res = run_scenario(cfg, opts);
  for (const auto& p : res.properties)
    std::cout << (p.pass ? "PASS " : "FAIL ") << p.name << (p.detail.empty() ? "" : "  " + p.detail) << '\n';
  if (!res.error.empty()) std::cerr << "error: " << res.error << '\n';
  std::cout << "exit " << res.exit_code << '\n';
  return res.exit_code;
}
