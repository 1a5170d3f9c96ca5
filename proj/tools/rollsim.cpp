#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "rollsim/commands.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
};

int run(const std::string& command, const GlobalFlags& g) {
  using namespace rollsim;
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  if (g.threads) c.threads = *g.threads;
  if (command == "develop") return cmd_develop(c);
  if (command == "roll") return cmd_roll(c);
  if (command == "rate") return cmd_rate(c);
  if (command == "scan") return cmd_scan(c);
  if (command == "check") return cmd_check(c);
  throw ConfigError("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rollsim: rolling manifolds along randomly perturbed curves"};
  app.require_subcommand(1);
  GlobalFlags g;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  auto* o_config = app.add_option("--config", g.config, "JSON run configuration");
  auto* o_seed = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* o_out = app.add_option("--out-dir", out_dir, "existing output directory (overrides the config)");
  auto* o_threads = app.add_option("--threads", threads, "worker threads; falls back to ROLLSIM_THREADS")
                        ->check(CLI::PositiveNumber);
  o_config->check(CLI::ExistingFile);
  for (const char* name : {"develop", "roll", "rate", "scan", "check"}) app.add_subcommand(name)->fallthrough();
  app.fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*o_seed) g.seed = seed;
  if (*o_out) g.out_dir = out_dir;
  if (*o_threads) g.threads = threads;
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, g);
  } catch (const rollsim::ConfigError& e) {
    std::cerr << "rollsim: " << e.what() << '\n';
    return 2;
  } catch (const rollsim::ParameterError& e) {
    std::cerr << "rollsim: " << e.what() << '\n';
    return 2;
  } catch (const rollsim::Error& e) {
    std::cerr << "rollsim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "rollsim: " << e.what() << '\n';
    return 2;
  }
}
