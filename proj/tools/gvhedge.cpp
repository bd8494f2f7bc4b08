// gvhedge: batch runner for the conditional-mean hedging experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gvh/commands.hpp"
#include "gvh/config.hpp"
#include "gvh/errors.hpp"

namespace {

struct Args {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out_dir;
  bool corrupt_kernel = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gvh::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path output_dir(const Args& a, const gvh::ExperimentConfig& cfg) {
  if (!a.out_dir.empty()) return a.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(gvh::kOutDirEnv); env && *env) return env;
  return "gvhedge-out";
}

using Command = gvh::CommandResult (*)(const gvh::ExperimentConfig&, const gvh::RunOptions&);

int run(const Args& a, Command cmd) {
  try {
    gvh::ExperimentConfig cfg = gvh::parse_config(read_file(a.config_path));
    if (a.seed) cfg.seed = *a.seed;
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

    gvh::RunOptions opts;
    opts.threads = a.threads;
    opts.out_dir = output_dir(a, cfg);
    opts.out = &std::cout;
    opts.corrupt_kernel = a.corrupt_kernel;
    std::filesystem::create_directories(opts.out_dir);

    const gvh::CommandResult res = cmd(cfg, opts);
    for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
    return res.exit_code;
  } catch (const gvh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gvh::kExitConfig;
  } catch (const gvh::HedgeError& e) {
    std::cerr << "hedge aborted: " << e.what() << '\n';
    return gvh::kExitEngineAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gvh::kExitOther;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-mean hedging under Gaussian Volterra noise"};
  app.require_subcommand(1);

  Args args;
  std::optional<Command> chosen;

  auto add = [&](const char* name, const char* help, Command cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config_path, "JSON experiment config")->required();
    sub->add_option("--seed", args.seed, "override simulation.seed");
    sub->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--out-dir", args.out_dir,
                    std::string("output directory (default: output.dir, then $") +
                        gvh::kOutDirEnv + ", then ./gvhedge-out)");
    sub->callback([&chosen, cmd] { chosen = cmd; });
    return sub;
  };

  CLI::App* verify = add("verify", "run the invariant checks", gvh::cmd_verify);
  verify->add_flag("--corrupt-kernel", args.corrupt_kernel, "test hook: perturb the kernel")
      ->group("");
  add("simulate", "simulate noise and price paths", gvh::cmd_simulate);
  add("predict", "conditional prediction law along one path", gvh::cmd_predict);
  add("price", "frictionless value and delta on a (t, x) grid", gvh::cmd_price);
  add("hedge", "conditional-mean hedge with transaction costs", gvh::cmd_hedge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gvh::kExitConfig;
  }
  return run(args, *chosen);
}
