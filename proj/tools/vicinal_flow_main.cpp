// vicinal-flow: spectral minimizing-movement solver for the vicinal-surface
// evolution u_t = -[H(u_x) + Phi_a'(u_xx)]_xx on the 2*pi-periodic interval,
// with built-in certification of the computed trajectories.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vicinal/vicinal.hpp"

namespace {

int load_config(const std::string& path, const std::string& out_override,
                vicinal::RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config %s\n", path.c_str());
    return vicinal::kExitIo;
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    cfg = vicinal::parse_config(text.str());
  } catch (const vicinal::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return vicinal::kExitConfig;
  }
  if (!out_override.empty()) cfg.output_dir = out_override;
  return vicinal::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vicinal-flow: barrier-constrained surface evolution solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "path to the run configuration");
    if (need_config) opt->required();
    sub->add_option("--out", out_dir, "override the output directory");
  };

  auto* run = app.add_subcommand("run", "integrate and write snapshots + energy log");
  add_common(run, true);
  auto* verify = app.add_subcommand("verify", "re-certify a finished run from its files");
  add_common(verify, true);
  auto* sweep = app.add_subcommand("sweep", "run several overridden configs concurrently");
  add_common(sweep, true);
  sweep->add_option("--set", overrides,
                    "comma-separated key=value overrides; one run per --set");
  auto* selftest = app.add_subcommand("selftest", "run the built-in invariant suites");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vicinal::kExitConfig;
  }

  if (app.got_subcommand("selftest")) return vicinal::cmd_selftest();

  vicinal::RunConfig cfg;
  if (const int rc = load_config(config_path, out_dir, cfg); rc != vicinal::kExitOk)
    return rc;

  if (app.got_subcommand("run")) return vicinal::cmd_run(cfg);
  if (app.got_subcommand("verify")) return vicinal::cmd_verify(cfg);
  if (app.got_subcommand("sweep")) return vicinal::cmd_sweep(cfg, overrides);
  return vicinal::kExitConfig;
}
