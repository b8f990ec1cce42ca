// Experiment runner for the condensate / pair-excitation laboratory.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hfb/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long seed = -1;
};

void add_common(CLI::App* sub, CommonOpts& o, bool config_required = true) {
  auto* c = sub->add_option("--config", o.config_path, "configuration file");
  if (config_required) c->required();
  sub->add_option("--out", o.out_dir, "output directory (overrides config)");
  sub->add_option("--seed", o.seed, "random seed (overrides config)");
}

hfb::RunConfig load(const CommonOpts& o) {
  hfb::RunConfig cfg =
      o.config_path.empty() ? hfb::RunConfig{} : hfb::parse_config_file(o.config_path);
  if (!o.out_dir.empty()) cfg.directory = o.out_dir;
  if (o.seed >= 0) cfg.seed = static_cast<unsigned long>(o.seed);
  cfg.validate();
  return cfg;
}

// "N=2,4,8" -> axis name and values
std::pair<std::string, std::vector<double>> parse_axis(const std::string& spec) {
  size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--axis expects NAME=v1,v2,...");
  std::string name = spec.substr(0, eq);
  std::vector<double> vals;
  std::string rest = spec.substr(eq + 1);
  size_t pos = 0;
  while (pos <= rest.size()) {
    size_t comma = rest.find(',', pos);
    std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (tok.empty()) throw std::invalid_argument("--axis: empty value");
    vals.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (vals.empty()) throw std::invalid_argument("--axis: no values");
  return {name, vals};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled condensate / pair-excitation dynamics laboratory"};
  app.require_subcommand(1);

  CommonOpts evolve_o, oracle_o, sweep_o, diag_o;
  std::string axis_spec, traj_path;

  CLI::App* evolve = app.add_subcommand("evolve", "integrate the coupled system");
  add_common(evolve, evolve_o);

  CLI::App* oracle = app.add_subcommand("oracle", "compare against the exact Fock evolution");
  add_common(oracle, oracle_o);

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep, sweep_o);
  sweep->add_option("--axis", axis_spec, "axis NAME=v1,v2,... (N, beta, dt, n)")->required();

  CLI::App* diagnose = app.add_subcommand("diagnose", "norm reports for a stored trajectory");
  add_common(diagnose, diag_o, false);
  diagnose->add_option("trajectory", traj_path, "trajectory .bin file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) return hfb::cmd_evolve(load(evolve_o));
    if (oracle->parsed()) return hfb::cmd_oracle_compare(load(oracle_o));
    if (sweep->parsed()) {
      auto [name, vals] = parse_axis(axis_spec);
      return hfb::cmd_sweep(load(sweep_o), name, vals);
    }
    if (diagnose->parsed()) return hfb::cmd_diagnose(load(diag_o), traj_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hfb::kExitConfigError;
  }
  return hfb::kExitConfigError;
}
