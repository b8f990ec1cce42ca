#include "hfb/runner.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "hfb/bogoliubov.hpp"
#include "hfb/diagnostics.hpp"
#include "hfb/fock.hpp"

namespace hfb {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json config_echo(const RunConfig& c) {
  return json{
      {"grid", {{"d", c.d}, {"n", c.n}, {"L", c.L}}},
      {"potential",
       {{"profile", c.potential.profile},
        {"amplitude", c.potential.amplitude},
        {"sigma", c.potential.sigma},
        {"beta", c.potential.beta},
        {"N", c.potential.N}}},
      {"initial",
       {{"phi_profile", c.phi_profile},
        {"phi_width", c.phi_width},
        {"phi_shift", c.phi_shift},
        {"phi_wavenumber", c.phi_wavenumber},
        {"k_mode", c.k_mode},
        {"k_amplitude", c.k_amplitude},
        {"k_width", c.k_width}}},
      {"time",
       {{"T", c.T}, {"dt", c.dt}, {"scheme", c.scheme}, {"output_cadence", c.output_cadence}}},
      {"oracle",
       {{"enabled", c.oracle_enabled},
        {"modes", c.oracle_modes},
        {"n_max_policy", c.n_max_policy},
        {"krylov_tol", c.krylov_tol}}},
      {"diagnostics",
       {{"enabled", c.diagnostics_enabled}, {"epsilon", c.epsilon}, {"s_list", c.s_list}}},
      {"output", {{"directory", c.directory}, {"seed", c.seed}}}};
}

void write_monitor_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path);
  f << "t,trace_gamma,energy,sym_residual_lambda,herm_residual_gamma,l2_sh2k,linf_sh2k\n";
  for (const MonitorRecord& m : traj.monitors)
    f << fmt(m.t) << ',' << fmt(m.trace_gamma) << ',' << fmt(m.energy) << ','
      << fmt(m.sym_residual_lambda) << ',' << fmt(m.herm_residual_gamma) << ','
      << fmt(m.l2_sh2k) << ',' << fmt(m.linf_sh2k) << '\n';
}

json drift_stats(const Trajectory& traj) {
  if (traj.monitors.empty()) return json::object();
  double tr0 = traj.monitors.front().trace_gamma;
  double e0 = traj.monitors.front().energy;
  double dtr = 0, de = 0, sym = 0, herm = 0;
  for (const MonitorRecord& m : traj.monitors) {
    dtr = std::max(dtr, std::abs(m.trace_gamma - tr0) / std::max(std::abs(tr0), 1e-300));
    de = std::max(de, std::abs(m.energy - e0) / std::max(std::abs(e0), 1e-300));
    sym = std::max(sym, m.sym_residual_lambda);
    herm = std::max(herm, m.herm_residual_gamma);
  }
  return json{{"trace_gamma_rel_drift", dtr},
              {"energy_rel_drift", de},
              {"max_sym_residual_lambda", sym},
              {"max_herm_residual_gamma", herm}};
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Trajectory run_from_config(const RunConfig& cfg) {
  Grid g = cfg.make_grid();
  Field phi0 = cfg.make_phi0(g);
  Kernel k0 = cfg.make_k0(g, phi0);
  HFBState s0 = cfg.k_mode == "zero" ? coherent_initial_state(phi0, cfg.potential)
                                     : pair_initial_state(phi0, k0, cfg.potential);
  return evolve(s0, cfg.make_integrator());
}

int n_max_from_policy(const RunConfig& cfg) {
  if (cfg.n_max_policy.rfind("fixed:", 0) == 0)
    return std::stoi(cfg.n_max_policy.substr(6));
  double mean = static_cast<double>(cfg.potential.N);  // ||phi|| = 1
  return static_cast<int>(std::ceil(mean + 8 * std::sqrt(mean) + 10));
}

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj,
                      const PotentialSpec& pot) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write("HFBTRAJ1", 8);
  const Grid& g = traj.frames.front().phi.grid;
  auto w64 = [&](std::int64_t v) { f.write(reinterpret_cast<char*>(&v), 8); };
  auto wd = [&](double v) { f.write(reinterpret_cast<char*>(&v), 8); };
  w64(g.d());
  w64(g.n());
  wd(g.L());
  w64(pot.N);
  wd(pot.amplitude);
  wd(pot.sigma);
  wd(pot.beta);
  w64(static_cast<std::int64_t>(traj.frames.size()));
  for (const HFBState& s : traj.frames) {
    wd(s.t);
    f.write(reinterpret_cast<const char*>(s.phi.values.data()), 16 * g.total());
    f.write(reinterpret_cast<const char*>(s.Lambda.values.data()),
            16 * g.total() * g.total());
    f.write(reinterpret_cast<const char*>(s.Gamma.values.data()),
            16 * g.total() * g.total());
  }
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "HFBTRAJ1")
    throw std::runtime_error("not a trajectory file: " + path);
  auto r64 = [&]() {
    std::int64_t v;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto rd = [&]() {
    double v;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  int d = static_cast<int>(r64());
  int n = static_cast<int>(r64());
  double L = rd();
  PotentialSpec pot;
  pot.N = r64();
  pot.amplitude = rd();
  pot.sigma = rd();
  pot.beta = rd();
  std::int64_t nframes = r64();
  if (!f || nframes < 0 || nframes > 1000000)
    throw std::runtime_error("corrupt trajectory header: " + path);
  Grid g(d, n, L);
  Trajectory traj;
  for (std::int64_t j = 0; j < nframes; ++j) {
    HFBState s;
    s.t = rd();
    s.N = pot.N;
    s.potential = pot;
    s.phi = Field(g);
    s.Lambda = Kernel(g, Symmetry::Symmetric);
    s.Gamma = Kernel(g, Symmetry::Hermitian);
    f.read(reinterpret_cast<char*>(s.phi.values.data()), 16 * g.total());
    f.read(reinterpret_cast<char*>(s.Lambda.values.data()), 16 * g.total() * g.total());
    f.read(reinterpret_cast<char*>(s.Gamma.values.data()), 16 * g.total() * g.total());
    if (!f) throw std::runtime_error("truncated trajectory file: " + path);
    s.vN = build_vN(pot, g);
    traj.frames.push_back(std::move(s));
  }
  return traj;
}

int cmd_evolve(const RunConfig& cfg) {
  Timer timer;
  fs::create_directories(cfg.directory);
  Trajectory traj = run_from_config(cfg);
  write_monitor_csv(cfg.directory + "/monitors.csv", traj);
  write_trajectory(cfg.directory + "/trajectory.bin", traj, cfg.potential);

  json summary{{"command", "evolve"},
               {"config", config_echo(cfg)},
               {"drift", drift_stats(traj)},
               {"frames", traj.frames.size()},
               {"aborted", traj.aborted},
               {"abort_reason", traj.abort_reason},
               {"wall_clock_s", timer.seconds()},
               {"files", {{"monitors", "monitors.csv"}, {"trajectory", "trajectory.bin"}}}};
  std::ofstream(cfg.directory + "/summary.json") << summary.dump(2) << '\n';
  if (traj.aborted) {
    std::cerr << "evolve: invariant abort: " << traj.abort_reason << '\n';
    return kExitInvariantAbort;
  }
  return kExitOk;
}

int cmd_oracle_compare(const RunConfig& cfg) {
  Timer timer;
  fs::create_directories(cfg.directory);
  Grid g = cfg.make_grid();
  Field phi0 = cfg.make_phi0(g);
  Kernel k0 = cfg.make_k0(g, phi0);

  int n_max = n_max_from_policy(cfg);
  double dim = 1;
  for (int i = 1; i <= cfg.oracle_modes; ++i)
    dim *= static_cast<double>(n_max + i) / i;
  if (dim > 2e6) {
    std::cerr << "oracle: basis dimension " << dim << " exceeds the memory bound\n";
    return kExitCutoffOverflow;
  }

  FockBasis basis(g, cfg.oracle_modes, n_max);
  FockVector psi = vacuum(basis);
  if (cfg.k_mode != "zero") psi = pair_rotate(psi, PairKernel(k0));
  psi = coherent_displace(psi, phi0, cfg.potential.N);
  SecondQuantizedOperator H = build_hamiltonian(basis, build_vN(cfg.potential, g),
                                                cfg.potential.N);

  HFBState s0 = cfg.k_mode == "zero" ? coherent_initial_state(phi0, cfg.potential)
                                     : pair_initial_state(phi0, k0, cfg.potential);
  Trajectory traj = evolve(s0, cfg.make_integrator());
  if (traj.aborted) {
    std::cerr << "oracle: PDE side aborted: " << traj.abort_reason << '\n';
    return kExitInvariantAbort;
  }

  std::ofstream csv(cfg.directory + "/oracle.csv");
  csv << "t,fock_error,theta,tail_mass\n";
  double prev_t = 0;
  FockVector cur = psi;
  double final_error = 0;
  for (const HFBState& frame : traj.frames) {
    cur = evolve_exact(cur, H, frame.t - prev_t);
    prev_t = frame.t;
    auto [psi_pair, omega] = recover_pair(frame.Lambda, frame.Gamma, frame.phi, frame.N);
    Kernel kt = k_from_pair(psi_pair).k;
    double theta = 0;
    final_error = fock_error(cur, frame.phi, kt, frame.N, &theta);
    csv << fmt(frame.t) << ',' << fmt(final_error) << ',' << fmt(theta) << ','
        << fmt(cur.tail_mass()) << '\n';
  }

  json summary{{"command", "oracle"},
               {"config", config_echo(cfg)},
               {"basis_dimension", basis.size()},
               {"n_max", n_max},
               {"final_fock_error", final_error},
               {"wall_clock_s", timer.seconds()},
               {"files", {{"series", "oracle.csv"}}}};
  std::ofstream(cfg.directory + "/summary.json") << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis,
              const std::vector<double>& values) {
  Timer timer;
  if (axis != "N" && axis != "beta" && axis != "dt" && axis != "n") {
    std::cerr << "sweep: unknown axis '" << axis << "'\n";
    return kExitConfigError;
  }
  fs::create_directories(cfg.directory);
  std::ofstream csv(cfg.directory + "/sweep.csv");
  csv << axis << ",exit_code,trace_drift,energy_drift,final_l2_sh2k,fock_error\n";
  bool all_ok = true;
  json rows = json::array();
  for (double v : values) {
    RunConfig c = cfg;
    if (axis == "N") c.potential.N = static_cast<long>(v);
    if (axis == "beta") c.potential.beta = v;
    if (axis == "dt") c.dt = v;
    if (axis == "n") c.n = static_cast<int>(v);
    c.directory = cfg.directory + "/" + axis + "_" + fmt(v);
    int code = kExitOk;
    double tr = 0, en = 0, s2 = 0, fe = -1;
    try {
      c.validate();
      Trajectory traj = run_from_config(c);
      json d = drift_stats(traj);
      tr = d["trace_gamma_rel_drift"];
      en = d["energy_rel_drift"];
      if (!traj.monitors.empty()) s2 = traj.monitors.back().l2_sh2k;
      if (traj.aborted) code = kExitInvariantAbort;
      if (code == kExitOk && c.oracle_enabled) {
        code = cmd_oracle_compare(c);
        if (code == kExitOk) {
          std::ifstream sj(c.directory + "/summary.json");
          json j = json::parse(sj);
          fe = j["final_fock_error"];
        }
      }
    } catch (const std::exception& e) {
      std::cerr << "sweep row " << axis << "=" << v << " failed: " << e.what() << '\n';
      code = kExitConfigError;
    }
    all_ok = all_ok && code == kExitOk;
    csv << fmt(v) << ',' << code << ',' << fmt(tr) << ',' << fmt(en) << ','
        << fmt(s2) << ',' << fmt(fe) << '\n';
    rows.push_back(json{{"value", v}, {"exit_code", code}});
  }
  json summary{{"command", "sweep"},
               {"axis", axis},
               {"config", config_echo(cfg)},
               {"rows", rows},
               {"wall_clock_s", timer.seconds()}};
  std::ofstream(cfg.directory + "/summary.json") << summary.dump(2) << '\n';
  return all_ok ? kExitOk : kExitInvariantAbort;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& trajectory_path) {
  Timer timer;
  fs::create_directories(cfg.directory);
  Trajectory traj;
  try {
    traj = read_trajectory(trajectory_path);
  } catch (const std::exception& e) {
    std::cerr << "diagnose: " << e.what() << '\n';
    return kExitConfigError;
  }

  json out{{"command", "diagnose"}, {"trajectory", trajectory_path}};
  json collapsing = json::object();
  for (double s : cfg.s_list) {
    collapsing["S_s=" + fmt(s)] = collapsing_norm(traj, s, CollapseVariant::S);
    collapsing["W_s=" + fmt(s)] = collapsing_norm(traj, s, CollapseVariant::W);
  }
  out["collapsing"] = collapsing;

  auto report_to_json = [](const NormReport& r) {
    return json{{"values", r.values}, {"params", r.params}};
  };
  out["nt_norms"] = report_to_json(nt_norms(traj, cfg.epsilon));
  out["pair_norms"] =
      report_to_json(pair_norm_report(traj, traj.frames.front().N));
  if (traj.frames.size() >= 3) {
    NormReport bb = bbgky_residual(traj);
    out["bbgky"] = report_to_json(bb);
    // flag residuals that are implausibly large for a consistent trajectory
    double dt_out = bb.params["dt_out"];
    double bound = 100.0 * dt_out * dt_out *
                   std::max(1.0, traj.frames.front().N * 10.0);
    out["bbgky_flag"] = bb.values["bb1"] > bound || bb.values["bb2"] > bound ||
                        bb.values["bb3"] > bound;
  }
  out["wall_clock_s"] = timer.seconds();
  std::ofstream(cfg.directory + "/diagnose.json") << out.dump(2) << '\n';
  return kExitOk;
}

}  // namespace hfb
