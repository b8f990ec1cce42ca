#pragma once

// Run configuration: INI-style sections with strict (unknown keys rejected)
// parsing, plus construction of grid / potential / initial data from it.

#include <string>
#include <vector>

#include "hfb/dynamics.hpp"
#include "hfb/grid.hpp"
#include "hfb/potential.hpp"

namespace hfb {

struct RunConfig {
  // [grid]
  int d = 1;
  int n = 64;
  double L = 6.283185307179586;

  // [potential]
  PotentialSpec potential;

  // [initial]
  std::string phi_profile = "gaussian";  // gaussian | plane_wave | random
  double phi_width = 0.8;
  double phi_shift = 0.0;
  int phi_wavenumber = 1;                // plane_wave only
  std::string k_mode = "zero";           // zero | gaussian_pair | pair_corrected
  double k_amplitude = 0.1;
  double k_width = 0.8;

  // [time]
  double T = 0.5;
  double dt = 1e-3;
  std::string scheme = "strang";  // strang | rk4-mol
  int output_cadence = 10;

  // [oracle]
  bool oracle_enabled = false;
  int oracle_modes = 3;
  std::string n_max_policy = "auto";  // auto | fixed:<int>
  double krylov_tol = 1e-10;

  // [diagnostics]
  bool diagnostics_enabled = false;
  double epsilon = 0.1;
  std::vector<double> s_list = {0.5};

  // [output]
  std::string directory = "out";
  unsigned long seed = 1;

  void validate() const;

  Grid make_grid() const;
  Field make_phi0(const Grid& g) const;
  Kernel make_k0(const Grid& g, const Field& phi0) const;
  IntegratorConfig make_integrator() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace hfb
