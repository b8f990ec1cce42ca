#pragma once

// Time integration of the coupled (phi, Lambda, Gamma) system and of the
// older uncoupled (phi, sh(2k), conj(ch(2k)) - delta) system, plus the
// conserved-quantity functionals.

#include <optional>
#include <string>
#include <vector>

#include "hfb/grid.hpp"
#include "hfb/potential.hpp"

namespace hfb {

struct HFBState {
  double t = 0;
  Field phi;
  Kernel Lambda;  // symmetric
  Kernel Gamma;   // hermitian
  long N = 1;
  PotentialSpec potential;
  Field vN;  // cached sample of the scaled interaction on the grid
};

struct UncoupledState {
  double t = 0;
  Field phi;
  Kernel s2;      // sh(2k), symmetric
  Kernel p2bar;   // conj(ch(2k)) - delta, hermitian
  PotentialSpec potential;
  Field vN;
};

enum class Scheme { Strang, Rk4Mol };

struct IntegratorConfig {
  double dt = 1e-3;
  double T = 0.5;
  Scheme scheme = Scheme::Strang;
  int output_cadence = 1;  // store every k-th step
  bool monitors = true;

  void validate() const;
};

struct MonitorRecord {
  double t = 0;
  double trace_gamma = 0;
  double energy = 0;
  double sym_residual_lambda = 0;
  double herm_residual_gamma = 0;
  double l2_sh2k = 0;
  double linf_sh2k = 0;  // sup_x || sh(2k)(x,.) ||_{L2}
  bool flagged = false;
  std::string flag_reason;
};

struct Trajectory {
  std::vector<HFBState> frames;
  std::vector<MonitorRecord> monitors;
  bool aborted = false;
  std::string abort_reason;
};

// Full right side of the phi equation: S phi = rhs_phi, S = (1/i)dt - Delta.
Field rhs_phi(const HFBState& s);
// Right side of the Lambda equation excluding the linear flow terms
// (-Delta_x - Delta_y + v_N(x-y)/N belong to the split linear flow).
Kernel rhs_lambda(const HFBState& s);
// Right side of the Gamma equation, already conjugated so Gamma itself is
// evolved: {(1/i)dt + Delta_x - Delta_y} Gamma = rhs_gamma. The diagonal
// vanishes identically.
Kernel rhs_gamma(const HFBState& s);

struct StepResult {
  HFBState state;
  bool ok = true;
  std::string diagnostic;
};

StepResult step(const HFBState& s, const IntegratorConfig& cfg);
Trajectory evolve(const HFBState& s0, const IntegratorConfig& cfg);

// Uncoupled system right sides with ch(2k) = delta + conj(p2bar) substituted
// so only bounded kernels are stepped; linear flow terms excluded as above.
struct UncoupledRhs {
  Field phi;
  Kernel s2;
  Kernel p2bar;
};
UncoupledRhs rhs_uncoupled(const UncoupledState& s);
UncoupledState step_uncoupled(const UncoupledState& s, const IntegratorConfig& cfg);

double conserved_number(const HFBState& s);  // N * trace(Gamma), real
double conserved_energy(const HFBState& s);  // Wick-closed <H>

// exact free propagation (v = 0) of a state by time t, for oracle tests
HFBState free_flow(const HFBState& s, double t);

// initial data helpers
HFBState coherent_initial_state(const Field& phi0, const PotentialSpec& pot);
// from a pair kernel k: Lambda = sh(2k)/2N + phi x phi,
// Gamma = conj(w2)/2N + conj(phi) x phi
HFBState pair_initial_state(const Field& phi0, const Kernel& k0,
                            const PotentialSpec& pot);
UncoupledState uncoupled_initial_state(const Field& phi0, const Kernel& k0,
                                       const PotentialSpec& pot);

}  // namespace hfb
