#pragma once

// Numerical evaluation of the analytic functionals used in the
// well-posedness theory: Sobolev weights, collapsing norms along the
// kernel diagonal, the composite N_T norms, pair-kernel size reports and
// the BBGKY residuals of a stored trajectory.

#include <map>
#include <string>

#include "hfb/dynamics.hpp"
#include "hfb/grid.hpp"

namespace hfb {

struct NormReport {
  std::map<std::string, double> values;
  std::map<std::string, double> params;
};

// Fourier multiplier (1+|xi|^2)^{s/2}, or |xi|^s with the zero mode
// annihilated when homogeneous; s in [-2, 2].
Field sobolev_weight(const Field& f, double s, bool homogeneous);
// same weight applied in the selected kernel variables
Kernel sobolev_weight(const Kernel& K, double s, bool homogeneous, bool on_x,
                      bool on_y);

enum class CollapseVariant { S, W };  // Lambda-type / Gamma-type

// sup over grid offsets z of || <grad_x>^s K(t, x+z, x) ||_{L2(dt dx)} with
// trapezoid time quadrature over the stored frames; the W variant uses the
// homogeneous weight |grad_x|^s.
double collapsing_norm(const Trajectory& traj, double s, CollapseVariant variant);

// the composite N_T(Lambda), dot-N_T(Gamma), N_T(phi) norms
NormReport nt_norms(const Trajectory& traj, double epsilon);

// size report of the pair kernels recovered along the trajectory:
// sup_t and final values of ||sh(2k)||, sup_x ||sh(2k)(x,.)||, ||sh(k)||,
// ||ch(k) - delta||
NormReport pair_norm_report(const Trajectory& traj, long N);

// max-norm residuals of the three contracted-marginal equations, centered
// time differences at the stored cadence; needs >= 3 frames
NormReport bbgky_residual(const Trajectory& traj);

}  // namespace hfb
