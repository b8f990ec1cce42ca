#include "hfb/dynamics.hpp"

#include <cmath>

#include "hfb/bogoliubov.hpp"

namespace hfb {

void IntegratorConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("integrator: dt must be positive");
  if (T < 0) throw std::invalid_argument("integrator: T must be >= 0");
  if (T > 0 && dt > T + 1e-15)
    throw std::invalid_argument("integrator: dt must not exceed T");
  if (output_cadence < 1) throw std::invalid_argument("integrator: cadence >= 1");
}

namespace {

// exact flow of dK/dt = i (sx Delta_x + sy Delta_y) K
Mat kinetic_flow(const Grid& g, const Mat& K, double t, int sx, int sy) {
  const Mat& F = g.dft();
  Mat kh = F * K * F.transpose();
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      kh(i, j) *= std::exp(cdouble(0, -t * (sx * g.xi2(i) + sy * g.xi2(j))));
  return F.adjoint() * kh * F.conjugate();
}

Vec field_kinetic_flow(const Grid& g, const Vec& f, double t) {
  Vec fh = g.dft() * f;
  for (long i = 0; i < g.total(); ++i)
    fh[i] *= std::exp(cdouble(0, -t * g.xi2(i)));
  return g.dft().adjoint() * fh;
}

// entrywise phase exp(-i vN(x-y) t / N) on a kernel (the singular split term)
Mat vn_phase(const Grid& g, const Field& vN, const Mat& K, double t, long N) {
  Mat out(K.rows(), K.cols());
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      out(i, j) = K(i, j) *
                  std::exp(cdouble(0, -t * std::real(vN.values[g.wrap_diff(i, j)]) / N));
  return out;
}

Field abs2(const Field& f) {
  Field out(f.grid);
  out.values = f.values.cwiseAbs2().cast<cdouble>();
  return out;
}

struct Coeffs {
  Field wG;    // v_N * (tr Gamma)
  Field wphi;  // v_N * |phi|^2
  Kernel vL;   // v_N(x-y) Lambda(x,y)
  Kernel vG;   // v_N(x-y) Gamma(x,y)
};

Coeffs make_coeffs(const HFBState& s) {
  Coeffs c{convolve(s.vN, trace_density(s.Gamma)), convolve(s.vN, abs2(s.phi)),
           diag_multiply(s.vN, s.Lambda), diag_multiply(s.vN, s.Gamma)};
  return c;
}

}  // namespace

Field rhs_phi(const HFBState& s) {
  Coeffs c = make_coeffs(s);
  const Vec& ph = s.phi.values;
  Kernel vGt = transpose(c.vG);  // v_N(x-y) Gamma(y,x)
  Vec out = -c.wG.values.cwiseProduct(ph);
  out -= s.phi.grid.weight() * (vGt.values * ph);
  out -= s.phi.grid.weight() * (c.vL.values * ph.conjugate());
  out += 2.0 * c.wphi.values.cwiseProduct(ph);
  return Field(s.phi.grid, std::move(out));
}

Kernel rhs_lambda(const HFBState& s) {
  const Grid& g = s.phi.grid;
  const double w = g.weight();
  Coeffs c = make_coeffs(s);
  Kernel vGbar = conj(c.vG);  // v_N(x-y) conj(Gamma)(x,y)

  Mat F = -(c.vL.values * s.Gamma.values + s.Lambda.values * c.vG.values +
            vGbar.values * s.Lambda.values + s.Gamma.values.conjugate() * c.vL.values) * w;
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      F(i, j) += (-(c.wG.values[i] + c.wG.values[j]) * s.Lambda.values(i, j)) +
                 2.0 * (c.wphi.values[i] + c.wphi.values[j]) * s.phi.values[i] *
                     s.phi.values[j];

  double resid = (F - F.transpose()).norm() / std::max(F.norm(), 1.0);
  if (resid > 1e-9)
    throw std::runtime_error("rhs_lambda: symmetry residual " + std::to_string(resid));
  F = 0.5 * (F + F.transpose()).eval();
  return Kernel(g, std::move(F), Symmetry::Symmetric);
}

Kernel rhs_gamma(const HFBState& s) {
  const Grid& g = s.phi.grid;
  const double w = g.weight();
  Coeffs c = make_coeffs(s);
  Kernel vLbar = conj(c.vL);

  Mat G = (vLbar.values * s.Lambda.values - s.Lambda.values.conjugate() * c.vL.values +
           c.vG.values * s.Gamma.values - s.Gamma.values * c.vG.values) * w;
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      G(i, j) += (c.wG.values[i] - c.wG.values[j]) * s.Gamma.values(i, j) -
                 2.0 * (c.wphi.values[i] - c.wphi.values[j]) *
                     std::conj(s.phi.values[i]) * s.phi.values[j];

  double dmax = G.diagonal().cwiseAbs().maxCoeff();
  if (dmax > 1e-12 * std::max(G.norm(), 1.0))
    throw std::runtime_error("rhs_gamma: nonzero diagonal " + std::to_string(dmax));
  G.diagonal().setZero();  // the potential factor vanishes identically at x1 = x2
  return Kernel(g, std::move(G), Symmetry::None);
}

namespace {

struct Deriv {
  Vec phi;
  Mat L;
  Mat G;
};

// nonlinear part of the vector field: d/dt (phi, Lambda, Gamma) = i (F terms)
Deriv nonlinear_deriv(const HFBState& base, const Vec& ph, const Mat& L, const Mat& G) {
  HFBState s = base;
  s.phi.values = ph;
  s.Lambda.values = L;
  s.Gamma.values = G;
  const cdouble I(0, 1);
  return {I * rhs_phi(s).values, I * rhs_lambda(s).values, I * rhs_gamma(s).values};
}

// full vector field including the linear flow (rk4-mol reference path)
Deriv full_deriv(const HFBState& base, const Vec& ph, const Mat& L, const Mat& G) {
  Deriv d = nonlinear_deriv(base, ph, L, G);
  const Grid& g = base.phi.grid;
  const cdouble I(0, 1);
  Field phf(g, ph);
  d.phi += I * laplacian(phf).values;
  Kernel Lk(g, L), Gk(g, G);
  d.L += I * (laplacian_x(Lk).values + laplacian_y(Lk).values);
  Kernel vL = diag_multiply(base.vN, Lk);
  d.L -= I * vL.values / double(base.N);
  d.G += I * (laplacian_y(Gk).values - laplacian_x(Gk).values);
  return d;
}

template <typename F>
void rk4(Vec& ph, Mat& L, Mat& G, double dt, F&& deriv) {
  Deriv k1 = deriv(ph, L, G);
  Deriv k2 = deriv((ph + 0.5 * dt * k1.phi).eval(), (L + 0.5 * dt * k1.L).eval(),
                   (G + 0.5 * dt * k1.G).eval());
  Deriv k3 = deriv((ph + 0.5 * dt * k2.phi).eval(), (L + 0.5 * dt * k2.L).eval(),
                   (G + 0.5 * dt * k2.G).eval());
  Deriv k4 = deriv((ph + dt * k3.phi).eval(), (L + dt * k3.L).eval(),
                   (G + dt * k3.G).eval());
  ph += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  L += dt / 6.0 * (k1.L + 2.0 * k2.L + 2.0 * k3.L + k4.L);
  G += dt / 6.0 * (k1.G + 2.0 * k2.G + 2.0 * k3.G + k4.G);
}

void linear_half(const HFBState& base, Vec& ph, Mat& L, Mat& G, double tau,
                 bool phase_first) {
  const Grid& g = base.phi.grid;
  ph = field_kinetic_flow(g, ph, tau);
  if (phase_first) {
    L = vn_phase(g, base.vN, L, tau, base.N);
    L = kinetic_flow(g, L, tau, +1, +1);
  } else {
    L = kinetic_flow(g, L, tau, +1, +1);
    L = vn_phase(g, base.vN, L, tau, base.N);
  }
  G = kinetic_flow(g, G, tau, -1, +1);
}

}  // namespace

StepResult step(const HFBState& s, const IntegratorConfig& cfg) {
  Vec ph = s.phi.values;
  Mat L = s.Lambda.values;
  Mat G = s.Gamma.values;

  if (cfg.scheme == Scheme::Strang) {
    linear_half(s, ph, L, G, cfg.dt / 2, false);
    rk4(ph, L, G, cfg.dt,
        [&](const Vec& p, const Mat& l, const Mat& g) { return nonlinear_deriv(s, p, l, g); });
    linear_half(s, ph, L, G, cfg.dt / 2, true);
  } else {
    rk4(ph, L, G, cfg.dt,
        [&](const Vec& p, const Mat& l, const Mat& g) { return full_deriv(s, p, l, g); });
  }

  StepResult out;
  out.state = s;
  out.state.t = s.t + cfg.dt;
  out.state.phi.values = std::move(ph);
  out.state.Lambda.values = std::move(L);
  out.state.Gamma.values = std::move(G);

  double rs = symmetry_residual(out.state.Lambda);
  double rh = hermiticity_residual(out.state.Gamma);
  if (rs > 1e-8 || rh > 1e-8) {
    out.ok = false;
    out.diagnostic = "symmetry residual after step: Lambda " + std::to_string(rs) +
                     ", Gamma " + std::to_string(rh);
  }
  return out;
}

namespace {

MonitorRecord make_monitor(const HFBState& s) {
  MonitorRecord m;
  m.t = s.t;
  m.trace_gamma = std::real(trace(s.Gamma));
  m.energy = conserved_energy(s);
  m.sym_residual_lambda = symmetry_residual(s.Lambda);
  m.herm_residual_gamma = hermiticity_residual(s.Gamma);
  auto [psi, omega] = recover_pair(s.Lambda, s.Gamma, s.phi, s.N);
  m.l2_sh2k = l2_norm(psi);
  double w = s.phi.grid.weight();
  double linf = 0;
  for (long i = 0; i < s.phi.grid.total(); ++i)
    linf = std::max(linf, std::sqrt(w) * psi.values.row(i).norm());
  m.linf_sh2k = linf;
  return m;
}

}  // namespace

Trajectory evolve(const HFBState& s0, const IntegratorConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  HFBState s = s0;
  traj.frames.push_back(s);
  if (cfg.monitors) traj.monitors.push_back(make_monitor(s));
  if (cfg.T <= 0) return traj;

  long nsteps = std::max<long>(1, std::lround(cfg.T / cfg.dt));
  IntegratorConfig c = cfg;
  c.dt = cfg.T / nsteps;

  for (long k = 1; k <= nsteps; ++k) {
    StepResult r = step(s, c);
    s = std::move(r.state);
    MonitorRecord m = cfg.monitors ? make_monitor(s) : MonitorRecord{.t = s.t};
    if (!r.ok || m.sym_residual_lambda > 1e-7 || m.herm_residual_gamma > 1e-7) {
      m.flagged = true;
      m.flag_reason = !r.ok ? r.diagnostic : "symmetry invariant exceeded 100x tolerance";
      traj.monitors.push_back(m);
      traj.frames.push_back(s);
      traj.aborted = true;
      traj.abort_reason = "t=" + std::to_string(s.t) + ": " + m.flag_reason;
      return traj;
    }
    if (cfg.monitors) traj.monitors.push_back(m);
    if (k % cfg.output_cadence == 0 || k == nsteps) traj.frames.push_back(s);
  }
  return traj;
}

UncoupledRhs rhs_uncoupled(const UncoupledState& s) {
  const Grid& g = s.phi.grid;
  const double w = g.weight();
  Field wphi = convolve(s.vN, abs2(s.phi));
  const Vec& ph = s.phi.values;

  Kernel m = diag_multiply(s.vN, outer(s.phi, s.phi));
  m.values = -m.values;  // m_N = -v_N(x-y) phi(x) phi(y)
  m.tag = Symmetry::Symmetric;

  Field cph(g, ph.conjugate());
  Kernel B = diag_multiply(s.vN, outer(cph, s.phi));   // v(x-y) conj(phi)(x) phi(y)
  Kernel Bp = diag_multiply(s.vN, outer(s.phi, cph));  // v(x-y) phi(x) conj(phi)(y)

  UncoupledRhs out;
  out.phi = Field(g, (-wphi.values.cwiseProduct(ph)).eval());

  Mat Fs = -(Bp.values * s.s2.values + s.s2.values * B.values) * w;
  Fs += 2.0 * m.values;
  Fs += (m.values * s.p2bar.values + s.p2bar.values.conjugate() * m.values) * w;
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      Fs(i, j) -= (wphi.values[i] + wphi.values[j]) * s.s2.values(i, j);
  out.s2 = Kernel(g, std::move(Fs), Symmetry::Symmetric);

  Mat Gp = (B.values * s.p2bar.values - s.p2bar.values * B.values) * w;
  Gp += (-m.values.conjugate() * s.s2.values + s.s2.values.conjugate() * m.values) * w;
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      Gp(i, j) += (wphi.values[i] - wphi.values[j]) * s.p2bar.values(i, j);
  out.p2bar = Kernel(g, std::move(Gp), Symmetry::Hermitian);
  return out;
}

UncoupledState step_uncoupled(const UncoupledState& s, const IntegratorConfig& cfg) {
  const Grid& g = s.phi.grid;
  const cdouble I(0, 1);
  Vec ph = s.phi.values;
  Mat S2 = s.s2.values;
  Mat P = s.p2bar.values;

  auto linear = [&](double tau) {
    ph = field_kinetic_flow(g, ph, tau);
    S2 = kinetic_flow(g, S2, tau, +1, +1);
    P = kinetic_flow(g, P, tau, -1, +1);
  };
  auto deriv = [&](const Vec& p, const Mat& s2m, const Mat& pm) {
    UncoupledState u = s;
    u.phi.values = p;
    u.s2.values = s2m;
    u.p2bar.values = pm;
    UncoupledRhs r = rhs_uncoupled(u);
    return Deriv{I * r.phi.values, I * r.s2.values, I * r.p2bar.values};
  };

  if (cfg.scheme == Scheme::Strang) {
    linear(cfg.dt / 2);
    rk4(ph, S2, P, cfg.dt, deriv);
    linear(cfg.dt / 2);
  } else {
    rk4(ph, S2, P, cfg.dt, [&](const Vec& p, const Mat& s2m, const Mat& pm) {
      Deriv d = deriv(p, s2m, pm);
      Field pf(g, p);
      d.phi += I * laplacian(pf).values;
      Kernel s2k(g, s2m), pk(g, pm);
      d.L += I * (laplacian_x(s2k).values + laplacian_y(s2k).values);
      d.G += I * (laplacian_y(pk).values - laplacian_x(pk).values);
      return d;
    });
  }

  UncoupledState out = s;
  out.t = s.t + cfg.dt;
  out.phi.values = std::move(ph);
  out.s2.values = std::move(S2);
  out.p2bar.values = std::move(P);
  return out;
}

double conserved_number(const HFBState& s) {
  return s.N * std::real(trace(s.Gamma));
}

// Wick-closed energy <M Omega, H M Omega> in (phi, Lambda, Gamma) variables:
// E = N tr(Delta_x Gamma) - (N/2) int v_N(x-y) L_{2,2}(y,x;y,x) dx dy
// with A = N (Gamma - conj(phi) x phi) closing the two-body marginal.
double conserved_energy(const HFBState& s) {
  const Grid& g = s.phi.grid;
  const long T = g.total();
  const double Nd = static_cast<double>(s.N);
  const Vec& ph = s.phi.values;

  double kinetic = Nd * std::real(trace(laplacian_x(s.Gamma)));

  Mat A = Nd * (s.Gamma.values - ph.conjugate() * ph.transpose());
  cdouble pot(0, 0);
  for (long x = 0; x < T; ++x)
    for (long y = 0; y < T; ++y) {
      cdouble l22 = std::conj(s.Lambda.values(y, x)) * s.Lambda.values(y, x);
      l22 += (std::norm(ph[y]) * A(x, x) + std::conj(ph[y]) * ph[x] * A(x, y) +
              std::conj(ph[x]) * ph[y] * A(y, x) + std::norm(ph[x]) * A(y, y)) /
             Nd;
      l22 += (A(y, y) * A(x, x) + A(y, x) * A(x, y)) / (Nd * Nd);
      pot += s.vN.values[g.wrap_diff(x, y)] * l22;
    }
  double potential = -0.5 * Nd * g.weight() * g.weight() * std::real(pot);
  return kinetic + potential;
}

HFBState free_flow(const HFBState& s, double t) {
  HFBState out = s;
  out.t = s.t + t;
  out.phi.values = field_kinetic_flow(s.phi.grid, s.phi.values, t);
  out.Lambda.values = kinetic_flow(s.phi.grid, s.Lambda.values, t, +1, +1);
  out.Gamma.values = kinetic_flow(s.phi.grid, s.Gamma.values, t, -1, +1);
  return out;
}

HFBState coherent_initial_state(const Field& phi0, const PotentialSpec& pot) {
  HFBState s;
  s.phi = phi0;
  s.N = pot.N;
  s.potential = pot;
  s.vN = build_vN(pot, phi0.grid);
  s.Lambda = outer(phi0, phi0);
  s.Lambda.tag = Symmetry::Symmetric;
  Field cph(phi0.grid, phi0.values.conjugate());
  s.Gamma = outer(cph, phi0);
  s.Gamma.tag = Symmetry::Hermitian;
  return s;
}

HFBState pair_initial_state(const Field& phi0, const Kernel& k0,
                            const PotentialSpec& pot) {
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k0));
  HFBState s = coherent_initial_state(phi0, pot);
  s.Lambda.values += hp.s2.values / (2.0 * pot.N);
  s.Gamma.values += hp.w2.values.conjugate() / (2.0 * pot.N);
  return s;
}

UncoupledState uncoupled_initial_state(const Field& phi0, const Kernel& k0,
                                       const PotentialSpec& pot) {
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k0));
  UncoupledState s;
  s.t = 0;
  s.phi = phi0;
  s.potential = pot;
  s.vN = build_vN(pot, phi0.grid);
  s.s2 = hp.s2;
  s.p2bar = Kernel(phi0.grid, hp.w2.values.conjugate(), Symmetry::Hermitian);
  return s;
}

}  // namespace hfb
