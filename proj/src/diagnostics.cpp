#include "hfb/diagnostics.hpp"

#include <cmath>

#include "hfb/bogoliubov.hpp"

namespace hfb {

namespace {

double mult(double xi2, double s, bool homogeneous) {
  if (homogeneous) return xi2 == 0 ? 0.0 : std::pow(xi2, s / 2);
  return std::pow(1.0 + xi2, s / 2);
}

// flat index of x + z with periodic wrap per axis
long wrap_add(const Grid& g, long x, long z) {
  const int n = g.n();
  long out = 0, mul = 1;
  for (int a = 0; a < g.d(); ++a) {
    out += mul * ((x % n + z % n) % n);
    x /= n;
    z /= n;
    mul *= n;
  }
  return out;
}

// || <grad>^s u ||_{L2} of the diagonal slice u(x) = K(x+z, x)
double weighted_slice_norm(const Kernel& K, long z, double s, bool homogeneous) {
  const Grid& g = K.grid;
  Vec u(g.total());
  for (long x = 0; x < g.total(); ++x) u[x] = K.values(wrap_add(g, x, z), x);
  Vec uh = g.dft() * u;
  double acc = 0;
  for (long i = 0; i < g.total(); ++i)
    acc += std::norm(uh[i]) * std::pow(mult(g.xi2(i), s, homogeneous), 2);
  return std::sqrt(g.weight() * acc);
}

std::vector<double> trapezoid_weights(const std::vector<HFBState>& frames) {
  std::vector<double> w(frames.size(), 0.0);
  for (size_t j = 0; j + 1 < frames.size(); ++j) {
    double dt = frames[j + 1].t - frames[j].t;
    w[j] += dt / 2;
    w[j + 1] += dt / 2;
  }
  return w;
}

}  // namespace

Field sobolev_weight(const Field& f, double s, bool homogeneous) {
  if (s < -2 || s > 2) throw std::invalid_argument("sobolev_weight: s out of range");
  const Grid& g = f.grid;
  Vec fh = g.dft() * f.values;
  for (long i = 0; i < g.total(); ++i) fh[i] *= mult(g.xi2(i), s, homogeneous);
  return Field(g, (g.dft().adjoint() * fh).eval());
}

Kernel sobolev_weight(const Kernel& K, double s, bool homogeneous, bool on_x,
                      bool on_y) {
  if (s < -2 || s > 2) throw std::invalid_argument("sobolev_weight: s out of range");
  const Grid& g = K.grid;
  Mat m = K.values;
  if (on_x) {
    Mat mh = g.dft() * m;
    for (long i = 0; i < g.total(); ++i) mh.row(i) *= mult(g.xi2(i), s, homogeneous);
    m = g.dft().adjoint() * mh;
  }
  if (on_y) {
    Mat mh = m * g.dft().transpose();
    for (long j = 0; j < g.total(); ++j) mh.col(j) *= mult(g.xi2(j), s, homogeneous);
    m = mh * g.dft().conjugate();
  }
  return Kernel(g, std::move(m), Symmetry::None);
}

double collapsing_norm(const Trajectory& traj, double s, CollapseVariant variant) {
  if (traj.frames.empty()) throw std::invalid_argument("collapsing_norm: empty trajectory");
  const Grid& g = traj.frames.front().phi.grid;
  std::vector<double> tw = trapezoid_weights(traj.frames);
  bool homogeneous = variant == CollapseVariant::W;
  double sup = 0;
  for (long z = 0; z < g.total(); ++z) {
    double acc = 0;
    for (size_t j = 0; j < traj.frames.size(); ++j) {
      const Kernel& K = variant == CollapseVariant::S ? traj.frames[j].Lambda
                                                      : traj.frames[j].Gamma;
      double v = weighted_slice_norm(K, z, s, homogeneous);
      acc += tw[j] * v * v;
    }
    sup = std::max(sup, std::sqrt(acc));
  }
  return sup;
}

NormReport nt_norms(const Trajectory& traj, double epsilon) {
  if (traj.frames.empty()) throw std::invalid_argument("nt_norms: empty trajectory");
  const Grid& g = traj.frames.front().phi.grid;
  const double se = 0.5 + epsilon;
  std::vector<double> tw = trapezoid_weights(traj.frames);

  double lam_linf = 0, gam_linf = 0, phi_linf = 0, phi_l2l6_sq = 0;
  for (size_t j = 0; j < traj.frames.size(); ++j) {
    const HFBState& f = traj.frames[j];
    lam_linf = std::max(lam_linf,
                        l2_norm(sobolev_weight(f.Lambda, se, false, true, true)));
    gam_linf = std::max(gam_linf,
                        l2_norm(sobolev_weight(f.Gamma, se, false, true, true)));
    Field wphi = sobolev_weight(f.phi, se, false);
    phi_linf = std::max(phi_linf, l2_norm(wphi));
    double l6 = std::pow(g.weight() * wphi.values.cwiseAbs().array().pow(6).sum(),
                         1.0 / 6.0);
    phi_l2l6_sq += tw[j] * l6 * l6;
  }

  NormReport rep;
  rep.params["epsilon"] = epsilon;
  rep.params["frames"] = static_cast<double>(traj.frames.size());
  rep.values["nt_lambda"] =
      collapsing_norm(traj, se, CollapseVariant::S) + lam_linf;
  rep.values["nt_gamma_dot"] = collapsing_norm(traj, se, CollapseVariant::W) +
                               collapsing_norm(traj, 0.5, CollapseVariant::W) +
                               gam_linf;
  rep.values["nt_phi"] = phi_linf + std::sqrt(phi_l2l6_sq);
  return rep;
}

NormReport pair_norm_report(const Trajectory& traj, long N) {
  if (traj.frames.empty()) throw std::invalid_argument("pair_norm_report: empty trajectory");
  NormReport rep;
  rep.params["N"] = static_cast<double>(N);
  double sup_s2 = 0, sup_linf = 0, sup_u = 0, sup_p = 0;
  double fin_s2 = 0, fin_linf = 0, fin_u = 0, fin_p = 0;
  for (const HFBState& f : traj.frames) {
    auto [psi, omega] = recover_pair(f.Lambda, f.Gamma, f.phi, N);
    const Grid& g = f.phi.grid;
    double s2n = l2_norm(psi);
    double linf = 0;
    for (long x = 0; x < g.total(); ++x)
      linf = std::max(linf, std::sqrt(g.weight()) * psi.values.row(x).norm());
    PairKernel k = k_from_pair(psi);
    HyperbolicPair hp = hyperbolic_from_k(k);
    Kernel p = hp.c;
    p.values -= delta_kernel(g).values;
    fin_s2 = s2n;
    fin_linf = linf;
    fin_u = l2_norm(hp.u);
    fin_p = l2_norm(p);
    sup_s2 = std::max(sup_s2, fin_s2);
    sup_linf = std::max(sup_linf, fin_linf);
    sup_u = std::max(sup_u, fin_u);
    sup_p = std::max(sup_p, fin_p);
  }
  rep.values["sup_t_l2_sh2k"] = sup_s2;
  rep.values["sup_t_linf_sh2k"] = sup_linf;
  rep.values["sup_t_l2_shk"] = sup_u;
  rep.values["sup_t_l2_p"] = sup_p;
  rep.values["final_l2_sh2k"] = fin_s2;
  rep.values["final_linf_sh2k"] = fin_linf;
  rep.values["final_l2_shk"] = fin_u;
  rep.values["final_l2_p"] = fin_p;
  return rep;
}

namespace {

// difference-variable sample v(x-y) from the cached interaction field
inline cdouble vdiff(const Grid& g, const Field& vN, long x, long y) {
  return vN.values[g.wrap_diff(x, y)];
}

// contracted closed-form marginals evaluated entrywise from (phi, Lambda, A, P)
struct MarginalData {
  const Grid& g;
  const Vec& ph;
  const Mat& Lam;
  Mat A;  // N (Gamma - conj(phi) x phi)
  Mat P;  // N (Lambda - phi x phi)
  double N;
};

// int v(x1-s) L_{1,2}(s; x1, s) ds
cdouble bb1_contract(const MarginalData& d, const Field& vN, long x1) {
  const Grid& g = d.g;
  cdouble acc = 0;
  for (long s = 0; s < g.total(); ++s) {
    cdouble Gam_s_x1 = d.A(s, x1) / d.N + std::conj(d.ph[s]) * d.ph[x1];
    cdouble l12 = Gam_s_x1 * d.ph[s] + d.P(s, x1) * std::conj(d.ph[s]) / d.N +
                  d.A(s, s) * d.ph[x1] / d.N;
    acc += vdiff(g, vN, x1, s) * l12;
  }
  return acc * g.weight();
}

// L_{2,2}(x1, s; y1, s) entry
cdouble l22_entry(const MarginalData& d, long x1, long s, long y1) {
  cdouble lam = std::conj(d.Lam(x1, s)) *
                (d.P(y1, s) / d.N + d.ph[y1] * d.ph[s]);
  cdouble one = std::conj(d.ph[x1]) * d.ph[y1] * d.A(s, s) +
                std::conj(d.ph[x1]) * d.ph[s] * d.A(s, y1) +
                std::conj(d.ph[s]) * d.ph[y1] * d.A(x1, s) +
                std::norm(d.ph[s]) * d.A(x1, y1);
  cdouble two = d.A(x1, y1) * d.A(s, s) + d.A(x1, s) * d.A(s, y1);
  return lam + one / d.N + two / (d.N * d.N);
}

// L_{1,3}(s; x1, x2, s) entry
cdouble l13_entry(const MarginalData& d, long s, long x1, long x2) {
  cdouble Lam_x2_s = d.P(x2, s) / d.N + d.ph[x2] * d.ph[s];
  cdouble gam_bar = std::conj(d.A(x1, s) / d.N + std::conj(d.ph[x1]) * d.ph[s]);
  cdouble acc = gam_bar * Lam_x2_s;
  acc += (d.ph[x1] * d.ph[x2] * d.A(s, s) + d.ph[x1] * d.ph[s] * d.A(s, x2) +
          std::conj(d.ph[s]) * d.ph[x2] * d.P(x1, s) +
          std::norm(d.ph[s]) * d.P(x1, x2)) /
         d.N;
  acc += (d.P(x1, x2) * d.A(s, s) + d.P(x1, s) * d.A(s, x2)) / (d.N * d.N);
  return acc;
}

}  // namespace

NormReport bbgky_residual(const Trajectory& traj) {
  if (traj.frames.size() < 3)
    throw std::invalid_argument("bbgky_residual: needs at least 3 frames");
  const cdouble I(0, 1);
  double r1 = 0, r2 = 0, r3 = 0;
  for (size_t j = 1; j + 1 < traj.frames.size(); ++j) {
    const HFBState& fm = traj.frames[j - 1];
    const HFBState& f = traj.frames[j];
    const HFBState& fp = traj.frames[j + 1];
    const Grid& g = f.phi.grid;
    const long T = g.total();
    const double Nd = static_cast<double>(f.N);
    double dt2 = fp.t - fm.t;

    MarginalData d{g, f.phi.values, f.Lambda.values,
                   Nd * (f.Gamma.values - f.phi.values.conjugate() * f.phi.values.transpose()),
                   Nd * (f.Lambda.values - f.phi.values * f.phi.values.transpose()),
                   Nd};

    // BB1: (1/i) dt phi - Delta phi = - int v L_{1,2}
    Vec dphi = (fp.phi.values - fm.phi.values) / dt2;
    Vec lap = laplacian(f.phi).values;
    for (long x = 0; x < T; ++x) {
      cdouble res = dphi[x] / I - lap[x] + bb1_contract(d, f.vN, x);
      r1 = std::max(r1, std::abs(res));
    }

    // BB2: (1/i) dt Gamma + D1 - D2 = int v(x1-s) L22 - int v(y1-s) L22
    Mat dG = (fp.Gamma.values - fm.Gamma.values) / dt2;
    Mat lx = laplacian_x(f.Gamma).values, ly = laplacian_y(f.Gamma).values;
    for (long x1 = 0; x1 < T; ++x1)
      for (long y1 = 0; y1 < T; ++y1) {
        cdouble acc = 0;
        for (long s = 0; s < T; ++s)
          acc += (vdiff(g, f.vN, x1, s) - vdiff(g, f.vN, y1, s)) *
                 l22_entry(d, x1, s, y1);
        cdouble res = dG(x1, y1) / I + lx(x1, y1) - ly(x1, y1) - g.weight() * acc;
        r2 = std::max(r2, std::abs(res));
      }

    // BB3: (1/i) dt Lambda - D1 - D2 + v/N = - int (v(x1-s)+v(x2-s)) L13
    Mat dL = (fp.Lambda.values - fm.Lambda.values) / dt2;
    Mat lxL = laplacian_x(f.Lambda).values, lyL = laplacian_y(f.Lambda).values;
    for (long x1 = 0; x1 < T; ++x1)
      for (long x2 = 0; x2 < T; ++x2) {
        cdouble acc = 0;
        for (long s = 0; s < T; ++s)
          acc += (vdiff(g, f.vN, x1, s) + vdiff(g, f.vN, x2, s)) *
                 l13_entry(d, s, x1, x2);
        cdouble res = dL(x1, x2) / I - lxL(x1, x2) - lyL(x1, x2) +
                      vdiff(g, f.vN, x1, x2) / Nd * f.Lambda.values(x1, x2) +
                      g.weight() * acc;
        r3 = std::max(r3, std::abs(res));
      }
  }
  NormReport rep;
  rep.params["frames"] = static_cast<double>(traj.frames.size());
  rep.params["dt_out"] = traj.frames[1].t - traj.frames[0].t;
  rep.values["bb1"] = r1;
  rep.values["bb2"] = r2;
  rep.values["bb3"] = r3;
  return rep;
}

}  // namespace hfb
