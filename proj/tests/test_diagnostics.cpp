#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hfb/bogoliubov.hpp"
#include "hfb/diagnostics.hpp"
#include "hfb/dynamics.hpp"
#include "hfb/rng.hpp"

using namespace hfb;
constexpr double pi = std::numbers::pi;

static PotentialSpec test_potential(long N = 4) {
  PotentialSpec p;
  p.amplitude = 0.8;
  p.sigma = 0.5;
  p.beta = 0.3;
  p.N = N;
  return p;
}

TEST_CASE("sobolev weight on fields") {
  Grid g(1, 32, 2 * pi);
  CounterRng rng(3);
  Field f = random_smooth_field(g, rng);
  // s = 0 is the identity (inhomogeneous); homogeneous kills the mean
  Field w0 = sobolev_weight(f, 0.0, false);
  CHECK((w0.values - f.values).norm() < 1e-12);
  Field one(g, Vec::Ones(g.total()));
  CHECK(l2_norm(sobolev_weight(one, 0.7, true)) < 1e-12);
  // plane wave is an eigenfunction
  Field pw(g);
  for (long i = 0; i < g.total(); ++i)
    pw.values[i] = std::polar(1.0, 3.0 * g.coord(i, 0));
  Field wp = sobolev_weight(pw, 1.0, false);
  CHECK((wp.values - std::sqrt(10.0) * pw.values).norm() < 1e-10);
  Field hp = sobolev_weight(pw, 1.0, true);
  CHECK((hp.values - 3.0 * pw.values).norm() < 1e-10);
  // inverse weight undoes the weight
  Field roundtrip = sobolev_weight(sobolev_weight(f, 1.3, false), -1.3, false);
  CHECK((roundtrip.values - f.values).norm() < 1e-11);
  CHECK_THROWS(sobolev_weight(f, 3.0, false));
}

TEST_CASE("sobolev weight acts per kernel variable") {
  Grid g(1, 16, 2 * pi);
  CounterRng rng(5);
  Field a = random_smooth_field(g, rng);
  Field b = random_smooth_field(g, rng);
  Kernel K = outer(a, b);
  double s = 0.8;
  Kernel wx = sobolev_weight(K, s, false, true, false);
  Kernel ex = outer(sobolev_weight(a, s, false), b);
  CHECK((wx.values - ex.values).norm() < 1e-11);
  // the multiplier is even in frequency, so the y action is the same for
  // either transform convention
  Kernel wy = sobolev_weight(K, s, false, false, true);
  Kernel ey = outer(a, sobolev_weight(b, s, false));
  CHECK((wy.values - ey.values).norm() < 1e-11);
}

static Trajectory constant_trajectory(const HFBState& s, double T, int nframes) {
  Trajectory tr;
  for (int j = 0; j < nframes; ++j) {
    HFBState f = s;
    f.t = T * j / (nframes - 1);
    tr.frames.push_back(f);
  }
  return tr;
}

TEST_CASE("collapsing norm of a static plane-wave pair kernel") {
  Grid g(1, 32, 2 * pi);
  double L = g.L();
  Field a(g);
  for (long i = 0; i < g.total(); ++i)
    a.values[i] = std::polar(1.0 / std::sqrt(L), 2.0 * g.coord(i, 0));
  HFBState s = coherent_initial_state(a, test_potential());
  double T = 0.7;
  Trajectory tr = constant_trajectory(s, T, 8);
  // Lambda(x+z, x) = e^{4 i x} e^{2 i z} / L: a single frequency-4 wave of
  // modulus 1/L, so the weighted slice norm is (1+16)^{s/2} sqrt(1/L), and
  // the time integral contributes sqrt(T)
  double sval = 0.6;
  double expect = std::sqrt(T) * std::pow(17.0, sval / 2) / std::sqrt(L);
  CHECK(collapsing_norm(tr, sval, CollapseVariant::S) ==
        doctest::Approx(expect).epsilon(1e-10));
  // Gamma(x+z, x) = e^{-2 i z} / L is flat in x: the homogeneous weight
  // annihilates it entirely
  CHECK(collapsing_norm(tr, sval, CollapseVariant::W) < 1e-12);
}

TEST_CASE("collapsing norm is translation invariant") {
  Grid g(1, 16, 2 * pi);
  CounterRng rng(7);
  Field phi = random_smooth_field(g, rng);
  Kernel k = random_smooth_kernel(g, rng, Symmetry::Symmetric);
  k.values *= 0.4;
  HFBState s = pair_initial_state(phi, k, test_potential());
  Trajectory tr = constant_trajectory(s, 0.5, 5);

  // cyclically shift every frame by 5 grid points in both variables
  Trajectory shifted = tr;
  long T = g.total(), sh = 5;
  for (HFBState& f : shifted.frames) {
    Vec p(T);
    Mat L(T, T), G(T, T);
    for (long i = 0; i < T; ++i) {
      p[(i + sh) % T] = f.phi.values[i];
      for (long j = 0; j < T; ++j) {
        L((i + sh) % T, (j + sh) % T) = f.Lambda.values(i, j);
        G((i + sh) % T, (j + sh) % T) = f.Gamma.values(i, j);
      }
    }
    f.phi.values = p;
    f.Lambda.values = L;
    f.Gamma.values = G;
  }
  for (CollapseVariant v : {CollapseVariant::S, CollapseVariant::W}) {
    double n1 = collapsing_norm(tr, 0.6, v);
    double n2 = collapsing_norm(shifted, 0.6, v);
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-10));
  }
  NormReport a = nt_norms(tr, 0.1), b2 = nt_norms(shifted, 0.1);
  for (const auto& [key, val] : a.values)
    CHECK(val == doctest::Approx(b2.values.at(key)).epsilon(1e-10));
}

TEST_CASE("nt norms scale and vanish on the zero state") {
  Grid g(1, 16, 2 * pi);
  Field zero(g);
  HFBState s = coherent_initial_state(zero, test_potential());
  Trajectory tr = constant_trajectory(s, 0.3, 4);
  NormReport rep = nt_norms(tr, 0.1);
  CHECK(rep.values.at("nt_lambda") < 1e-12);
  CHECK(rep.values.at("nt_gamma_dot") < 1e-12);
  CHECK(rep.values.at("nt_phi") < 1e-12);

  CounterRng rng(9);
  Field phi = random_smooth_field(g, rng);
  Kernel k = random_smooth_kernel(g, rng, Symmetry::Symmetric);
  k.values *= 0.3;
  HFBState s2 = pair_initial_state(phi, k, test_potential());
  Trajectory t1 = constant_trajectory(s2, 0.3, 4);
  Trajectory t2 = t1;
  for (HFBState& f : t2.frames) f.Lambda.values *= 2.0;
  NormReport r1 = nt_norms(t1, 0.1), r2 = nt_norms(t2, 0.1);
  CHECK(r2.values.at("nt_lambda") ==
        doctest::Approx(2.0 * r1.values.at("nt_lambda")).epsilon(1e-10));
  CHECK(r2.values.at("nt_phi") ==
        doctest::Approx(r1.values.at("nt_phi")).epsilon(1e-12));
}

TEST_CASE("pair norm report recovers the sizes of the static pair kernels") {
  Grid g(1, 16, 2 * pi);
  CounterRng rng(11);
  Field phi = random_smooth_field(g, rng);
  Kernel k = random_smooth_kernel(g, rng, Symmetry::Symmetric);
  k.values *= 0.5;
  long N = 8;
  PotentialSpec pot = test_potential(N);
  HFBState s = pair_initial_state(phi, k, pot);
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k));
  Trajectory tr = constant_trajectory(s, 0.2, 3);
  NormReport rep = pair_norm_report(tr, N);
  CHECK(rep.values.at("final_l2_sh2k") ==
        doctest::Approx(l2_norm(hp.s2)).epsilon(1e-7));
  CHECK(rep.values.at("sup_t_l2_sh2k") ==
        doctest::Approx(l2_norm(hp.s2)).epsilon(1e-7));
  CHECK(rep.values.at("final_l2_shk") ==
        doctest::Approx(l2_norm(hp.u)).epsilon(1e-7));
  Kernel p = hp.c;
  p.values -= delta_kernel(g).values;
  CHECK(rep.values.at("final_l2_p") ==
        doctest::Approx(l2_norm(p)).epsilon(1e-6));
  double linf = 0;
  for (long x = 0; x < g.total(); ++x)
    linf = std::max(linf,
                    std::sqrt(g.weight()) * hp.s2.values.row(x).norm());
  CHECK(rep.values.at("final_linf_sh2k") == doctest::Approx(linf).epsilon(1e-7));
}

TEST_CASE("bbgky residuals are small along a computed trajectory") {
  Grid g(1, 16, 2 * pi);
  CounterRng rng(13);
  Field phi = random_smooth_field(g, rng);
  Kernel k = random_smooth_kernel(g, rng, Symmetry::Symmetric);
  k.values *= 0.3;
  HFBState s = pair_initial_state(phi, k, test_potential(4));
  IntegratorConfig cfg;
  cfg.T = 0.04;
  cfg.dt = 5e-4;
  cfg.output_cadence = 4;  // dt_out = 2e-3
  Trajectory tr = evolve(s, cfg);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.frames.size() >= 5);
  NormReport rep = bbgky_residual(tr);
  // centered differences at dt_out = 2e-3 on O(1) data
  CHECK(rep.values.at("bb1") < 1e-3);
  CHECK(rep.values.at("bb2") < 1e-3);
  CHECK(rep.values.at("bb3") < 1e-3);

  // fault injection: corrupting one stored frame must blow up the residual
  Trajectory bad = tr;
  bad.frames[2].Lambda.values *= 1.01;
  NormReport brep = bbgky_residual(bad);
  CHECK(brep.values.at("bb3") > 10.0 * rep.values.at("bb3"));

  CHECK_THROWS(bbgky_residual(Trajectory{}));
}
