#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hfb/bogoliubov.hpp"
#include "hfb/rng.hpp"

using namespace hfb;
constexpr double pi = std::numbers::pi;

static Kernel small_symmetric(const Grid& g, double amp, unsigned seed) {
  CounterRng rng(seed);
  Kernel k = random_smooth_kernel(g, rng, Symmetry::Symmetric);
  k.values *= amp;
  return k;
}

TEST_CASE("takagi of a rank-one kernel recovers the singular value") {
  Grid g(1, 16, 2 * pi);
  CounterRng rng(1);
  Field e = random_smooth_field(g, rng);  // unit L2 norm
  double lambda = 0.7;
  Kernel k(g, lambda * (e.values * e.values.transpose()), Symmetry::Symmetric);
  TakagiFactors tf = takagi(k);
  CHECK(tf.sigma[0] == doctest::Approx(lambda).epsilon(1e-10));
  for (int j = 1; j < tf.sigma.size(); ++j)
    CHECK(std::abs(tf.sigma[j]) < 1e-9);
}

TEST_CASE("takagi reconstructs and its columns are L2-orthonormal") {
  Grid g(1, 16, 2 * pi);
  Kernel k = small_symmetric(g, 1.3, 5);
  TakagiFactors tf = takagi(k);
  Mat rec = tf.U * tf.sigma.asDiagonal() * tf.U.transpose();
  CHECK((rec - k.values).norm() < 1e-9 * k.values.norm());
  Mat gram = g.weight() * (tf.U.adjoint() * tf.U);
  CHECK((gram - Mat::Identity(g.total(), g.total())).norm() < 1e-9);
  for (int j = 0; j + 1 < tf.sigma.size(); ++j)
    CHECK(tf.sigma[j] >= tf.sigma[j + 1] - 1e-14);
}

TEST_CASE("pair kernel constructor rejects non-symmetric input") {
  Grid g(1, 8, 1.0);
  CounterRng rng(2);
  Kernel bad = random_smooth_kernel(g, rng, Symmetry::None);
  CHECK_THROWS(PairKernel(bad));
}

TEST_CASE("hyperbolic kernels of k = 0") {
  Grid g(1, 16, 2 * pi);
  Kernel zero(g, Symmetry::Symmetric);
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(zero));
  CHECK(hp.u.values.norm() == 0.0);
  CHECK(hp.s2.values.norm() == 0.0);
  CHECK(hp.w2.values.norm() < 1e-10);
  CHECK((hp.c.values - delta_kernel(g).values).norm() < 1e-9 / g.weight());
}

TEST_CASE("sh and ch match their composition power series") {
  // amplitude small enough that the 9th order tail of the reference series
  // (~ ||k||^8 / 8!) sits below the comparison tolerance
  Grid g(1, 16, 2 * pi);
  Kernel k = small_symmetric(g, 0.2, 7);
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k));

  Kernel kk = compose(k, conj(k));  // k (k bar), hermitian
  // sh(k) = k + (k kbar) k / 3! + (k kbar)^2 k / 5! + (k kbar)^3 k / 7!
  Mat sh = k.values + compose(kk, k).values / 6.0 +
           compose(kk, compose(kk, k)).values / 120.0 +
           compose(kk, compose(kk, compose(kk, k))).values / 5040.0;
  CHECK((hp.u.values - sh).norm() < 1e-9 * std::max(1.0, sh.norm()));

  // ch(k) - delta = (k kbar)/2! + (k kbar)^2/4! + (k kbar)^3/6!
  Mat chm = kk.values / 2.0 + compose(kk, kk).values / 24.0 +
            compose(kk, compose(kk, kk)).values / 720.0;
  Mat p = hp.c.values - delta_kernel(g).values;
  CHECK((p - chm).norm() < 1e-9 * std::max(1.0, chm.norm()));
}

TEST_CASE("doubling and symplectic identities") {
  Grid g(1, 16, 2 * pi);
  Kernel k = small_symmetric(g, 0.9, 11);
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k));

  // sh(2k) = 2 ch(k) o sh(k) and ch(2k) - delta = 2 sh(k) o conj(sh(k))
  Kernel cu = compose(hp.c, hp.u);
  CHECK((hp.s2.values - 2.0 * cu.values).norm() < 1e-9 * hp.s2.values.norm());
  Kernel uu = compose(hp.u, conj(hp.u));
  CHECK((hp.w2.values - 2.0 * uu.values).norm() <
        1e-9 * std::max(1.0, hp.w2.values.norm()));

  // ch o ch - sh o conj(sh) = delta
  Kernel cc = compose(hp.c, hp.c);
  Mat resid = cc.values - uu.values - delta_kernel(g).values;
  CHECK(resid.norm() < 1e-9 * cc.values.norm());

  // same identity at doubled argument
  Kernel c2(g, hp.w2.values + delta_kernel(g).values, Symmetry::Hermitian);
  Mat resid2 = compose(c2, c2).values - compose(hp.s2, conj(hp.s2)).values -
               delta_kernel(g).values;
  CHECK(resid2.norm() < 1e-8 * compose(c2, c2).values.norm());

  CHECK(hp.u.tag == Symmetry::Symmetric);
  CHECK(hp.s2.tag == Symmetry::Symmetric);
  CHECK(hp.c.tag == Symmetry::Hermitian);
  CHECK(hp.w2.tag == Symmetry::Hermitian);
}

TEST_CASE("recover_pair and k_from_pair invert the state construction") {
  Grid g(1, 16, 2 * pi);
  Kernel k = small_symmetric(g, 0.6, 13);
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k));
  CounterRng rng(14);
  Field phi = random_smooth_field(g, rng);
  long N = 8;

  Kernel Lambda(g, hp.s2.values / (2.0 * N) +
                       (phi.values * phi.values.transpose()),
                Symmetry::Symmetric);
  Kernel Gamma(g, hp.w2.values.conjugate() / (2.0 * N) +
                      (phi.values.conjugate() * phi.values.transpose()),
               Symmetry::Hermitian);

  auto [psi, omega] = recover_pair(Lambda, Gamma, phi, N);
  CHECK((psi.values - hp.s2.values).norm() < 1e-9 * std::max(1.0, hp.s2.values.norm()));
  CHECK((omega.values - hp.w2.values.conjugate()).norm() <
        1e-9 * std::max(1.0, hp.w2.values.norm()));

  PairKernel k2 = k_from_pair(psi);
  CHECK((k2.k.values - k.values).norm() < 1e-8 * k.values.norm());
}

TEST_CASE("closed-form marginals reduce to condensate products at k = 0") {
  Grid g(1, 8, 2 * pi);
  CounterRng rng(15);
  Field phi = random_smooth_field(g, rng);
  Kernel u(g, Symmetry::Symmetric);         // sh(0) = 0
  Kernel c = delta_kernel(g);               // ch(0) = delta
  long N = 4;
  long T = g.total();

  MarginalTensor L12 = closed_form_marginals(phi, u, c, N, MarginalIndex::L12);
  double err = 0;
  for (long y = 0; y < T; ++y)
    for (long x1 = 0; x1 < T; ++x1)
      for (long x2 = 0; x2 < T; ++x2) {
        cdouble expect = std::conj(phi.values[y]) * phi.values[x1] * phi.values[x2];
        err = std::max(err, std::abs(L12.at({y, x1, x2}) - expect));
      }
  CHECK(err < 1e-10);

  MarginalTensor L22 = closed_form_marginals(phi, u, c, N, MarginalIndex::L22);
  err = 0;
  for (long y1 = 0; y1 < T; ++y1)
    for (long y2 = 0; y2 < T; ++y2)
      for (long x1 = 0; x1 < T; ++x1)
        for (long x2 = 0; x2 < T; ++x2) {
          cdouble expect = std::conj(phi.values[y1] * phi.values[y2]) *
                           phi.values[x1] * phi.values[x2];
          err = std::max(err, std::abs(L22.at({y1, y2, x1, x2}) - expect));
        }
  CHECK(err < 1e-10);
}
