#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hfb/fock.hpp"
#include "hfb/potential.hpp"
#include "hfb/rng.hpp"

using namespace hfb;
constexpr double pi = std::numbers::pi;

static long binom(int a, int b) {
  long r = 1;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

TEST_CASE("basis enumeration and lookup") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 3, 4);
  CHECK(b.size() == binom(3 + 4, 3));  // occupancies with sum <= 4
  for (long i = 0; i < b.size(); ++i) {
    CHECK(b.index(b.occ(i)) == i);
    int s = 0;
    for (int v : b.occ(i)) s += v;
    CHECK(b.total_occ(i) == s);
    CHECK(s <= 4);
  }
  CHECK(b.index({9, 9, 9}) == -1);
}

TEST_CASE("modes are grid-orthonormal plane waves, lowest frequencies first") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 5, 2);
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 5; ++n) {
      cdouble ip = inner(b.mode(m), b.mode(n));
      CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) < 1e-12);
    }
  CHECK(b.kinetic_eigenvalue(0) == 0.0);  // constant mode first
  for (int m = 0; m + 1 < 5; ++m)
    CHECK(-b.kinetic_eigenvalue(m) <= -b.kinetic_eigenvalue(m + 1) + 1e-12);
}

TEST_CASE("ladder algebra of the annihilators") {
  Grid g(1, 8, 2 * pi);
  FockBasis b(g, 2, 5);
  SecondQuantizedOperator a0 = annihilator(b, 0);
  Mat ad = Mat(a0.mat).adjoint();
  Mat comm = Mat(a0.mat) * ad - ad * Mat(a0.mat);
  // [a, a*] = 1 away from the truncation shell
  for (long i = 0; i < b.size(); ++i)
    if (b.total_occ(i) < b.n_max())
      CHECK(std::abs(comm(i, i) - 1.0) < 1e-13);
  // number operator equals sum of a*_m a_m
  SecondQuantizedOperator num = number_operator(b);
  Mat nsum = Mat::Zero(b.size(), b.size());
  for (int m = 0; m < 2; ++m) {
    Mat am = Mat(annihilator(b, m).mat);
    nsum += am.adjoint() * am;
  }
  CHECK((Mat(num.mat) - nsum).norm() < 1e-12);
}

TEST_CASE("hamiltonian without interaction is the diagonal kinetic sum") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 3, 3);
  PotentialSpec p;
  p.amplitude = 0;
  p.N = 4;
  Field v = build_vN(p, g);
  SecondQuantizedOperator H = build_hamiltonian(b, v, 4);
  Mat Hd(H.mat);
  for (long i = 0; i < b.size(); ++i)
    for (long j = 0; j < b.size(); ++j) {
      cdouble expect = 0;
      if (i == j)
        for (int m = 0; m < 3; ++m)
          expect += double(b.occ(i)[m]) * b.kinetic_eigenvalue(m);
      CHECK(std::abs(Hd(i, j) - expect) < 1e-12);
    }
}

// independent dense ladder oracle: apply a_m / a*_m on occupation vectors
namespace {
struct DenseLadder {
  const FockBasis& b;
  Mat a(int m) const {
    Mat r = Mat::Zero(b.size(), b.size());
    for (long j = 0; j < b.size(); ++j) {
      std::vector<int> occ = b.occ(j);
      if (occ[m] == 0) continue;
      double c = std::sqrt(double(occ[m]));
      occ[m] -= 1;
      long i = b.index(occ);
      if (i >= 0) r(i, j) = c;
    }
    return r;
  }
};
}  // namespace

TEST_CASE("two-mode hamiltonian matches a hand-assembled dense matrix") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 2, 2);
  PotentialSpec p;
  p.amplitude = 1.3;
  p.sigma = 0.6;
  p.beta = 0.4;
  p.N = 4;
  Field v = build_vN(p, g);
  SecondQuantizedOperator H = build_hamiltonian(b, v, 4);

  // two-body elements by direct grid quadrature
  long T = g.total();
  auto W = [&](int m, int n, int q, int r) {
    cdouble acc = 0;
    Field em = b.mode(m), en = b.mode(n), eq = b.mode(q), er = b.mode(r);
    for (long x = 0; x < T; ++x)
      for (long y = 0; y < T; ++y)
        acc += v.values[g.wrap_diff(x, y)].real() * std::conj(em.values[x]) *
               std::conj(en.values[y]) * eq.values[y] * er.values[x];
    return acc * g.weight() * g.weight();
  };
  DenseLadder dl{b};
  Mat a0 = dl.a(0), a1 = dl.a(1);
  std::vector<Mat> am = {a0, a1};
  Mat oracle = Mat::Zero(b.size(), b.size());
  for (int m = 0; m < 2; ++m) {
    Mat n_m = am[m].adjoint() * am[m];
    oracle += b.kinetic_eigenvalue(m) * n_m;
  }
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n)
      for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
          oracle -= (0.5 / 4.0) * W(m, n, q, r) *
                    (am[m].adjoint() * am[n].adjoint() * am[q] * am[r]);
  // the truncation treats the top shell identically on both routes because
  // V conserves total occupation
  CHECK((Mat(H.mat) - oracle).norm() < 1e-10 * std::max(1.0, oracle.norm()));
  CHECK(H.hermitian);
}

TEST_CASE("coherent displacement produces the Poisson distribution") {
  Grid g(1, 8, 2 * pi);
  FockBasis b(g, 1, 30);
  double a = 0.6;
  long N = 8;
  Field phi(g, a * b.mode(0).values);
  FockVector psi = coherent_displace(vacuum(b), phi, N);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
  double mu = N * a * a;
  double tv = 0, logfact = 0;
  for (long i = 0; i < b.size(); ++i) {
    int n = b.occ(i)[0];
    logfact = 0;
    for (int j = 2; j <= n; ++j) logfact += std::log(double(j));
    double pn = std::exp(-mu + n * std::log(mu) - logfact);
    tv += std::abs(std::norm(psi.amp[i]) - pn);
  }
  CHECK(0.5 * tv < 1e-8);
  // mean occupation
  cdouble nbar = expectation(number_operator(b), psi);
  CHECK(nbar.real() == doctest::Approx(mu).epsilon(1e-9));
  // cutoff overflow guard
  FockBasis tiny(g, 1, 4);
  CHECK_THROWS(coherent_displace(vacuum(tiny), phi, N));
}

TEST_CASE("single-mode squeeze matches the analytic amplitudes") {
  Grid g(1, 8, 2 * pi);
  FockBasis b(g, 1, 60);
  for (cdouble lambda : {cdouble(0.5, 0.0), cdouble(0.3, 0.25)}) {
    Field e0 = b.mode(0);
    Kernel k(g, lambda * (e0.values * e0.values.transpose()),
             Symmetry::Symmetric);
    FockVector psi = pair_rotate(vacuum(b), PairKernel(k));
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-9));
    double r = std::abs(lambda);
    cdouble dir = lambda / r;
    for (long i = 0; i < b.size(); ++i) {
      int n = b.occ(i)[0];
      if (n % 2 == 1) {
        CHECK(std::abs(psi.amp[i]) < 1e-12);
        continue;
      }
      int half = n / 2;
      double log2nfact = 0, loghalffact = 0;
      for (int j = 2; j <= n; ++j) log2nfact += std::log(double(j));
      for (int j = 2; j <= half; ++j) loghalffact += std::log(double(j));
      cdouble expect = std::pow(dir * std::tanh(r), half) *
                       std::exp(0.5 * log2nfact - half * std::log(2.0) -
                                loghalffact) /
                       std::sqrt(std::cosh(r));
      CHECK(std::abs(psi.amp[i] - expect) < 1e-9);
    }
  }
}

TEST_CASE("krylov exponential matches dense eigen-decomposition") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 3, 4);
  PotentialSpec p;
  p.amplitude = 1.1;
  p.sigma = 0.5;
  p.beta = 0.5;
  p.N = 4;
  Field v = build_vN(p, g);
  SecondQuantizedOperator H = build_hamiltonian(b, v, 4);

  CounterRng rng(23);
  FockVector psi(b);
  for (long i = 0; i < b.size(); ++i) psi.amp[i] = rng.cnormal();
  psi.amp /= psi.amp.norm();

  double t = 0.4;
  FockVector ours = evolve_exact(psi, H, t);  // e^{+itH} psi
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(H.mat));
  Vec dense = es.eigenvectors() *
              ((cdouble(0, 1) * t * es.eigenvalues().array().cast<cdouble>())
                   .exp() *
               (es.eigenvectors().adjoint() * psi.amp).array())
                  .matrix();
  CHECK((ours.amp - dense).norm() < 1e-9);

  FockVector id = evolve_exact(psi, H, 0.0);
  CHECK((id.amp - psi.amp).norm() < 1e-12);
}

TEST_CASE("marginals of a coherent state are condensate products") {
  Grid g(1, 16, 2 * pi);
  int M = 3;
  FockBasis b(g, M, 26);
  long N = 4;
  CounterRng rng(29);
  // phi inside the mode span, unit norm
  Vec coef(M);
  for (int m = 0; m < M; ++m) coef[m] = rng.cnormal();
  Field phi(g);
  for (int m = 0; m < M; ++m) phi.values += coef[m] * b.mode(m).values;
  phi.values /= l2_norm(phi);

  FockVector psi = coherent_displace(vacuum(b), phi, N);
  long T = g.total();

  MarginalTensor L01 = marginal(psi, 0, 1, N);
  double err = 0;
  for (long x = 0; x < T; ++x)
    err = std::max(err, std::abs(L01.at({x}) - phi.values[x]));
  CHECK(err < 1e-8);

  MarginalTensor L11 = marginal(psi, 1, 1, N);
  err = 0;
  for (long y = 0; y < T; ++y)
    for (long x = 0; x < T; ++x)
      err = std::max(err, std::abs(L11.at({y, x}) -
                                   std::conj(phi.values[y]) * phi.values[x]));
  CHECK(err < 1e-8);

  MarginalTensor L02 = marginal(psi, 0, 2, N);
  err = 0;
  for (long x1 = 0; x1 < T; ++x1)
    for (long x2 = 0; x2 < T; ++x2)
      err = std::max(err, std::abs(L02.at({x1, x2}) -
                                   phi.values[x1] * phi.values[x2]));
  CHECK(err < 1e-8);
}

TEST_CASE("marginals of a squeezed vacuum match the hyperbolic kernels") {
  Grid g(1, 16, 2 * pi);
  int M = 3;
  FockBasis b(g, M, 20);
  long N = 4;
  CounterRng rng(31);
  Mat C = Mat::Zero(M, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n <= m; ++n) {
      C(m, n) = 0.1 * rng.cnormal();
      C(n, m) = C(m, n);
    }
  Kernel k(g, Symmetry::Symmetric);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n)
      k.values += C(m, n) * (b.mode(m).values * b.mode(n).values.transpose());
  k.values = 0.5 * (k.values + k.values.transpose()).eval();
  k.tag = Symmetry::Symmetric;

  FockVector psi = pair_rotate(vacuum(b), PairKernel(k));
  HyperbolicPair hp = hyperbolic_from_k(PairKernel(k));
  long T = g.total();

  // L11(y; x) = <a*(y) a(x)> / N = (u o conj(u))(x, y) / N = w2(x, y) / 2N
  MarginalTensor L11 = marginal(psi, 1, 1, N);
  double err = 0;
  for (long y = 0; y < T; ++y)
    for (long x = 0; x < T; ++x)
      err = std::max(err, std::abs(L11.at({y, x}) -
                                   hp.w2.values(x, y) / (2.0 * N)));
  CHECK(err < 1e-7);

  // Lambda(x1, x2) = sh(2k)(x1, x2) / 2N = <a_{x1} a_{x2}> / N
  MarginalTensor L02 = marginal(psi, 0, 2, N);
  err = 0;
  for (long x1 = 0; x1 < T; ++x1)
    for (long x2 = 0; x2 < T; ++x2)
      err = std::max(err, std::abs(L02.at({x1, x2}) -
                                   hp.s2.values(x1, x2) / (2.0 * N)));
  CHECK(err < 1e-7);
}

TEST_CASE("bogoliubov conjugation identity on the truncated space") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 3, 36);
  Kernel zero(g, Symmetry::Symmetric);
  CHECK(verify_conjugation(PairKernel(zero), b) < 1e-12);
  CounterRng rng(37);
  Mat C = Mat::Zero(3, 3);
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n <= m; ++n) C(m, n) = C(n, m) = 0.1 * rng.cnormal();
  Kernel k(g, Symmetry::Symmetric);
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n)
      k.values += C(m, n) * (b.mode(m).values * b.mode(n).values.transpose());
  k.values = 0.5 * (k.values + k.values.transpose()).eval();
  CHECK(verify_conjugation(PairKernel(k), b) < 1e-8);
}

TEST_CASE("fock approximation error of the exact ansatz is zero") {
  Grid g(1, 16, 2 * pi);
  FockBasis b(g, 2, 32);
  long N = 4;
  CounterRng rng(41);
  Field phi(g);
  phi.values = 0.8 * b.mode(0).values + cdouble(0.3, 0.4) * b.mode(1).values;
  phi.values /= l2_norm(phi);
  Kernel k(g, Symmetry::Symmetric);
  k.values = 0.2 * (b.mode(0).values * b.mode(1).values.transpose() +
                    b.mode(1).values * b.mode(0).values.transpose());
  FockVector ansatz =
      coherent_displace(pair_rotate(vacuum(b), PairKernel(k)), phi, N);
  double theta = 99;
  CHECK(fock_error(ansatz, phi, k, N, &theta) < 1e-6);
  CHECK(std::abs(theta) < 1e-6);
  // a rotated copy is matched with the optimal phase
  FockVector rotated = ansatz;
  rotated.amp *= std::polar(1.0, 0.9);
  double th2 = 0;
  CHECK(fock_error(rotated, phi, k, N, &th2) < 1e-6);
  CHECK(std::min(std::abs(th2 - 0.9), std::abs(th2 + 0.9)) < 1e-6);
  // a state orthogonal to the ansatz sits at the maximal distance sqrt(2)
  FockVector r(b);
  for (long i = 0; i < b.size(); ++i) r.amp[i] = rng.cnormal();
  r.amp -= overlap(ansatz, r) / overlap(ansatz, ansatz) * ansatz.amp;
  r.amp /= r.amp.norm();
  CHECK(fock_error(r, phi, k, N) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}
