#include "hfb/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hfb/potential.hpp"
#include "hfb/rng.hpp"

namespace hfb {

namespace {

long pack_key(const std::vector<int>& occ, int n_max) {
  long key = 0;
  for (int v : occ) key = key * (n_max + 1) + v;
  return key;
}

void enumerate_occ(int M, int n_max, int slot, int used, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
  if (slot == M) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v + used <= n_max; ++v) {
    cur[slot] = v;
    enumerate_occ(M, n_max, slot + 1, used + v, cur, out);
  }
}

}  // namespace

FockBasis::FockBasis(const Grid& g, int M, int n_max) {
  if (M < 1 || M > g.total()) throw std::invalid_argument("fock: bad mode count");
  if (n_max < 1) throw std::invalid_argument("fock: bad occupation cutoff");
  auto data = std::make_shared<Data>();
  data->grid = g;
  data->M = M;
  data->n_max = n_max;

  std::vector<long> order(g.total());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    return g.xi2(a) != g.xi2(b) ? g.xi2(a) < g.xi2(b) : a < b;
  });

  const int n = g.n();
  const double k0 = 2.0 * std::numbers::pi / g.L();
  const double amp = std::pow(g.L(), -0.5 * g.d());
  data->modes.resize(g.total(), M);
  data->xi2m.resize(M);
  for (int m = 0; m < M; ++m) {
    long f = order[m];
    data->xi2m[m] = g.xi2(f);
    std::vector<double> xi(g.d());
    long rem = f;
    for (int a = 0; a < g.d(); ++a) {
      int i = static_cast<int>(rem % n);
      rem /= n;
      xi[a] = k0 * (i <= n / 2 ? i : i - n);
    }
    for (long x = 0; x < g.total(); ++x) {
      double phase = 0;
      for (int a = 0; a < g.d(); ++a) phase += xi[a] * g.coord(x, a);
      data->modes(x, m) = amp * cdouble(std::cos(phase), std::sin(phase));
    }
  }

  std::vector<int> cur(M);
  enumerate_occ(M, n_max, 0, 0, cur, data->occ);
  data->sector.resize(data->occ.size());
  std::vector<std::pair<long, long>> kv(data->occ.size());
  for (size_t i = 0; i < data->occ.size(); ++i) {
    data->sector[i] = std::accumulate(data->occ[i].begin(), data->occ[i].end(), 0);
    kv[i] = {pack_key(data->occ[i], n_max), static_cast<long>(i)};
  }
  std::sort(kv.begin(), kv.end());
  data->lookup_keys.reserve(kv.size());
  data->lookup_vals.reserve(kv.size());
  for (auto& [k, v] : kv) {
    data->lookup_keys.push_back(k);
    data->lookup_vals.push_back(v);
  }
  data_ = std::move(data);
}

long FockBasis::index(const std::vector<int>& occ) const {
  for (int v : occ)
    if (v < 0 || v > data_->n_max) return -1;
  long key = pack_key(occ, data_->n_max);
  auto it = std::lower_bound(data_->lookup_keys.begin(), data_->lookup_keys.end(), key);
  if (it == data_->lookup_keys.end() || *it != key) return -1;
  return data_->lookup_vals[it - data_->lookup_keys.begin()];
}

Field FockBasis::mode(int m) const {
  return Field(data_->grid, data_->modes.col(m));
}

double FockVector::tail_mass() const {
  double s = 0;
  for (long i = 0; i < amp.size(); ++i)
    if (basis.total_occ(i) == basis.n_max()) s += std::norm(amp[i]);
  return s;
}

FockVector vacuum(const FockBasis& b) {
  FockVector v(b);
  std::vector<int> zero(b.M(), 0);
  v.amp[b.index(zero)] = 1.0;
  return v;
}

SecondQuantizedOperator annihilator(const FockBasis& b, int m) {
  std::vector<Eigen::Triplet<cdouble>> trip;
  std::vector<int> occ;
  for (long i = 0; i < b.size(); ++i) {
    occ = b.occ(i);
    if (occ[m] == 0) continue;
    double c = std::sqrt(static_cast<double>(occ[m]));
    occ[m] -= 1;
    long j = b.index(occ);
    trip.emplace_back(j, i, c);
  }
  SecondQuantizedOperator op{b, SpMat(b.size(), b.size()), false};
  op.mat.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SecondQuantizedOperator number_operator(const FockBasis& b) {
  std::vector<Eigen::Triplet<cdouble>> trip;
  for (long i = 0; i < b.size(); ++i)
    trip.emplace_back(i, i, static_cast<double>(b.total_occ(i)));
  SecondQuantizedOperator op{b, SpMat(b.size(), b.size()), true};
  op.mat.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SecondQuantizedOperator build_hamiltonian(const FockBasis& b, const Field& vN,
                                          long N) {
  if (!b.grid().same(vN.grid))
    throw std::invalid_argument("build_hamiltonian: grid mismatch");
  const Grid& g = b.grid();
  const int M = b.M();
  const Mat& E = b.modes();

  // V_{mnpq} = int v_N(x-y) conj(e_m)(x) conj(e_n)(y) e_p(y) e_q(x) dx dy,
  // via w_{np} = v_N * (conj(e_n) e_p)
  std::vector<Mat> Vt(M, Mat(M, M * M));  // Vt[m](q, n*M+p)
  {
    Mat W(g.total(), M * M);
    for (int nn = 0; nn < M; ++nn)
      for (int p = 0; p < M; ++p) {
        Field f(g, E.col(nn).conjugate().cwiseProduct(E.col(p)));
        W.col(nn * M + p) = convolve(vN, f).values;
      }
    for (int m = 0; m < M; ++m)
      for (int q = 0; q < M; ++q) {
        Vec emq = E.col(m).conjugate().cwiseProduct(E.col(q));
        for (int c = 0; c < M * M; ++c)
          Vt[m](q, c) = g.weight() * (emq.transpose() * W.col(c))(0, 0);
      }
  }

  std::vector<Eigen::Triplet<cdouble>> trip;
  std::vector<int> occ;
  for (long i = 0; i < b.size(); ++i) {
    double kin = 0;
    for (int m = 0; m < M; ++m) kin += b.occ(i)[m] * b.kinetic_eigenvalue(m);
    trip.emplace_back(i, i, kin);

    for (int q = 0; q < M; ++q) {
      if (b.occ(i)[q] == 0) continue;
      for (int p = 0; p < M; ++p) {
        occ = b.occ(i);
        double amp = std::sqrt(static_cast<double>(occ[q]));
        occ[q] -= 1;
        if (occ[p] == 0) continue;
        amp *= std::sqrt(static_cast<double>(occ[p]));
        occ[p] -= 1;
        for (int nn = 0; nn < M; ++nn) {
          for (int m = 0; m < M; ++m) {
            cdouble vv = Vt[m](q, nn * M + p);
            if (std::abs(vv) < 1e-300) continue;
            std::vector<int> occ2 = occ;
            double amp2 = amp * std::sqrt(static_cast<double>(occ2[nn] + 1));
            occ2[nn] += 1;
            amp2 *= std::sqrt(static_cast<double>(occ2[m] + 1));
            occ2[m] += 1;
            long j = b.index(occ2);
            if (j < 0) continue;  // cutoff-clipped (same total, never happens)
            trip.emplace_back(j, i, -0.5 / N * vv * amp2);
          }
        }
      }
    }
  }

  SecondQuantizedOperator op{b, SpMat(b.size(), b.size()), true};
  op.mat.setFromTriplets(trip.begin(), trip.end());
  SpMat diff = SpMat(op.mat.adjoint()) - op.mat;
  if (diff.norm() > 1e-12 * std::max(1.0, op.mat.norm()))
    throw std::runtime_error("build_hamiltonian: hermiticity violated");
  return op;
}

cdouble overlap(const FockVector& a, const FockVector& b) {
  if (!(a.basis == b.basis)) throw std::invalid_argument("overlap: basis mismatch");
  return a.amp.dot(b.amp);
}

cdouble expectation(const SecondQuantizedOperator& op, const FockVector& v) {
  return v.amp.dot(op.mat * v.amp);
}

// ---- Lanczos exponential --------------------------------------------------

namespace {

// e^{-i theta H} v in one Krylov space; returns false if not converged
bool lanczos_once(const SpMat& H, const Vec& v, double theta, double tol,
                  int kmax, Vec& out) {
  const double vn = v.norm();
  if (vn == 0) {
    out = v;
    return true;
  }
  std::vector<Vec> V;
  V.push_back(v / vn);
  std::vector<double> alpha, beta;
  int k = 0;
  bool breakdown = false;
  while (k < kmax) {
    Vec w = H * V[k];
    cdouble a = V[k].dot(w);
    alpha.push_back(std::real(a));
    w -= a * V[k];
    if (k > 0) w -= beta[k - 1] * V[k - 1];
    for (auto& q : V) w -= q.dot(w) * q;  // full reorthogonalization
    double bnorm = w.norm();
    ++k;
    // assemble tridiagonal exp on the current space
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Vec u = Vec::Zero(k);
    for (int i = 0; i < k; ++i) {
      cdouble s = 0;
      for (int l = 0; l < k; ++l)
        s += es.eigenvectors()(i, l) *
             std::exp(cdouble(0, -theta * es.eigenvalues()[l])) *
             es.eigenvectors()(0, l);
      u[i] = s;
    }
    double err = bnorm * std::abs(u[k - 1]) * std::abs(theta);
    if (bnorm < 1e-14) breakdown = true;
    if (err < tol || breakdown || k == kmax) {
      if (err < tol || breakdown) {
        out = Vec::Zero(v.size());
        for (int i = 0; i < k; ++i) out += (vn * u[i]) * V[i];
        return true;
      }
      return false;
    }
    beta.push_back(bnorm);
    V.push_back(w / bnorm);
  }
  return false;
}

Vec krylov_expm_vec(const SpMat& H, Vec v, double theta, double tol = 1e-11) {
  int parts = 1;
  while (parts <= 1 << 12) {
    Vec cur = v;
    bool ok = true;
    for (int s = 0; s < parts && ok; ++s) {
      Vec next;
      ok = lanczos_once(H, cur, theta / parts, tol / parts, 64, next);
      if (ok) cur = std::move(next);
    }
    if (ok) return cur;
    parts *= 2;
  }
  throw std::runtime_error("krylov_expm: no convergence");
}

void check_tail(const FockVector& v, double bound, const char* who) {
  double t = v.tail_mass();
  if (t > bound)
    throw std::runtime_error(std::string(who) + ": tail mass " + std::to_string(t) +
                             " exceeds bound (raise the occupation cutoff)");
}

}  // namespace

FockVector krylov_expm(const SecondQuantizedOperator& H, const FockVector& v,
                       double theta) {
  FockVector out = v;
  out.amp = krylov_expm_vec(H.mat, v.amp, theta);
  return out;
}

FockVector coherent_displace(const FockVector& psi, const Field& phi, long N,
                             double tail_bound, double* projection_residual) {
  const FockBasis& b = psi.basis;
  const Grid& g = b.grid();
  if (!g.same(phi.grid)) throw std::invalid_argument("coherent_displace: grid mismatch");
  Vec c = g.weight() * (b.modes().adjoint() * phi.values);  // <e_m, phi>
  if (projection_residual) {
    Vec proj = b.modes() * c;
    *projection_residual = std::sqrt(g.weight()) * (phi.values - proj).norm();
  }

  // K = -i sqrt(N) A(phi), hermitian; e^{-sqrt(N) A} = e^{-i K}
  const double rN = std::sqrt(static_cast<double>(N));
  std::vector<Eigen::Triplet<cdouble>> trip;
  std::vector<int> occ;
  for (long i = 0; i < b.size(); ++i) {
    for (int m = 0; m < b.M(); ++m) {
      if (b.occ(i)[m] > 0) {
        occ = b.occ(i);
        double amp = std::sqrt(static_cast<double>(occ[m]));
        occ[m] -= 1;
        trip.emplace_back(b.index(occ), i, cdouble(0, -1) * rN * std::conj(c[m]) * amp);
      }
      occ = b.occ(i);
      occ[m] += 1;
      long j = b.index(occ);
      if (j >= 0)
        trip.emplace_back(j, i, cdouble(0, 1) * rN * c[m] *
                                    std::sqrt(static_cast<double>(occ[m])));
    }
  }
  SpMat K(b.size(), b.size());
  K.setFromTriplets(trip.begin(), trip.end());

  FockVector out = psi;
  out.amp = krylov_expm_vec(K, psi.amp, 1.0);
  check_tail(out, tail_bound, "coherent_displace");
  return out;
}

namespace {

// K = -i B(k), hermitian, with K_{mn} the mode-space projection of k
SpMat pair_generator(const FockBasis& b, const Kernel& k, double* proj_resid) {
  const Grid& g = b.grid();
  const Mat& E = b.modes();
  Mat Km = g.weight() * g.weight() * (E.adjoint() * k.values * E.conjugate());
  if (proj_resid) {
    Mat rec = E * Km * E.transpose();
    *proj_resid = g.weight() * (k.values - rec).norm();
  }
  std::vector<Eigen::Triplet<cdouble>> trip;
  std::vector<int> occ;
  for (long i = 0; i < b.size(); ++i) {
    for (int m = 0; m < b.M(); ++m)
      for (int nn = 0; nn < b.M(); ++nn) {
        // annihilation part: -(i/2) conj(K_mn) a_m a_n
        occ = b.occ(i);
        if (occ[nn] > 0) {
          double amp = std::sqrt(static_cast<double>(occ[nn]));
          occ[nn] -= 1;
          if (occ[m] > 0) {
            amp *= std::sqrt(static_cast<double>(occ[m]));
            occ[m] -= 1;
            trip.emplace_back(b.index(occ), i,
                              cdouble(0, -0.5) * std::conj(Km(m, nn)) * amp);
          }
        }
        // creation part: +(i/2) K_mn a*_m a*_n
        occ = b.occ(i);
        occ[nn] += 1;
        double amp = std::sqrt(static_cast<double>(occ[nn]));
        occ[m] += 1;
        amp *= std::sqrt(static_cast<double>(occ[m]));
        long j = b.index(occ);
        if (j >= 0) trip.emplace_back(j, i, cdouble(0, 0.5) * Km(m, nn) * amp);
      }
  }
  SpMat K(b.size(), b.size());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace

FockVector pair_rotate(const FockVector& psi, const PairKernel& k,
                       double tail_bound, double* projection_residual) {
  SpMat K = pair_generator(psi.basis, k.k, projection_residual);
  FockVector out = psi;
  out.amp = krylov_expm_vec(K, psi.amp, 1.0);
  check_tail(out, tail_bound, "pair_rotate");
  return out;
}

FockVector evolve_exact(const FockVector& psi, const SecondQuantizedOperator& H,
                        double t) {
  if (!H.hermitian) throw std::invalid_argument("evolve_exact: H not hermitian");
  FockVector out = psi;
  out.amp = krylov_expm_vec(H.mat, psi.amp, -t);  // e^{+i t H}
  double drift = std::abs(out.amp.norm() - psi.amp.norm());
  if (drift > 1e-10)
    throw std::runtime_error("evolve_exact: norm drift " + std::to_string(drift));
  return out;
}

MarginalTensor marginal(const FockVector& psi, int m, int n, long N) {
  if (m < 0 || n < 0 || m + n < 1 || m + n > 4)
    throw std::invalid_argument("marginal: order m+n must be in [1,4]");
  const FockBasis& b = psi.basis;
  const Grid& g = b.grid();
  const int M = b.M();
  const long T = g.total();

  std::vector<SpMat> A(M);
  for (int mu = 0; mu < M; ++mu) A[mu] = annihilator(b, mu).mat;

  // applied[k] : all a_{mu_1}..a_{mu_k} psi over M^k tuples, first index fastest
  auto apply_chain = [&](int order) {
    std::vector<Vec> cur{psi.amp};
    for (int level = 0; level < order; ++level) {
      std::vector<Vec> next(cur.size() * M);
      for (size_t t = 0; t < cur.size(); ++t)
        for (int mu = 0; mu < M; ++mu) next[t * M + mu] = A[mu] * cur[t];
      cur = std::move(next);
    }
    return cur;
  };
  std::vector<Vec> left = apply_chain(m);
  std::vector<Vec> right = apply_chain(n);

  const double scale = std::pow(static_cast<double>(N), -0.5 * (m + n));
  long Mm = 1;
  for (int i = 0; i < m + n; ++i) Mm *= M;
  std::vector<cdouble> tensor(Mm);
  long Lm = static_cast<long>(left.size());
  for (long l = 0; l < Lm; ++l)
    for (long r = 0; r < static_cast<long>(right.size()); ++r)
      tensor[l + Lm * r] = scale * left[l].dot(right[r]);

  // map each mode axis to the grid: conj(E) on y axes, E on x axes
  const Mat& E = b.modes();
  Mat Ec = E.conjugate();
  std::vector<cdouble> cur = std::move(tensor);
  long done = 1;     // product of already-transformed (grid-size) dims
  long rest = Mm;    // product of remaining mode dims
  for (int axis = 0; axis < m + n; ++axis) {
    rest /= M;
    const Mat& C = axis < m ? Ec : E;
    std::vector<cdouble> next(done * T * rest);
    for (long hi = 0; hi < rest; ++hi)
      for (long x = 0; x < T; ++x)
        for (long lo = 0; lo < done; ++lo) {
          cdouble s = 0;
          for (int mu = 0; mu < M; ++mu)
            s += C(x, mu) * cur[lo + done * (mu + M * hi)];
          next[lo + done * (x + T * hi)] = s;
        }
    cur = std::move(next);
    done *= T;
  }

  MarginalTensor out;
  out.m = m;
  out.n = n;
  out.grid = g;
  out.data = std::move(cur);
  return out;
}

double verify_conjugation(const PairKernel& k, const FockBasis& b, unsigned seed) {
  const Grid& g = b.grid();
  HyperbolicPair hp = hyperbolic_from_k(k);
  SpMat KB = pair_generator(b, k.k, nullptr);
  const Mat& E = b.modes();
  // alpha_mu(x) = int ch(x,y) e_mu(y) dy, beta_mu(x) = int sh(x,y) conj(e_mu)(y) dy
  Mat alpha = g.weight() * (hp.c.values * E);
  Mat beta = g.weight() * (hp.u.values * E.conjugate());

  std::vector<SpMat> A(b.M()), Ad(b.M());
  for (int mu = 0; mu < b.M(); ++mu) {
    A[mu] = annihilator(b, mu).mat;
    Ad[mu] = SpMat(A[mu].adjoint());
  }

  CounterRng rng(seed, 0xf0c);
  double worst = 0;
  for (int trial = 0; trial < 3; ++trial) {
    FockVector psi(b);
    // low-occupation probes: the conjugated operator only reaches the cutoff
    // shell through (n_max - occ)/2 pair creations, each damped by tanh||k||,
    // so keeping occ small keeps the truncation spillover far below tolerance
    for (long i = 0; i < b.size(); ++i)
      if (b.total_occ(i) <= std::min(2, b.n_max())) psi.amp[i] = rng.cnormal();
    psi.amp /= psi.amp.norm();

    Vec inner = krylov_expm_vec(KB, psi.amp, 1.0);  // e^{-B} psi
    for (long x = 0; x < g.total(); x += std::max<long>(1, g.total() / 4)) {
      Vec ax = Vec::Zero(b.size());
      for (int mu = 0; mu < b.M(); ++mu) ax += E(x, mu) * (A[mu] * inner);
      Vec lhs = krylov_expm_vec(KB, ax, -1.0);  // e^{B} a_x e^{-B} psi
      Vec rhs = Vec::Zero(b.size());
      for (int mu = 0; mu < b.M(); ++mu)
        rhs += alpha(x, mu) * (A[mu] * psi.amp) + beta(x, mu) * (Ad[mu] * psi.amp);
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

double fock_error(const FockVector& psi_exact, const Field& phi, const Kernel& k,
                  long N, double* theta) {
  FockVector ansatz = vacuum(psi_exact.basis);
  if (l2_norm(k) > 0) ansatz = pair_rotate(ansatz, PairKernel(k));
  ansatz = coherent_displace(ansatz, phi, N);
  cdouble ov = overlap(psi_exact, ansatz);
  if (theta) *theta = -std::arg(ov);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(ov)));
}

}  // namespace hfb
