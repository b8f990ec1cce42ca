#include "hfb/bogoliubov.hpp"

#include <cmath>

namespace hfb {

PairKernel::PairKernel(Kernel kk) : k(std::move(kk)) {
  if (symmetry_residual(k) > 1e-10)
    throw std::invalid_argument("PairKernel: kernel is not symmetric");
  k.tag = Symmetry::Symmetric;
}

// Takagi via the real symmetric embedding: for A = X + iY complex symmetric,
// M = [[X, Y], [Y, -X]] is real symmetric with spectrum {+-sigma}; an
// eigenvector (u; v) of eigenvalue sigma >= 0 yields the Takagi vector
// w = u + iv with A conj(w) = sigma w, and real orthogonality of the
// eigenbasis gives complex orthonormality of the chosen half.
TakagiFactors takagi(const Kernel& k) {
  if (symmetry_residual(k) > 1e-10)
    throw std::invalid_argument("takagi: kernel is not symmetric");
  const Grid& g = k.grid;
  const long T = g.total();
  const double w = g.weight();

  // operator-scale matrix, symmetrized to kill rounding skew
  Mat A = 0.5 * w * (k.values + k.values.transpose());

  Eigen::MatrixXd M(2 * T, 2 * T);
  Eigen::MatrixXd X = A.real(), Y = A.imag();
  M.topLeftCorner(T, T) = X;
  M.topRightCorner(T, T) = Y;
  M.bottomLeftCorner(T, T) = Y;
  M.bottomRightCorner(T, T) = -X;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("takagi: eigensolver failed to converge");

  // eigenvalues ascending; take the top T (the nonnegative half up to ties)
  Mat U(T, T);
  Eigen::VectorXd sigma(T);
  for (long j = 0; j < T; ++j) {
    long src = 2 * T - 1 - j;
    sigma[j] = std::max(es.eigenvalues()[src], 0.0);
    U.col(j) = es.eigenvectors().col(src).head(T).cast<cdouble>() +
               cdouble(0, 1) * es.eigenvectors().col(src).tail(T).cast<cdouble>();
  }

  // Modified Gram-Schmidt in the complex inner product; ties at sigma = 0 can
  // break complex orthogonality of the real eigenbasis.
  for (long j = 0; j < T; ++j) {
    for (long i = 0; i < j; ++i) U.col(j) -= U.col(i).dot(U.col(j)) * U.col(i);
    double nrm = U.col(j).norm();
    if (nrm > 1e-8) {
      U.col(j) /= nrm;
    } else {
      // degenerate null direction: replace with any unit vector orthogonal
      // to the previous columns
      for (long b = 0; b < T; ++b) {
        Vec cand = Vec::Unit(T, b);
        for (long i = 0; i < j; ++i) cand -= U.col(i).dot(cand) * U.col(i);
        if (cand.norm() > 0.5) {
          U.col(j) = cand / cand.norm();
          break;
        }
      }
    }
  }

  double resid = (U * sigma.asDiagonal() * U.transpose() - A).norm();
  if (resid > 1e-10 * std::max(1.0, A.norm()))
    throw std::runtime_error("takagi: reconstruction residual " + std::to_string(resid));

  TakagiFactors out;
  out.U = U / std::sqrt(w);  // kernel-value normalization (columns L2-orthonormal)
  out.sigma = sigma;
  out.grid = g;
  return out;
}

namespace {

// assemble U f(sigma) U^T (symmetric) or U f(sigma) U^dag (hermitian)
// in kernel-value normalization
Kernel func_sym(const TakagiFactors& t, const Eigen::VectorXd& f) {
  Mat m = t.U * f.asDiagonal() * t.U.transpose();
  return Kernel(t.grid, std::move(m), Symmetry::Symmetric);
}

Kernel func_herm(const TakagiFactors& t, const Eigen::VectorXd& f) {
  Mat m = t.U * f.asDiagonal() * t.U.adjoint();
  return Kernel(t.grid, std::move(m), Symmetry::Hermitian);
}

}  // namespace

HyperbolicPair hyperbolic_from_k(const PairKernel& k) {
  TakagiFactors t = takagi(k.k);
  const long T = t.sigma.size();
  Eigen::VectorXd sh(T), ch(T), sh2(T), ch2m1(T);
  for (long i = 0; i < T; ++i) {
    sh[i] = std::sinh(t.sigma[i]);
    ch[i] = std::cosh(t.sigma[i]);
    sh2[i] = std::sinh(2 * t.sigma[i]);
    ch2m1[i] = 2 * std::sinh(t.sigma[i]) * std::sinh(t.sigma[i]);  // cosh(2s)-1
  }
  HyperbolicPair out;
  out.u = func_sym(t, sh);
  out.c = func_herm(t, ch);  // includes the delta_h part (cosh(0) = 1)
  out.s2 = func_sym(t, sh2);
  out.w2 = func_herm(t, ch2m1);
  return out;
}

std::pair<Kernel, Kernel> recover_pair(const Kernel& Lambda, const Kernel& Gamma,
                                       const Field& phi, long N) {
  if (symmetry_residual(Lambda) > 1e-8)
    throw std::invalid_argument("recover_pair: Lambda not symmetric");
  if (hermiticity_residual(Gamma) > 1e-8)
    throw std::invalid_argument("recover_pair: Gamma not hermitian");
  Mat psi = 2.0 * N * (Lambda.values - phi.values * phi.values.transpose());
  Mat omega = 2.0 * N * (Gamma.values - phi.values.conjugate() * phi.values.transpose());
  return {Kernel(Lambda.grid, std::move(psi), Symmetry::Symmetric),
          Kernel(Gamma.grid, std::move(omega), Symmetry::Hermitian)};
}

PairKernel k_from_pair(const Kernel& psi) {
  TakagiFactors t = takagi(psi);
  Eigen::VectorXd half_asinh(t.sigma.size());
  for (long i = 0; i < t.sigma.size(); ++i) half_asinh[i] = 0.5 * std::asinh(t.sigma[i]);
  return PairKernel(func_sym(t, half_asinh));
}

cdouble& MarginalTensor::at(const std::vector<long>& idx) {
  long flat = 0, mul = 1;
  for (size_t a = 0; a < idx.size(); ++a) {
    flat += mul * idx[a];
    mul *= grid.total();
  }
  return data[flat];
}

cdouble MarginalTensor::at(const std::vector<long>& idx) const {
  return const_cast<MarginalTensor*>(this)->at(idx);
}

// Marginals of the displaced quasi-free state expressed through the Wick
// blocks: with A = conj(u) o u, P = u o c (= psi/2), Lambda and Gamma,
//   L_{1,2}(x1;x2,x3) = Gamma(x1,x2) phi(x3) + (1/N) P(x3,x2) conj(phi)(x1)
//                       + (1/N) A(x1,x3) phi(x2)
//   L_{2,2}(y1,y2;x1,x2) = conj(Lambda)(y1,y2) Lambda(x1,x2)
//     + (1/N)[cphi(y1) phi(x1) A(y2,x2) + cphi(y1) phi(x2) A(y2,x1)
//           + cphi(y2) phi(x1) A(y1,x2) + cphi(y2) phi(x2) A(y1,x1)]
//     + (1/N^2)[A(y1,x1) A(y2,x2) + A(y1,x2) A(y2,x1)]
//   L_{1,3}(y1;x1,x2,x3) = conj(Gamma)(x1,y1) Lambda(x2,x3)
//     + (1/N)[phi(x1) phi(x2) A(y1,x3) + phi(x1) phi(x3) A(y1,x2)
//           + cphi(y1) phi(x2) P(x1,x3) + cphi(y1) phi(x3) P(x1,x2)]
//     + (1/N^2)[P(x1,x2) A(y1,x3) + P(x1,x3) A(y1,x2)]
MarginalTensor closed_form_marginals(const Field& phi, const Kernel& u,
                                     const Kernel& c, long N,
                                     MarginalIndex which) {
  const Grid& g = phi.grid;
  const long T = g.total();
  Kernel A = compose(conj(u), u);            // omega/2, hermitian
  Kernel P = compose(c, u);                  // sh(2k)/2 = psi/2, symmetric
  Mat Lam = P.values / double(N) + phi.values * phi.values.transpose();
  Mat Gam = A.values / double(N) +
            phi.values.conjugate() * phi.values.transpose();
  const Vec& ph = phi.values;
  const double invN = 1.0 / double(N);

  MarginalTensor out;
  out.grid = g;
  switch (which) {
    case MarginalIndex::L12: {
      out.m = 1;
      out.n = 2;
      out.data.assign(T * T * T, cdouble(0));
      // index order (x1; x2, x3), x1 fastest
      for (long x3 = 0; x3 < T; ++x3)
        for (long x2 = 0; x2 < T; ++x2)
          for (long x1 = 0; x1 < T; ++x1)
            out.data[x1 + T * (x2 + T * x3)] =
                Gam(x1, x2) * ph[x3] + invN * P.values(x3, x2) * std::conj(ph[x1]) +
                invN * A.values(x1, x3) * ph[x2];
      break;
    }
    case MarginalIndex::L22: {
      out.m = 2;
      out.n = 2;
      out.data.assign(T * T * T * T, cdouble(0));
      for (long x2 = 0; x2 < T; ++x2)
        for (long x1 = 0; x1 < T; ++x1)
          for (long y2 = 0; y2 < T; ++y2)
            for (long y1 = 0; y1 < T; ++y1) {
              cdouble v = std::conj(Lam(y1, y2)) * Lam(x1, x2);
              v += invN * (std::conj(ph[y1]) * ph[x1] * A.values(y2, x2) +
                           std::conj(ph[y1]) * ph[x2] * A.values(y2, x1) +
                           std::conj(ph[y2]) * ph[x1] * A.values(y1, x2) +
                           std::conj(ph[y2]) * ph[x2] * A.values(y1, x1));
              v += invN * invN *
                   (A.values(y1, x1) * A.values(y2, x2) +
                    A.values(y1, x2) * A.values(y2, x1));
              out.data[y1 + T * (y2 + T * (x1 + T * x2))] = v;
            }
      break;
    }
    case MarginalIndex::L13: {
      out.m = 1;
      out.n = 3;
      out.data.assign(T * T * T * T, cdouble(0));
      for (long x3 = 0; x3 < T; ++x3)
        for (long x2 = 0; x2 < T; ++x2)
          for (long x1 = 0; x1 < T; ++x1)
            for (long y1 = 0; y1 < T; ++y1) {
              cdouble v = std::conj(Gam(x1, y1)) * Lam(x2, x3);
              v += invN * (ph[x1] * ph[x2] * A.values(y1, x3) +
                           ph[x1] * ph[x3] * A.values(y1, x2) +
                           std::conj(ph[y1]) * ph[x2] * P.values(x1, x3) +
                           std::conj(ph[y1]) * ph[x3] * P.values(x1, x2));
              v += invN * invN *
                   (P.values(x1, x2) * A.values(y1, x3) +
                    P.values(x1, x3) * A.values(y1, x2));
              out.data[y1 + T * (x1 + T * (x2 + T * x3))] = v;
            }
      break;
    }
  }
  return out;
}

}  // namespace hfb
