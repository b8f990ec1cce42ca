#pragma once

// Functional calculus on symmetric pair kernels: Takagi factorization,
// sh/ch construction, recovery of (psi, omega) from (Lambda, Gamma, phi),
// inverse calculus, and the closed-form one/two/three-body marginals of the
// displaced quasi-free state.

#include <vector>

#include "hfb/grid.hpp"

namespace hfb {

struct PairKernel {
  Kernel k;  // symmetric
  explicit PairKernel(Kernel kk);
};

// k = U diag(sigma) U^T with columns of U orthonormal in L^2 (quadrature
// inner product) and sigma >= 0 descending; operator-normalized so a
// rank-one k = lambda e (x) e with ||e||_{L2}=1 gives sigma = (lambda, ...).
struct TakagiFactors {
  Mat U;                  // grid-value matrix, columns L2-orthonormal
  Eigen::VectorXd sigma;  // operator singular values, descending
  Grid grid;
};

struct HyperbolicPair {
  Kernel u;   // sh(k), symmetric
  Kernel c;   // ch(k) = delta_h + p, hermitian positive definite
  Kernel s2;  // sh(2k), symmetric
  Kernel w2;  // ch(2k) - delta, hermitian PSD; conj(w2) = 2 conj(u) o u
};

TakagiFactors takagi(const Kernel& k);
HyperbolicPair hyperbolic_from_k(const PairKernel& k);

// psi = 2N (Lambda - phi (x) phi), omega = 2N (Gamma - conj(phi) (x) phi)
std::pair<Kernel, Kernel> recover_pair(const Kernel& Lambda, const Kernel& Gamma,
                                       const Field& phi, long N);

// inverse calculus: k = (1/2) arcsinh through the Takagi factors of psi
PairKernel k_from_pair(const Kernel& psi);

// Flattened marginal tensor; index order (y_1..y_m, x_1..x_n), the first
// (row) variable fastest.
struct MarginalTensor {
  int m = 0, n = 0;
  Grid grid;
  std::vector<cdouble> data;  // size total^(m+n)

  cdouble& at(const std::vector<long>& idx);
  cdouble at(const std::vector<long>& idx) const;
};

enum class MarginalIndex { L12, L22, L13 };

// Closed-form L_{1,2}, L_{2,2} or L_{1,3} of the displaced quasi-free state
// with condensate phi and pair kernels (u, c) = (sh(k), ch(k)).
MarginalTensor closed_form_marginals(const Field& phi, const Kernel& u,
                                     const Kernel& c, long N,
                                     MarginalIndex which);

}  // namespace hfb
