#pragma once

// Exact second-quantized reference: finite mode truncation of Fock space
// with a total-occupation cutoff, sparse second-quantized operators, Krylov
// exponentials, exact evolution, marginals and the approximation error of
// the displaced-squeezed ansatz.

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "hfb/bogoliubov.hpp"
#include "hfb/grid.hpp"

namespace hfb {

// Lowest-|frequency| plane-wave modes on the grid torus plus the occupation
// basis { (n_1..n_M) : sum n_j <= n_max }. Shared-immutable like Grid.
class FockBasis {
 public:
  FockBasis(const Grid& g, int M, int n_max);

  const Grid& grid() const { return data_->grid; }
  int M() const { return data_->M; }
  int n_max() const { return data_->n_max; }
  long size() const { return static_cast<long>(data_->occ.size()); }

  const std::vector<int>& occ(long i) const { return data_->occ[i]; }
  int total_occ(long i) const { return data_->sector[i]; }
  long index(const std::vector<int>& occ) const;  // -1 if outside basis

  // mode m as a grid field e_m(x) = exp(i xi_m . x) / L^{d/2}
  Field mode(int m) const;
  const Mat& modes() const { return data_->modes; }  // total x M
  double kinetic_eigenvalue(int m) const { return -data_->xi2m[m]; }

  bool operator==(const FockBasis& o) const { return data_ == o.data_; }

 private:
  struct Data {
    Grid grid;
    int M = 0, n_max = 0;
    Mat modes;
    std::vector<double> xi2m;
    std::vector<std::vector<int>> occ;
    std::vector<int> sector;
    std::vector<long> lookup_keys;  // sorted packed keys
    std::vector<long> lookup_vals;
  };
  std::shared_ptr<const Data> data_;
};

struct FockVector {
  FockBasis basis;
  Vec amp;

  explicit FockVector(const FockBasis& b) : basis(b), amp(Vec::Zero(b.size())) {}
  double norm() const { return amp.norm(); }
  // amplitude mass in the top occupation shell (sum n = n_max)
  double tail_mass() const;
};

using SpMat = Eigen::SparseMatrix<cdouble>;

struct SecondQuantizedOperator {
  FockBasis basis;
  SpMat mat;
  bool hermitian = false;
};

FockVector vacuum(const FockBasis& b);

SecondQuantizedOperator annihilator(const FockBasis& b, int m);
SecondQuantizedOperator number_operator(const FockBasis& b);

// H = H_1 - V/N with H_1 = int a*_x Delta a_x (kinetic eigenvalue -|xi|^2)
// and V = (1/2) int v_N(x-y) a*_x a*_y a_y a_x, two-body elements by grid
// quadrature of v_N against mode quadruples.
SecondQuantizedOperator build_hamiltonian(const FockBasis& b, const Field& vN,
                                          long N);

cdouble overlap(const FockVector& a, const FockVector& b);
cdouble expectation(const SecondQuantizedOperator& op, const FockVector& v);

// e^{-i theta H} v for hermitian H, adaptive Lanczos, tolerance ~1e-11
FockVector krylov_expm(const SecondQuantizedOperator& H, const FockVector& v,
                       double theta);

// e^{-sqrt(N) A(phi)} psi with A(phi) = int (conj(phi) a - phi a*);
// *projection_residual receives || phi - P_M phi ||_{L2} if given.
FockVector coherent_displace(const FockVector& psi, const Field& phi, long N,
                             double tail_bound = 1e-8,
                             double* projection_residual = nullptr);

// e^{-B(k)} psi with B(k) = (1/2) int (conj(k) a a - k a* a*)
FockVector pair_rotate(const FockVector& psi, const PairKernel& k,
                       double tail_bound = 1e-8,
                       double* projection_residual = nullptr);

// psi(t) = e^{i t H} psi
FockVector evolve_exact(const FockVector& psi, const SecondQuantizedOperator& H,
                        double t);

// L_{m,n}(y_1..y_m; x_1..x_n) = N^{-(m+n)/2} <a_{y_1}..a_{y_m} psi,
// a_{x_1}..a_{x_n} psi>, mapped to grid points via the mode functions.
// m + n <= 4 required. Index order matches bogoliubov::MarginalTensor.
MarginalTensor marginal(const FockVector& psi, int m, int n, long N);

// max residual of e^{B} a_x e^{-B} = int ch(x,y) a_y dy + int sh(x,y) a*_y dy
// over a probe set of points x and random low-occupation test vectors
double verify_conjugation(const PairKernel& k, const FockBasis& b,
                          unsigned seed = 1);

// sqrt(2 - 2 |<psi_exact, psi_ansatz>|) with the optimal phase; the ansatz is
// coherent_displace(pair_rotate(vacuum, k), phi, N).
double fock_error(const FockVector& psi_exact, const Field& phi, const Kernel& k,
                  long N, double* theta = nullptr);

}  // namespace hfb
