#pragma once

// Periodic torus discretization, spectral transforms and the dense kernel
// algebra (composition with quadrature weight, trace density) that all
// field/kernel equations are written in.

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace hfb {

using cdouble = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

enum class Symmetry { None, Symmetric, Hermitian };
enum class FT { Forward, Inverse };

class Grid {
 public:
  // d in {1,2,3}, n a power of two >= 8 per axis, L the box side length.
  Grid(int d, int n, double L);
  Grid() = default;

  int d() const { return data_->d; }
  int n() const { return data_->n; }
  double L() const { return data_->L; }
  double h() const { return data_->h; }
  long total() const { return data_->total; }
  double weight() const { return data_->weight; }  // quadrature weight h^d

  // coordinate of flat index along axis a, in [0, L)
  double coord(long flat, int a) const;
  // coordinate wrapped to [-L/2, L/2)
  double coord_centered(long flat, int a) const;
  // |xi|^2 of the flat frequency index (symmetric integer lattice * 2pi/L)
  double xi2(long flat) const { return data_->xi2[flat]; }
  // flat index of the periodic difference i - j (per axis, mod n)
  long wrap_diff(long i, long j) const;

  // unitary d-dimensional DFT matrix over flat indices (total x total)
  const Mat& dft() const { return data_->F; }

  bool operator==(const Grid& o) const { return data_ == o.data_; }
  bool same(const Grid& o) const {
    return data_ == o.data_ ||
           (data_->d == o.data_->d && data_->n == o.data_->n &&
            data_->L == o.data_->L);
  }

 private:
  struct Data {
    int d = 0, n = 0;
    double L = 0, h = 0, weight = 0;
    long total = 0;
    std::vector<double> xi2;
    Mat F;
  };
  std::shared_ptr<const Data> data_;
};

struct Field {
  Grid grid;
  Vec values;

  Field() = default;
  Field(const Grid& g) : grid(g), values(Vec::Zero(g.total())) {}
  Field(const Grid& g, Vec v) : grid(g), values(std::move(v)) {}
};

struct Kernel {
  Grid grid;
  Mat values;
  Symmetry tag = Symmetry::None;

  Kernel() = default;
  Kernel(const Grid& g, Symmetry t = Symmetry::None)
      : grid(g), values(Mat::Zero(g.total(), g.total())), tag(t) {}
  Kernel(const Grid& g, Mat m, Symmetry t = Symmetry::None)
      : grid(g), values(std::move(m)), tag(t) {}
};

// ---- field algebra -------------------------------------------------------

Field transform(const Field& f, FT direction);
double l2_norm(const Field& f);
cdouble inner(const Field& f, const Field& g);  // conj(f) . g with weight h^d
Field outer_apply(const Kernel& A, const Field& f);  // x -> int A(x,y) f(y) dy

// rank-one kernels
Kernel outer(const Field& a, const Field& b);  // (x,y) -> a(x) b(y)

// ---- kernel algebra ------------------------------------------------------

// (A o B)(x,y) = int A(x,z) B(z,y) dz  (Riemann weight h^d). The result is
// tagged Symmetric/Hermitian when the computed values actually satisfy the
// identity to 1e-12 relative.
Kernel compose(const Kernel& A, const Kernel& B);
Field trace_density(const Kernel& A);  // x -> A(x,x)
cdouble trace(const Kernel& A);        // sum_x A(x,x) h^d

Kernel delta_kernel(const Grid& g);    // h^{-d} at coincident nodes
Kernel conj(const Kernel& A);
Kernel transpose(const Kernel& A);
Kernel adjoint(const Kernel& A);

double l2_norm(const Kernel& A);  // L^2(dx dy) norm, weight h^{2d}
double symmetry_residual(const Kernel& A);   // ||A - A^T|| / max(||A||,1)
double hermiticity_residual(const Kernel& A);  // ||A - A^dag|| / max(||A||,1)
Symmetry detect_tag(const Mat& m, double tol = 1e-12);

// spectral application of the Laplacian: Delta f (eigenvalue -|xi|^2)
Field laplacian(const Field& f);
// Laplacian in the first/second variable of a kernel
Kernel laplacian_x(const Kernel& K);
Kernel laplacian_y(const Kernel& K);

}  // namespace hfb
