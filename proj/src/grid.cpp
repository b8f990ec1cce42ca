#include "hfb/grid.hpp"

#include <cmath>
#include <numbers>

namespace hfb {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// frequency integer of axis index i on an n-point symmetric lattice
int freq_int(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

Grid::Grid(int d, int n, double L) {
  if (d < 1 || d > 3) throw std::invalid_argument("grid: d must be 1, 2 or 3");
  if (n < 8 || !power_of_two(n))
    throw std::invalid_argument("grid: n must be a power of two >= 8");
  if (!(L > 0)) throw std::invalid_argument("grid: L must be positive");

  auto data = std::make_shared<Data>();
  data->d = d;
  data->n = n;
  data->L = L;
  data->h = L / n;
  data->total = 1;
  for (int a = 0; a < d; ++a) data->total *= n;
  data->weight = std::pow(data->h, d);

  const double k0 = 2.0 * std::numbers::pi / L;
  data->xi2.resize(data->total);
  for (long f = 0; f < data->total; ++f) {
    long rem = f;
    double s = 0;
    for (int a = 0; a < d; ++a) {
      int i = static_cast<int>(rem % n);
      rem /= n;
      double xi = k0 * freq_int(i, n);
      s += xi * xi;
    }
    data->xi2[f] = s;
  }

  // unitary 1D DFT, then Kronecker powers for d > 1
  Mat D(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double ang = -2.0 * std::numbers::pi * double(j) * double(k) / n;
      D(j, k) = scale * cdouble(std::cos(ang), std::sin(ang));
    }
  Mat F = D;
  for (int a = 1; a < d; ++a) {
    Mat G(F.rows() * n, F.cols() * n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) G.block(j * F.rows(), k * F.cols(), F.rows(), F.cols()) = D(j, k) * F;
    F = std::move(G);
  }
  data->F = std::move(F);
  data_ = std::move(data);
}

double Grid::coord(long flat, int a) const {
  long rem = flat;
  for (int b = 0; b < a; ++b) rem /= data_->n;
  return static_cast<double>(rem % data_->n) * data_->h;
}

double Grid::coord_centered(long flat, int a) const {
  double x = coord(flat, a);
  return x >= data_->L / 2 ? x - data_->L : x;
}

long Grid::wrap_diff(long i, long j) const {
  const int n = data_->n;
  long out = 0, mul = 1;
  for (int a = 0; a < data_->d; ++a) {
    int ia = static_cast<int>(i % n), ja = static_cast<int>(j % n);
    i /= n;
    j /= n;
    out += mul * ((ia - ja + n) % n);
    mul *= n;
  }
  return out;
}

Field transform(const Field& f, FT direction) {
  Field out(f.grid);
  if (direction == FT::Forward)
    out.values = f.grid.dft() * f.values;
  else
    out.values = f.grid.dft().adjoint() * f.values;
  return out;
}

double l2_norm(const Field& f) {
  return std::sqrt(f.grid.weight()) * f.values.norm();
}

cdouble inner(const Field& f, const Field& g) {
  if (!f.grid.same(g.grid)) throw std::invalid_argument("inner: grid mismatch");
  return f.grid.weight() * f.values.dot(g.values);
}

Field outer_apply(const Kernel& A, const Field& f) {
  if (!A.grid.same(f.grid)) throw std::invalid_argument("outer_apply: grid mismatch");
  return Field(f.grid, (A.values * f.values * A.grid.weight()).eval());
}

Kernel outer(const Field& a, const Field& b) {
  if (!a.grid.same(b.grid)) throw std::invalid_argument("outer: grid mismatch");
  Mat m = a.values * b.values.transpose();
  Symmetry tag = detect_tag(m);
  return Kernel(a.grid, std::move(m), tag);
}

Symmetry detect_tag(const Mat& m, double tol) {
  double scale = std::max(m.norm(), 1.0);
  if ((m - m.transpose()).norm() <= tol * scale) return Symmetry::Symmetric;
  if ((m - m.adjoint()).norm() <= tol * scale) return Symmetry::Hermitian;
  return Symmetry::None;
}

Kernel compose(const Kernel& A, const Kernel& B) {
  if (!A.grid.same(B.grid)) throw std::invalid_argument("compose: grid mismatch");
  Mat m = A.values * B.values * A.grid.weight();
  Symmetry tag = detect_tag(m);
  return Kernel(A.grid, std::move(m), tag);
}

Field trace_density(const Kernel& A) {
  return Field(A.grid, A.values.diagonal());
}

cdouble trace(const Kernel& A) {
  return A.grid.weight() * A.values.diagonal().sum();
}

Kernel delta_kernel(const Grid& g) {
  Mat m = Mat::Identity(g.total(), g.total()) / g.weight();
  return Kernel(g, std::move(m), Symmetry::Symmetric);
}

Kernel conj(const Kernel& A) {
  return Kernel(A.grid, A.values.conjugate(), A.tag);
}

Kernel transpose(const Kernel& A) {
  // transpose of a hermitian kernel is its conjugate, still hermitian
  return Kernel(A.grid, A.values.transpose(), A.tag);
}

Kernel adjoint(const Kernel& A) {
  return Kernel(A.grid, A.values.adjoint(),
                A.tag == Symmetry::Hermitian ? Symmetry::Hermitian : Symmetry::None);
}

double l2_norm(const Kernel& A) { return A.grid.weight() * A.values.norm(); }

double symmetry_residual(const Kernel& A) {
  return (A.values - A.values.transpose()).norm() / std::max(A.values.norm(), 1.0);
}

double hermiticity_residual(const Kernel& A) {
  return (A.values - A.values.adjoint()).norm() / std::max(A.values.norm(), 1.0);
}

Field laplacian(const Field& f) {
  Field fh = transform(f, FT::Forward);
  for (long i = 0; i < f.grid.total(); ++i) fh.values[i] *= -f.grid.xi2(i);
  return transform(fh, FT::Inverse);
}

Kernel laplacian_x(const Kernel& K) {
  const Mat& F = K.grid.dft();
  Mat kh = F * K.values;
  for (long i = 0; i < K.grid.total(); ++i) kh.row(i) *= -K.grid.xi2(i);
  return Kernel(K.grid, (F.adjoint() * kh).eval());
}

Kernel laplacian_y(const Kernel& K) {
  const Mat& F = K.grid.dft();
  Mat kh = K.values * F.transpose();
  for (long j = 0; j < K.grid.total(); ++j) kh.col(j) *= -K.grid.xi2(j);
  return Kernel(K.grid, (kh * F.conjugate()).eval());
}

}  // namespace hfb

#include "hfb/rng.hpp"

namespace hfb {

Field random_smooth_field(const Grid& g, CounterRng& rng, double decay) {
  Field fh(g);
  for (long i = 0; i < g.total(); ++i)
    fh.values[i] = rng.cnormal() / std::pow(1.0 + g.xi2(i), decay);
  Field f = transform(fh, FT::Inverse);
  double nrm = l2_norm(f);
  if (nrm > 0) f.values /= nrm;
  return f;
}

Kernel random_smooth_kernel(const Grid& g, CounterRng& rng, Symmetry tag,
                            double decay) {
  const long T = g.total();
  Mat mh(T, T);
  for (long i = 0; i < T; ++i)
    for (long j = 0; j < T; ++j)
      mh(i, j) = rng.cnormal() /
                 (std::pow(1.0 + g.xi2(i), decay) * std::pow(1.0 + g.xi2(j), decay));
  const Mat& F = g.dft();
  Mat m = F.adjoint() * mh * F.conjugate();
  if (tag == Symmetry::Symmetric)
    m = 0.5 * (m + m.transpose()).eval();
  else if (tag == Symmetry::Hermitian)
    m = 0.5 * (m + m.adjoint()).eval();
  Kernel K(g, std::move(m), tag);
  double nrm = l2_norm(K);
  if (nrm > 0) K.values /= nrm;
  return K;
}

}  // namespace hfb
