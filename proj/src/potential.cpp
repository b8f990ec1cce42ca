#include "hfb/potential.hpp"

#include <cmath>
#include <iostream>

namespace hfb {

void PotentialSpec::validate() const {
  if (profile != "gaussian")
    throw std::invalid_argument("potential: unknown profile '" + profile + "'");
  if (!(amplitude >= 0)) throw std::invalid_argument("potential: amplitude < 0");
  if (!(sigma > 0)) throw std::invalid_argument("potential: sigma <= 0");
  if (beta < 0 || beta > 1) throw std::invalid_argument("potential: beta outside [0,1]");
  if (N < 1) throw std::invalid_argument("potential: N must be >= 1");
}

double PotentialSpec::eval(double r2) const {
  return amplitude * std::exp(-r2 / (sigma * sigma));
}

Field build_vN(const PotentialSpec& spec, const Grid& g, double* wrap_overlap) {
  spec.validate();
  const int d = g.d();
  const double L = g.L();
  const double nb = std::pow(static_cast<double>(spec.N), spec.beta);
  const double amp = std::pow(static_cast<double>(spec.N), d * spec.beta);

  // number of periodic images needed so the Gaussian tail is negligible
  const double eff_width = 6.0 * spec.sigma / nb;
  const int mr = std::max(1, static_cast<int>(std::ceil(eff_width / L)) + 1);

  Field out(g);
  double central_mass = 0, image_mass = 0;
  std::vector<double> w(d);
  for (long f = 0; f < g.total(); ++f) {
    for (int a = 0; a < d; ++a) w[a] = g.coord_centered(f, a);
    double val = 0, central = 0;
    // sum over images per axis (separable profile makes a full product loop
    // unnecessary only for d=1; do the general nested loop over a box)
    const int span = 2 * mr + 1;
    long boxes = 1;
    for (int a = 0; a < d; ++a) boxes *= span;
    for (long b = 0; b < boxes; ++b) {
      long rem = b;
      double r2 = 0;
      bool is_central = true;
      for (int a = 0; a < d; ++a) {
        int m = static_cast<int>(rem % span) - mr;
        rem /= span;
        if (m != 0) is_central = false;
        double xa = nb * (w[a] + m * L);
        r2 += xa * xa;
      }
      double contrib = spec.eval(r2);
      val += contrib;
      if (is_central) central = contrib;
    }
    out.values[f] = amp * val;
    central_mass += central;
    image_mass += val - central;
  }

  double overlap = central_mass > 0 ? image_mass / central_mass : 0.0;
  if (wrap_overlap) *wrap_overlap = overlap;
  if (overlap > 1e-10)
    std::cerr << "[potential] warning: periodized v_N overlaps itself, relative mass "
              << overlap << "\n";
  return out;
}

Field convolve(const Field& vN, const Field& f) {
  if (!vN.grid.same(f.grid)) throw std::invalid_argument("convolve: grid mismatch");
  const Grid& g = f.grid;
  Field vh = transform(vN, FT::Forward);
  Field fh = transform(f, FT::Forward);
  const double scale = g.weight() * std::sqrt(static_cast<double>(g.total()));
  Field prod(g);
  prod.values = scale * vh.values.cwiseProduct(fh.values);
  return transform(prod, FT::Inverse);
}

Kernel diag_multiply(const Field& vN, const Kernel& K) {
  if (!vN.grid.same(K.grid)) throw std::invalid_argument("diag_multiply: grid mismatch");
  const Grid& g = K.grid;
  Kernel out(g, K.tag);
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j)
      out.values(i, j) = vN.values[g.wrap_diff(i, j)] * K.values(i, j);
  return out;
}

}  // namespace hfb
