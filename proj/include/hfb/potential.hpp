#pragma once

// Scaled interaction v_N(x) = N^{d beta} v(N^beta x) and its two actions:
// convolution against a field and multiplication along the difference
// diagonal of a kernel.

#include <string>

#include "hfb/grid.hpp"

namespace hfb {

struct PotentialSpec {
  std::string profile = "gaussian";  // amplitude * exp(-|x|^2 / sigma^2)
  double amplitude = 1.0;
  double sigma = 1.0;
  double beta = 0.5;   // scaling exponent in [0,1]
  long N = 1;          // particle number

  void validate() const;
  double eval(double r2) const;  // profile value at |x|^2 = r2 (unscaled)
};

// Periodized sample of v_N on the difference-variable torus. Emits a warning
// on stderr (and sets *wrap_overlap if given) when the wrapped potential
// overlaps itself above 1e-10 relative.
Field build_vN(const PotentialSpec& spec, const Grid& g,
               double* wrap_overlap = nullptr);

// periodic convolution (v * f)(x) = int v(x-y) f(y) dy, computed spectrally
Field convolve(const Field& vN, const Field& f);

// (x,y) -> vN(x-y) K(x,y); preserves the symmetry tag of K (vN real, even)
Kernel diag_multiply(const Field& vN, const Kernel& K);

}  // namespace hfb
