#include "hfb/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hfb/bogoliubov.hpp"
#include "hfb/rng.hpp"

namespace hfb {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    bad("bad numeric value for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    bad("bad integer value for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad("bad boolean value for " + key + ": '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_double(key, trim(item)));
  if (out.empty()) bad("empty list for " + key);
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') bad("malformed section header at line " + std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      if (section != "grid" && section != "potential" && section != "initial" &&
          section != "time" && section != "oracle" && section != "diagnostics" &&
          section != "output")
        bad("unknown section [" + section + "]");
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) bad("expected key=value at line " + std::to_string(lineno));
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    std::string sk = section + "." + key;

    if (sk == "grid.d") c.d = static_cast<int>(to_long(sk, val));
    else if (sk == "grid.n") c.n = static_cast<int>(to_long(sk, val));
    else if (sk == "grid.L") c.L = to_double(sk, val);
    else if (sk == "potential.profile") c.potential.profile = val;
    else if (sk == "potential.amplitude") c.potential.amplitude = to_double(sk, val);
    else if (sk == "potential.sigma") c.potential.sigma = to_double(sk, val);
    else if (sk == "potential.beta") c.potential.beta = to_double(sk, val);
    else if (sk == "potential.N") c.potential.N = to_long(sk, val);
    else if (sk == "initial.phi_profile") c.phi_profile = val;
    else if (sk == "initial.phi_width") c.phi_width = to_double(sk, val);
    else if (sk == "initial.phi_shift") c.phi_shift = to_double(sk, val);
    else if (sk == "initial.phi_wavenumber") c.phi_wavenumber = static_cast<int>(to_long(sk, val));
    else if (sk == "initial.k_mode") c.k_mode = val;
    else if (sk == "initial.k_amplitude") c.k_amplitude = to_double(sk, val);
    else if (sk == "initial.k_width") c.k_width = to_double(sk, val);
    else if (sk == "time.T") c.T = to_double(sk, val);
    else if (sk == "time.dt") c.dt = to_double(sk, val);
    else if (sk == "time.scheme") c.scheme = val;
    else if (sk == "time.output_cadence") c.output_cadence = static_cast<int>(to_long(sk, val));
    else if (sk == "oracle.enabled") c.oracle_enabled = to_bool(sk, val);
    else if (sk == "oracle.modes") c.oracle_modes = static_cast<int>(to_long(sk, val));
    else if (sk == "oracle.n_max_policy") c.n_max_policy = val;
    else if (sk == "oracle.krylov_tol") c.krylov_tol = to_double(sk, val);
    else if (sk == "diagnostics.enabled") c.diagnostics_enabled = to_bool(sk, val);
    else if (sk == "diagnostics.epsilon") c.epsilon = to_double(sk, val);
    else if (sk == "diagnostics.s_list") c.s_list = to_list(sk, val);
    else if (sk == "output.directory") c.directory = val;
    else if (sk == "output.seed") c.seed = static_cast<unsigned long>(to_long(sk, val));
    else bad("unknown key '" + key + "' in section [" + section + "]");
  }
  c.validate();
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void RunConfig::validate() const {
  if (d < 1 || d > 3) bad("grid.d must be 1..3");
  if (n < 8 || (n & (n - 1)) != 0) bad("grid.n must be a power of two >= 8");
  if (!(L > 0)) bad("grid.L must be positive");
  potential.validate();
  if (phi_profile != "gaussian" && phi_profile != "plane_wave" && phi_profile != "random")
    bad("unknown initial.phi_profile '" + phi_profile + "'");
  if (k_mode != "zero" && k_mode != "gaussian_pair" && k_mode != "pair_corrected")
    bad("unknown initial.k_mode '" + k_mode + "'");
  if (!(phi_width > 0) || !(k_width > 0)) bad("widths must be positive");
  if (T < 0) bad("time.T must be >= 0");
  if (!(dt > 0)) bad("time.dt must be positive");
  if (scheme != "strang" && scheme != "rk4-mol") bad("unknown time.scheme '" + scheme + "'");
  if (output_cadence < 1) bad("time.output_cadence must be >= 1");
  if (oracle_modes < 1) bad("oracle.modes must be >= 1");
  if (n_max_policy != "auto" && n_max_policy.rfind("fixed:", 0) != 0)
    bad("oracle.n_max_policy must be auto or fixed:<int>");
  if (!(krylov_tol > 0)) bad("oracle.krylov_tol must be positive");
  if (epsilon < 0 || epsilon > 1) bad("diagnostics.epsilon must be in [0,1]");
  for (double s : s_list)
    if (s < -2 || s > 2) bad("diagnostics.s_list entries must be in [-2,2]");
}

Grid RunConfig::make_grid() const { return Grid(d, n, L); }

Field RunConfig::make_phi0(const Grid& g) const {
  Field phi(g);
  if (phi_profile == "gaussian") {
    for (long i = 0; i < g.total(); ++i) {
      double r2 = 0;
      for (int a = 0; a < g.d(); ++a) {
        double x = g.coord_centered(i, a) - phi_shift;
        if (x < -g.L() / 2) x += g.L();
        if (x >= g.L() / 2) x -= g.L();
        r2 += x * x;
      }
      phi.values[i] = std::exp(-r2 / (phi_width * phi_width));
    }
  } else if (phi_profile == "plane_wave") {
    const double k0 = 2.0 * 3.14159265358979324 / g.L() * phi_wavenumber;
    for (long i = 0; i < g.total(); ++i) {
      double ph = 0;
      for (int a = 0; a < g.d(); ++a) ph += k0 * g.coord(i, a);
      phi.values[i] = cdouble(std::cos(ph), std::sin(ph));
    }
  } else {  // random
    CounterRng rng(seed, 0x9f1);
    phi = random_smooth_field(g, rng, 2.0);
  }
  phi.values /= l2_norm(phi);  // ||phi||_{L2} = 1
  return phi;
}

Kernel RunConfig::make_k0(const Grid& g, const Field& phi0) const {
  Kernel k(g, Symmetry::Symmetric);
  if (k_mode == "zero") return k;
  if (k_mode == "gaussian_pair") {
    for (long i = 0; i < g.total(); ++i)
      for (long j = 0; j < g.total(); ++j) {
        double r2 = 0;
        long dd = g.wrap_diff(i, j);
        for (int a = 0; a < g.d(); ++a) {
          double x = g.coord_centered(dd, a);
          r2 += x * x;
        }
        k.values(i, j) = k_amplitude * std::exp(-r2 / (k_width * k_width));
      }
    if (symmetry_residual(k) > 1e-12)
      throw std::runtime_error("make_k0: lost symmetry");
    k.values = 0.5 * (k.values + k.values.transpose()).eval();
    return k;
  }
  // pair_corrected: Lambda(0) = phi x phi * (1 - N^{beta-1} w_c(N^beta (x-y)))
  // with a smooth bump correction profile w_c; convert the correction to a
  // pair kernel, psi = 2N (Lambda - phi x phi), and take k = (1/2) asinh(psi).
  const double Np = static_cast<double>(potential.N);
  const double scale = std::pow(Np, potential.beta);
  Kernel psi(g, Symmetry::Symmetric);
  for (long i = 0; i < g.total(); ++i)
    for (long j = 0; j < g.total(); ++j) {
      double r2 = 0;
      long dd = g.wrap_diff(i, j);
      for (int a = 0; a < g.d(); ++a) {
        double x = scale * g.coord_centered(dd, a);
        r2 += x * x;
      }
      double wc = k_amplitude * std::exp(-r2 / (k_width * k_width));
      psi.values(i, j) = -2.0 * scale * wc * phi0.values[i] * phi0.values[j];
    }
  psi.values = 0.5 * (psi.values + psi.values.transpose()).eval();
  return k_from_pair(psi).k;
}

IntegratorConfig RunConfig::make_integrator() const {
  IntegratorConfig ic;
  ic.dt = dt;
  ic.T = T;
  ic.scheme = scheme == "strang" ? Scheme::Strang : Scheme::Rk4Mol;
  ic.output_cadence = output_cadence;
  return ic;
}

}  // namespace hfb
