#include "heislab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "heislab/error.hpp"

namespace heis {

namespace {

WarningSink g_warning_sink = nullptr;

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid == b.grid)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

std::string describe_node(const GridSpec& g, std::size_t index) {
  const GroupPoint p = g.node(index);
  std::ostringstream os;
  os << "node " << index << " (x=";
  for (double v : p.x) os << v << ' ';
  os << "y=";
  for (double v : p.y) os << v << ' ';
  os << "tau=" << p.tau << ')';
  return os.str();
}

}  // namespace

void set_warning_sink(WarningSink sink) { g_warning_sink = sink; }

void warn(const std::string& message) {
  if (g_warning_sink) {
    g_warning_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

void GridSpec::validate() const {
  if (n < 1 || n > max_n) throw InvalidArgument("grid: n must lie in [1, 8]");
  if (!(L_xy > 0.0) || !(L_tau > 0.0) || !std::isfinite(L_xy) || !std::isfinite(L_tau)) {
    throw InvalidArgument("grid: half-widths L_xy and L_tau must be positive");
  }
  if (N_xy < 5 || N_tau < 5) throw InvalidArgument("grid: need at least 5 nodes per axis");
  if (N_xy % 2 == 0 || N_tau % 2 == 0) {
    throw InvalidArgument("grid: node counts must be odd so the origin is a node");
  }
}

void GridSpec::warn_if_anisotropic() const {
  if (L_tau < L_xy * L_xy) {
    std::ostringstream os;
    os << "grid: L_tau=" << L_tau << " is smaller than L_xy^2=" << L_xy * L_xy
       << "; the box is not matched to the anisotropic dilations";
    warn(os.str());
  }
}

double GridSpec::cell_volume() const { return std::pow(h_xy(), 2 * n) * h_tau(); }

std::size_t GridSpec::horizontal_nodes() const {
  std::size_t h = 1;
  for (int a = 0; a < 2 * n; ++a) h *= static_cast<std::size_t>(N_xy);
  return h;
}

std::size_t GridSpec::origin_index() const {
  std::size_t hidx = 0;
  for (int a = 0; a < 2 * n; ++a) hidx = hidx * N_xy + center_xy();
  return hidx * N_tau + center_tau();
}

void GridSpec::horizontal_indices(std::size_t hidx, int* idx) const {
  for (int a = 2 * n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(hidx % N_xy);
    hidx /= N_xy;
  }
}

void GridSpec::horizontal_coords(std::size_t hidx, double* coords) const {
  const double h = h_xy();
  for (int a = 2 * n - 1; a >= 0; --a) {
    coords[a] = -L_xy + static_cast<double>(hidx % N_xy) * h;
    hidx /= N_xy;
  }
}

std::size_t GridSpec::axis_stride(int a) const {
  std::size_t s = static_cast<std::size_t>(N_tau);
  for (int b = 2 * n - 1; b > a; --b) s *= N_xy;
  return s;
}

GroupPoint GridSpec::node(std::size_t index) const {
  double coords[2 * max_n];
  horizontal_coords(index / N_tau, coords);
  GroupPoint p;
  p.x.assign(coords, coords + n);
  p.y.assign(coords + n, coords + 2 * n);
  p.tau = coord_tau(static_cast<int>(index % N_tau));
  return p;
}

ScalarField::ScalarField(const GridSpec& g, double fill) : grid(g), values(g.size(), fill) {}

void ScalarField::require_finite(const char* where) const {
  if (diverged) throw NumericalError(std::string(where) + ": field is flagged as diverged");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError(std::string(where) + ": non-finite value at " + describe_node(grid, i));
    }
  }
}

double gauge_squared(const double* coords, int axes, double tau) {
  double r2 = 0.0;
  for (int a = 0; a < axes; ++a) r2 += coords[a] * coords[a];
  return std::sqrt(r2 * r2 + tau * tau);
}

double decay_weight(double t, double gauge_sq, double kappa) {
  return std::pow(1.0 + t + gauge_sq, -0.5 * kappa);
}

ScalarField sample(const PointFunction& f, const GridSpec& grid) {
  grid.validate();
  ScalarField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = f(grid.node(i));
    if (!std::isfinite(v)) throw InvalidArgument("sample: non-finite value at " + describe_node(grid, i));
    u[i] = v;
  }
  return u;
}

double integrate(const ScalarField& u) {
  u.require_finite("integrate");
  const GridSpec& g = u.grid;
  const std::size_t H = g.horizontal_nodes();
  const int Nt = g.N_tau;
  std::vector<double> partial(H);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(H); ++hi) {
    const double* line = u.values.data() + static_cast<std::size_t>(hi) * Nt;
    double s = 0.0;
    for (int k = 0; k < Nt; ++k) s += line[k];
    partial[hi] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total * g.cell_volume();
}

double weighted_sup_norm(const ScalarField& u, double t, double kappa) {
  if (t < 0.0) throw InvalidArgument("weighted_sup_norm: t must be nonnegative");
  const GridSpec& g = u.grid;
  const std::size_t H = g.horizontal_nodes();
  const int Nt = g.N_tau;
  const int axes = g.horizontal_axes();
  double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(H); ++hi) {
    double coords[2 * GridSpec::max_n];
    g.horizontal_coords(static_cast<std::size_t>(hi), coords);
    const double* line = u.values.data() + static_cast<std::size_t>(hi) * Nt;
    for (int k = 0; k < Nt; ++k) {
      if (line[k] == 0.0) continue;
      const double w = std::pow(1.0 + t + gauge_squared(coords, axes, g.coord_tau(k)), 0.5 * kappa);
      best = std::max(best, w * std::abs(line[k]));
    }
  }
  return best;
}

double sup_norm(const ScalarField& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const ScalarField& u) { return *std::min_element(u.values.begin(), u.values.end()); }

double max_value(const ScalarField& u) { return *std::max_element(u.values.begin(), u.values.end()); }

double boundary_shell_max(const ScalarField& u) {
  const GridSpec& g = u.grid;
  const std::size_t H = g.horizontal_nodes();
  const int Nt = g.N_tau;
  const int axes = g.horizontal_axes();
  double m = 0.0;
  int idx[2 * GridSpec::max_n];
  for (std::size_t hi = 0; hi < H; ++hi) {
    g.horizontal_indices(hi, idx);
    bool on_face = false;
    for (int a = 0; a < axes; ++a) on_face = on_face || idx[a] == 0 || idx[a] == g.N_xy - 1;
    const double* line = u.values.data() + hi * Nt;
    if (on_face) {
      for (int k = 0; k < Nt; ++k) m = std::max(m, std::abs(line[k]));
    } else {
      m = std::max({m, std::abs(line[0]), std::abs(line[Nt - 1])});
    }
  }
  return m;
}

double interpolate(const ScalarField& u, const GroupPoint& p) {
  const GridSpec& g = u.grid;
  if (p.dim() != g.n) throw InvalidArgument("interpolate: point dimension does not match grid");
  const int axes = g.horizontal_axes() + 1;
  int base[2 * GridSpec::max_n + 1];
  double frac[2 * GridSpec::max_n + 1];
  int extent[2 * GridSpec::max_n + 1];
  for (int a = 0; a < axes; ++a) {
    double c;
    double h;
    double L;
    if (a < g.n) {
      c = p.x[a], h = g.h_xy(), L = g.L_xy, extent[a] = g.N_xy;
    } else if (a < 2 * g.n) {
      c = p.y[a - g.n], h = g.h_xy(), L = g.L_xy, extent[a] = g.N_xy;
    } else {
      c = p.tau, h = g.h_tau(), L = g.L_tau, extent[a] = g.N_tau;
    }
    double s = (c + L) / h;
    constexpr double snap = 1e-9;
    if (s < -snap || s > extent[a] - 1 + snap) return 0.0;
    s = std::clamp(s, 0.0, static_cast<double>(extent[a] - 1));
    base[a] = std::min(static_cast<int>(std::floor(s)), extent[a] - 1);
    frac[a] = s - base[a];
  }
  double acc = 0.0;
  const unsigned corners = 1u << axes;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t index = 0;
    bool inside = true;
    for (int a = 0; a < axes; ++a) {
      const int bit = (c >> (axes - 1 - a)) & 1u;
      const int i = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
      if (i >= extent[a]) {
        inside = false;
        break;
      }
      index = index * extent[a] + i;
    }
    if (inside && w != 0.0) acc += w * u.values[index];
  }
  return acc;
}

ScalarField group_convolve(const ScalarField& v, const ScalarField& h, double truncation_rel) {
  require_same_grid(v, h, "group_convolve");
  if (!(truncation_rel >= 0.0 && truncation_rel < 1.0)) {
    throw InvalidArgument("group_convolve: truncation_rel must lie in [0, 1)");
  }
  v.require_finite("group_convolve");
  h.require_finite("group_convolve");
  const GridSpec& g = v.grid;
  const int n = g.n;
  const int axes = g.horizontal_axes();
  const int Nt = g.N_tau;
  const int cxy = g.center_xy();
  const int ct = g.center_tau();
  const double htau = g.h_tau();
  const double cell = g.cell_volume();
  const std::size_t H = g.horizontal_nodes();

  // Retained kernel nodes grouped by horizontal line.
  struct KernelLine {
    std::size_t hidx;
    std::vector<int> taus;
    std::vector<double> weights;
  };
  double hmax = 0.0;
  for (double x : h.values) hmax = std::max(hmax, std::abs(x));
  const double cut = truncation_rel * hmax;
  std::vector<KernelLine> kernel;
  for (std::size_t hi = 0; hi < H; ++hi) {
    KernelLine line{hi, {}, {}};
    const double* src = h.values.data() + hi * Nt;
    for (int m = 0; m < Nt; ++m) {
      if (src[m] == 0.0 || std::abs(src[m]) < cut) continue;
      line.taus.push_back(m);
      line.weights.push_back(src[m] * cell);
    }
    if (!line.taus.empty()) kernel.push_back(std::move(line));
  }
  std::vector<std::vector<int>> kernel_idx(kernel.size(), std::vector<int>(axes));
  std::vector<std::vector<double>> kernel_xy(kernel.size(), std::vector<double>(axes));
  for (std::size_t q = 0; q < kernel.size(); ++q) {
    g.horizontal_indices(kernel[q].hidx, kernel_idx[q].data());
    g.horizontal_coords(kernel[q].hidx, kernel_xy[q].data());
  }

  ScalarField out(g);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ho = 0; ho < static_cast<std::ptrdiff_t>(H); ++ho) {
    int oidx[2 * GridSpec::max_n];
    double oxy[2 * GridSpec::max_n];
    g.horizontal_indices(static_cast<std::size_t>(ho), oidx);
    g.horizontal_coords(static_cast<std::size_t>(ho), oxy);
    double* dst = out.values.data() + static_cast<std::size_t>(ho) * Nt;
    for (std::size_t q = 0; q < kernel.size(); ++q) {
      const int* kidx = kernel_idx[q].data();
      const double* kxy = kernel_xy[q].data();
      std::size_t target = 0;
      bool inside = true;
      for (int a = 0; a < axes; ++a) {
        const int i = oidx[a] - kidx[a] + cxy;
        if (i < 0 || i >= g.N_xy) {
          inside = false;
          break;
        }
        target = target * g.N_xy + static_cast<std::size_t>(i);
      }
      if (!inside) continue;
      // tau(eta o zeta^{-1}) = tau - tau' - 2 (x.y' - x'.y)
      double twist = 0.0;
      for (int j = 0; j < n; ++j) twist += oxy[j] * kxy[n + j] - kxy[j] * oxy[n + j];
      const double shift = -2.0 * twist / htau;
      const double* src = v.values.data() + target * Nt;
      const KernelLine& kl = kernel[q];
      for (std::size_t e = 0; e < kl.taus.size(); ++e) {
        // source tau index is k + off
        const double off = static_cast<double>(ct - kl.taus[e]) + shift;
        const double fl = std::floor(off);
        const int base = static_cast<int>(fl);
        const double fr = off - fl;
        const double w0 = kl.weights[e] * (1.0 - fr);
        const double w1 = kl.weights[e] * fr;
        const int k_lo = std::max(0, -base - 1);
        const int k_hi = std::min(Nt, Nt - base);
        for (int k = k_lo; k < k_hi; ++k) {
          const int s = k + base;
          const double a0 = (s >= 0) ? src[s] : 0.0;
          const double a1 = (s + 1 < Nt) ? src[s + 1] : 0.0;
          dst[k] += w0 * a0 + w1 * a1;
        }
      }
    }
  }
  return out;
}

ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& v) {
  require_same_grid(u, v, "linear_combination");
  ScalarField r(u.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a * u[i] + b * v[i];
  r.diverged = u.diverged || v.diverged;
  return r;
}

namespace {

template <class T>
void put_le(std::ofstream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

template <class T>
T get_le(std::ifstream& is, const std::string& path) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw IoError("read_hfield: truncated file " + path);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void write_hfield(const ScalarField& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("write_hfield: cannot open " + path);
  put_le<std::int64_t>(os, u.grid.n);
  put_le<std::int64_t>(os, u.grid.N_xy);
  put_le<std::int64_t>(os, u.grid.N_tau);
  put_le<double>(os, u.grid.L_xy);
  put_le<double>(os, u.grid.L_tau);
  for (double v : u.values) put_le<double>(os, v);
  if (!os) throw IoError("write_hfield: write failed for " + path);
}

ScalarField read_hfield(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_hfield: cannot open " + path);
  GridSpec g;
  g.n = static_cast<int>(get_le<std::int64_t>(is, path));
  g.N_xy = static_cast<int>(get_le<std::int64_t>(is, path));
  g.N_tau = static_cast<int>(get_le<std::int64_t>(is, path));
  g.L_xy = get_le<double>(is, path);
  g.L_tau = get_le<double>(is, path);
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw IoError("read_hfield: bad header in " + path + ": " + e.what());
  }
  ScalarField u(g);
  for (double& v : u.values) v = get_le<double>(is, path);
  return u;
}

}  // namespace heis
