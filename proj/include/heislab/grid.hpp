#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "heislab/group.hpp"

namespace heis {

/// Anisotropic box [-L_xy, L_xy]^{2n} x [-L_tau, L_tau] sampled on a uniform lattice.
///
/// Storage order is row-major over (x_1..x_n, y_1..y_n, tau) with tau fastest, so
/// every horizontal node owns one contiguous tau line.
struct GridSpec {
  static constexpr int max_n = 8;

  int n = 1;
  double L_xy = 4.0;
  double L_tau = 16.0;
  int N_xy = 65;
  int N_tau = 65;

  /// Throws InvalidArgument on bad sizes.
  void validate() const;
  /// Emits a warning when L_tau < L_xy^2 (box not matched to the dilations).
  void warn_if_anisotropic() const;

  double h_xy() const { return 2.0 * L_xy / (N_xy - 1); }
  double h_tau() const { return 2.0 * L_tau / (N_tau - 1); }
  double cell_volume() const;
  int horizontal_axes() const { return 2 * n; }
  std::size_t horizontal_nodes() const;
  std::size_t size() const { return horizontal_nodes() * static_cast<std::size_t>(N_tau); }

  int center_xy() const { return (N_xy - 1) / 2; }
  int center_tau() const { return (N_tau - 1) / 2; }
  double coord_xy(int i) const { return -L_xy + i * h_xy(); }
  double coord_tau(int k) const { return -L_tau + k * h_tau(); }

  /// Index of the node at the origin.
  std::size_t origin_index() const;
  /// Decodes a horizontal node into per-axis lattice indices (x_1..x_n, y_1..y_n).
  void horizontal_indices(std::size_t hidx, int* idx) const;
  /// Decodes a horizontal node into coordinates (x_1..x_n, y_1..y_n).
  void horizontal_coords(std::size_t hidx, double* coords) const;
  /// Stride (in storage elements) of horizontal axis a.
  std::size_t axis_stride(int a) const;
  GroupPoint node(std::size_t index) const;

  bool operator==(const GridSpec&) const = default;
};

/// Real-valued field sampled on a GridSpec.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  bool diverged = false;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Throws NumericalError if the field is flagged diverged or holds non-finite values.
  void require_finite(const char* where) const;
};

using PointFunction = std::function<double(const GroupPoint&)>;

/// Samples f at every node; a non-finite value is reported with the offending node.
ScalarField sample(const PointFunction& f, const GridSpec& grid);

/// Samples f(coords, tau) with coords = (x_1..x_n, y_1..y_n); the allocation-free path.
template <class F>
ScalarField sample_coords(const GridSpec& grid, F&& f);

/// Midpoint quadrature with uniform cell volume.
double integrate(const ScalarField& u);

/// sup over nodes of (1 + t + |eta|_H^2)^{kappa/2} |u(eta)|.
double weighted_sup_norm(const ScalarField& u, double t, double kappa);

double sup_norm(const ScalarField& u);
double min_value(const ScalarField& u);
double max_value(const ScalarField& u);

/// Largest |u| on the outermost layer of nodes.
double boundary_shell_max(const ScalarField& u);

/// Multilinear interpolation at an arbitrary point; zero outside the box.
double interpolate(const ScalarField& u, const GroupPoint& p);

/// Quadrature of (v * h)(eta) = int v(eta o zeta^{-1}) h(zeta) dzeta.
///
/// Kernel nodes with |h| < truncation_rel * max|h| are skipped. Horizontal offsets of
/// eta o zeta^{-1} fall on lattice nodes, so only the tau coordinate is interpolated.
ScalarField group_convolve(const ScalarField& v, const ScalarField& h, double truncation_rel = 0.0);

/// a*u + b*v on a common grid.
ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& v);

/// Binary snapshot: n, N_xy, N_tau as little-endian int64, L_xy, L_tau as float64,
/// followed by the values as float64 in storage order.
void write_hfield(const ScalarField& u, const std::string& path);
ScalarField read_hfield(const std::string& path);

/// Weight (1 + t + |eta|_H^2)^{-kappa/2}.
double decay_weight(double t, double gauge_sq, double kappa);
/// |eta|_H^2 from horizontal coordinates and tau.
double gauge_squared(const double* coords, int axes, double tau);

template <class F>
ScalarField sample_coords(const GridSpec& grid, F&& f) {
  grid.validate();
  ScalarField u(grid);
  const std::size_t H = grid.horizontal_nodes();
  const int Nt = grid.N_tau;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(H); ++hi) {
    double coords[2 * GridSpec::max_n];
    grid.horizontal_coords(static_cast<std::size_t>(hi), coords);
    double* line = u.values.data() + static_cast<std::size_t>(hi) * Nt;
    for (int k = 0; k < Nt; ++k) line[k] = f(static_cast<const double*>(coords), grid.coord_tau(k));
  }
  return u;
}

}  // namespace heis
