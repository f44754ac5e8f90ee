#pragma once

#include <vector>

#include "heislab/grid.hpp"
#include "heislab/sublaplacian.hpp"

namespace heis {

/// Approximate identity at the origin with unit integral.
///
/// width == 0 gives a single-node spike of height 1/cell_volume. width > 0 gives the
/// product Gaussian exp(-|(x,y)|^2/(2 w^2) - tau^2/(2 w_tau^2)) with w_tau = w h_tau/h_xy
/// (same number of cells on every axis), renormalised to unit discrete integral.
ScalarField delta_init(const GridSpec& grid, double mollifier_width);

/// 1.5 h_xy.
double default_mollifier_width(const GridSpec& grid);

/// Forward-Euler heat flow u <- u + dt Delta_H u with the given boundary convention.
class LinearPropagator {
 public:
  LinearPropagator(ScalarField u0, double dt, Boundary boundary = Boundary::dirichlet);

  /// Advances to absolute time t >= time(); the last step is shortened to land on t.
  void advance_to(double t);

  const ScalarField& state() const { return u_; }
  double time() const { return t_; }
  std::size_t steps_taken() const { return steps_; }

 private:
  ScalarField u_;
  ScalarField scratch_;
  double dt_;
  double t_ = 0.0;
  double initial_sup_;
  std::size_t steps_ = 0;
  Boundary boundary_;
};

/// u(t_final) from u0 by forward Euler with step at most dt. Throws NumericalError when the
/// sup-norm grows by more than 10x (the linear flow never amplifies).
ScalarField propagate_linear(const ScalarField& u0, double t_final, double dt,
                             Boundary boundary = Boundary::dirichlet);

/// Numerical heat kernel h_t with its diagnostics.
struct KernelSnapshot {
  double t = 0.0;
  ScalarField field;
  double mass = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double center_value = 0.0;
  bool usable = false;  ///< mass within [0.9, 1.1]
  bool fit_ok = false;
  double fitted_c = 0.0;
  double fitted_C = 0.0;
  double log_upper_intercept = 0.0;
  double log_lower_intercept = 0.0;
};

struct KernelOptions {
  double dt = 0.0;               ///< 0 selects stability_timestep(grid, safety)
  double safety = 0.4;
  double mollifier_width = -1;   ///< negative selects default_mollifier_width
};

/// Heat kernels at increasing times from one propagation of delta_init.
std::vector<KernelSnapshot> heat_kernels(const std::vector<double>& times, const GridSpec& grid,
                                         const KernelOptions& options);

KernelSnapshot heat_kernel(double t, const GridSpec& grid, const KernelOptions& options);

struct ScalingCheck {
  double max_rel_error = 0.0;
  std::size_t admissible = 0;
};

/// Max over admissible nodes of |h_t(xi) - (s/t)^{Q/2} h_s(delta_{sqrt(s/t)} xi)| relative to the
/// second term, where s = k_ref.t (s = 1 gives the normalised identity). A node is admissible when
/// both values exceed threshold_rel times their peaks and the dilated point lies in the box.
ScalingCheck check_scaling_identity(const KernelSnapshot& k_t, const KernelSnapshot& k_ref,
                                    double threshold_rel = 1e-4);

struct SandwichFit {
  double c = 0.0;  ///< decay rate of the upper envelope
  double C = 0.0;  ///< decay rate of the lower envelope
  double log_upper_intercept = 0.0;
  double log_lower_intercept = 0.0;
  std::size_t points = 0;
};

/// One-sided envelope fits of log(t^{Q/2} h_t) against -|eta|_H^2/t over nodes with
/// h_t > threshold_rel * peak, restricted to the largest gauge ball free of sub-threshold
/// and boundary nodes. Each envelope is the least-deviation line on its side of the
/// cloud, i.e. the convex-hull edge above (below) the mean abscissa.
SandwichFit fit_gaussian_sandwich(const KernelSnapshot& k, double threshold_rel = 1e-5);

struct SemigroupCheck {
  double max_rel_error = 0.0;
  std::size_t region_nodes = 0;
};

/// group_convolve(k_s, k_t) against k_{s+t} on the smallest super-level set of k_{s+t}
/// carrying half its mass.
SemigroupCheck check_semigroup(const ScalarField& k_s, const ScalarField& k_t, const ScalarField& k_st,
                               double truncation_rel = 1e-4);

}  // namespace heis
