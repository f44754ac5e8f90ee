#pragma once

#include <cstdint>
#include <vector>

#include "heislab/grid.hpp"
#include "heislab/sublaplacian.hpp"

namespace heis {

struct WeightedNormParams {
  double kappa = 2.0;
  double T = 1.0;
  double theta = 0.0;  ///< Q(p-1)/2; in (0, 1) exactly for subcritical p

  static WeightedNormParams make(double kappa, double T, double p, int n);
};

/// Time slices u(t_0), ..., u(t_m) on one grid.
struct SpaceTimeField {
  std::vector<double> times;
  std::vector<ScalarField> slices;

  /// Throws InvalidArgument unless times increase, counts match and grids agree.
  void validate() const;
  const GridSpec& grid() const { return slices.front().grid; }
  std::size_t size() const { return slices.size(); }
};

/// Uniform time grid 0, T/m, ..., T.
std::vector<double> uniform_times(double T, int m);

/// sup over slices with t <= T of weighted_sup_norm(u(t), t, kappa).
double norm_X(const SpaceTimeField& u, const WeightedNormParams& params);

/// Elementwise a*u + b*v.
SpaceTimeField combine(double a, const SpaceTimeField& u, double b, const SpaceTimeField& v);

/// Phi[u](t_j) = epsilon e^{t_j Delta_H} u0 + trapezoid_s int_0^{t_j} e^{(t_j - s) Delta_H} |u(s)|^p ds
/// on u's uniform time grid; every semigroup factor is a run of Euler steps of size dt.
///
/// The sum is accumulated as C_0 = epsilon u0, C_1 = P(epsilon u0 + D/2 f_0),
/// C_{j+1} = P(C_j + D f_j), Phi_j = C_j + D/2 f_j, where P is one slice spacing D of linear
/// steps and f_j = |u(t_j)|^p. Because P is linear this equals the slice-by-slice double sum
/// term for term, at the cost of a single propagation.
SpaceTimeField phi_operator(const SpaceTimeField& u, const ScalarField& u0, double epsilon, double p, double dt,
                            Boundary boundary = Boundary::dirichlet);

/// Largest linear step dividing the slice spacing and not exceeding the stability step.
double inner_timestep(const GridSpec& grid, double spacing, double safety = 0.4);

struct DecayReport {
  std::vector<double> times;
  std::vector<double> max_ratios;
  double max_ratio = 0.0;
  double spread = 0.0;  ///< max over min of max_ratios
  bool contaminated = false;
  bool pass = false;    ///< finite ratios with spread < 2
};

/// Central sample: |x_j|, |y_j| <= L_xy/2 and |tau| <= L_tau/4.
bool in_central_sample(const GridSpec& grid, std::size_t index);

/// e^{t Delta_H}(1 + |.|_H^2)^{-kappa/2} against (1 + t + |eta|_H^2)^{-min(kappa, Q)/2}.
DecayReport check_linear_decay(double kappa, const GridSpec& grid, const std::vector<double>& times);

struct DuhamelReport {
  std::vector<double> times;
  std::vector<double> max_ratios;            ///< against t (1 + t + |eta|^2)^{-alpha}
  std::vector<double> max_ratios_log;        ///< against t log(e + t) (1 + t + |eta|^2)^{-alpha}
  double spread = 0.0;                       ///< of the majorant that applies to alpha
  bool contaminated = false;
  bool endpoint = false;                     ///< alpha == 1 + Q/2
  bool uncorrected_grows = false;            ///< max_ratios strictly increasing
  bool pass = false;
};

/// int_0^t e^{(t-s) Delta_H} (1 + s + |.|_H^2)^{-alpha} ds by the trapezoid rule in s with
/// `intervals_per_unit` slices per unit time, compared with the majorant (log-corrected at
/// the endpoint exponent). `times` must be multiples of the slice spacing.
DuhamelReport check_duhamel_bound(double alpha, const GridSpec& grid, const std::vector<double>& times,
                                  int intervals_per_unit = 16);

/// norm_X(Phi[u] - Phi[v]) / norm_X(u - v).
double contraction_probe(const SpaceTimeField& u, const SpaceTimeField& v, const ScalarField& u0, double epsilon,
                         double p, double kappa, double dt, Boundary boundary = Boundary::dirichlet);

/// Random element of the ball {norm_X <= radius}: the weight profile
/// (1 + t + |eta|^2)^{-kappa/2} times a random amplitude in (0.2, 1] and a nodewise factor in
/// [0.5, 1], scaled to norm_X <= radius.
SpaceTimeField random_ball_element(const GridSpec& grid, const std::vector<double>& times, double kappa,
                                   double radius, std::uint64_t seed);

struct PicardResult {
  SpaceTimeField solution;
  std::vector<double> residuals;           ///< norm_X(u_{k+1} - u_k)
  std::vector<double> ball_norms;          ///< norm_X(u_{k+1})
  std::vector<double> lipschitz_estimates; ///< residual_k / residual_{k-1}; NaN for the first
  bool converged = false;
  bool contractive = true;                 ///< false when aborted after 3 consecutive growths
};

/// u_{k+1} = Phi[u_k] from u_0 = epsilon e^{t Delta_H} u0 on `times`, stopping after
/// `iterations` maps or when the residual drops below tol * norm_X(u_k).
PicardResult picard_solve(const ScalarField& u0, double epsilon, double p, double kappa,
                          const std::vector<double>& times, int iterations, double dt, double tol = 1e-12,
                          Boundary boundary = Boundary::dirichlet);

}  // namespace heis
