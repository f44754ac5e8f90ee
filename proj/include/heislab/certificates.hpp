#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "heislab/grid.hpp"
#include "heislab/solver.hpp"

namespace heis {

/// Smooth decreasing step: 1 on (-inf, -1], 0 on [1, inf), given by the normalised tail
/// integral of the mollifier exp(-c / (1 - s^2)). Values come from a tabulated cumulative
/// integral with cubic Hermite interpolation against the exact derivative.
class SmoothStep {
 public:
  explicit SmoothStep(double c = 1.0);
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;

 private:
  double c_;
  double norm_;
  std::vector<double> table_;
};

/// The cut-offs of the test-function argument, all built from one SmoothStep:
/// alpha (radial, plateau r <= 1/2, support r < 1), beta (even, plateau |r| <= 1/4,
/// support |r| < 1), phi (plateau [0, 1/2], support [0, 1)) and phi_star (phi masked to 0
/// on [0, 1/2)).
class BumpPair {
 public:
  BumpPair(double p, double smoothness_scale = 1.0);

  double p() const { return p_; }
  double p_conjugate() const { return p_ / (p_ - 1.0); }

  double alpha(double r) const;
  double alpha_d1(double r) const;
  double alpha_d2(double r) const;
  double beta(double r) const;
  double beta_d1(double r) const;
  double beta_d2(double r) const;
  double phi(double s) const;
  double phi_d1(double s) const;
  double phi_d2(double s) const;
  double phi_star(double s) const;

  /// beta(t/R^2) alpha(|x|/R) alpha(|y|/R) beta(tau/R^2); coords = (x_1..x_n, y_1..y_n).
  double phi_R(double R, double t, const double* coords, int n, double tau) const;
  /// (psi_R, psi*_R) = (phi(s_R)^{2p'}, phi*(s_R)^{2p'}),
  /// s_R = (t^2 + |x|^4 + |y|^4 + tau^2) / R^2.
  std::pair<double, double> psi_R(double R, double t, const double* coords, int n, double tau) const;
  static double s_R(double R, double t, const double* coords, int n, double tau);

 private:
  double p_;
  SmoothStep step_;
};

std::unique_ptr<BumpPair> make_bumps(double p, double smoothness_scale = 1.0);

struct QuotientConstants {
  double alpha_d1 = 0.0;  ///< max |alpha'| / alpha^{1/p}
  double alpha_d2 = 0.0;
  double beta_d1 = 0.0;
  double beta_d2 = 0.0;
  bool shape_ok = false;  ///< ranges, plateaus and supports hold on the sample
};

/// Checks values in [0, 1], plateaus and supports on `samples` points per function and fits
/// the derivative-quotient constants over points where the function exceeds 1e-12.
QuotientConstants check_bump_shapes(const BumpPair& bumps, int samples = 1000);

struct DerivativeFit {
  std::vector<double> R_values;
  std::vector<double> phi_t;    ///< C_fit for |d_t phi_R| <= C R^{-2} phi_R^{1/p}
  std::vector<double> phi_lap;  ///< C_fit for |Delta_H phi_R| <= C R^{-2} phi_R^{1/p}
  std::vector<double> psi_t;    ///< C_fit for |d_t psi_R| <= C R^{-1} (psi*_R)^{1/p}
  std::vector<double> psi_lap;  ///< C_fit for |Delta_H psi_R| <= C R^{-1} (psi*_R)^{1/p}
  double spread = 0.0;          ///< largest max/min ratio over the four families
  bool pass = false;            ///< spread < 2
};

/// Evaluates the test functions on grids scaled with R (L_xy = R, L_tau = R^2 for phi_R;
/// sqrt(R), R for psi_R) at `time_samples` times spanning the time support. Delta_H is the
/// discrete operator; d_t is a central difference of the exact function.
DerivativeFit derivative_bound_check(const BumpPair& bumps, const std::vector<double>& R_values, int n = 1,
                                     int N = 65, int time_samples = 17, double target_floor = 1e-12);

/// The same for one explicit grid; throws InvalidArgument when the grid misses the support.
double fit_phi_laplacian(const BumpPair& bumps, double R, const GridSpec& grid, int time_samples,
                         double target_floor = 1e-12);

struct PhiFunctionals {
  double I = 0.0;  ///< int_0^{R^2} int |u|^p phi_R
  double J = 0.0;  ///< int u_0 phi_R(0, .)
};

/// Space-time quadrature (trapezoid over snapshot times) on a trajectory whose snapshots
/// start at t = 0. J uses u(0)/epsilon. Throws InvalidArgument naming the largest admissible
/// R = sqrt(last snapshot time) when R^2 exceeds the covered horizon.
PhiFunctionals functionals_phi(const std::vector<Snapshot>& snapshots, double epsilon, double R,
                               const BumpPair& bumps);

struct PsiFunctionals {
  std::vector<double> R_values;
  std::vector<double> X;
  std::vector<double> Y;
  std::vector<double> W;  ///< int_0^R Y(r) dr / r
  std::vector<double> xw_margin;  ///< (X - (2/log 2) W) / X
};

/// X, Y at each R and W by log-spaced quadrature in r from the smallest radius whose time
/// support holds 8 snapshots (the neglected inner piece is O(r^{n+2})).
PsiFunctionals functionals_psi(const std::vector<Snapshot>& snapshots, const std::vector<double>& R_values,
                               const BumpPair& bumps, int points_per_octave = 8);

struct GCutoffRow {
  double A = 0.0;
  double R = 0.0;
  double lhs = 0.0;            ///< int_0^R g(A/r^2) dr/r
  double rhs_literal = 0.0;    ///< (log 2 / 2) g(A/R^2)
  double rhs_applied = 0.0;    ///< (log 2 / 2) g_applied(A/R^2)
  bool literal_holds = false;
  bool applied_holds = false;
};

/// Rejects g unless it vanishes on [0, 1/2) and [1, inf) and does not increase on (1/2, 1).
std::vector<GCutoffRow> g_cutoff_check(const std::function<double(double)>& g,
                                     const std::function<double(double)>& g_applied,
                                     const std::vector<double>& A_values, const std::vector<double>& R_values);

/// Q - (Q + 2)/p.
double subcritical_exponent(double p, int n);

struct SubcriticalCheck {
  double exponent = 0.0;
  std::vector<double> R_values;
  std::vector<double> I;
  std::vector<double> J;
  std::vector<double> C_fit;  ///< (I + eps J) / (R^{exponent} I^{1/p})
  double spread = 0.0;
  bool pass = false;          ///< spread < 4
};

/// Throws Error(check_failed) when some J_R <= 0 (positivity hypothesis on the datum violated).
SubcriticalCheck subcritical_inequality_check(const std::vector<Snapshot>& snapshots, double epsilon,
                                              const BumpPair& bumps, const std::vector<double>& R_values);

/// Geometric snapshot cadence t_min * g^k up to t_end (with t = 0 first).
std::vector<double> geometric_snapshot_times(double t_min, double t_end, int per_octave);

}  // namespace heis
