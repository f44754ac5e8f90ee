#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heislab/grid.hpp"
#include "heislab/sublaplacian.hpp"

namespace heis {

enum class InitialKind { compact_bump, weighted_decay, constant };

/// Named initial-datum family and its parameters.
struct InitialDatum {
  InitialKind kind = InitialKind::compact_bump;
  double radius = 1.0;  ///< compact_bump: support inside {|x|^2 + |y|^2 + |tau| < radius}
  double kappa = 2.0;   ///< weighted_decay: (1 + |eta|_H^2)^{-kappa/2}
  /// compact_bump: 1 samples at nodes. k > 1 stores cell averages (at least k midpoints per
  /// axis, more when the support is narrower than a cell), which keeps the discrete integral
  /// close to the exact one on coarse grids.
  int subsamples = 1;
};

const char* to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& name);

/// Samples the datum. compact_bump is exp(1 - 1/(1 - q)) with q = 2(r^4 + tau^2)/radius^2,
/// which equals 1 at the origin and vanishes outside {r^2 + |tau| < radius}.
ScalarField initial_datum(const InitialDatum& datum, const GridSpec& grid);

enum class Termination { blowup, horizon, instability };
const char* to_string(Termination t);

struct SolverConfig {
  double p = 2.0;
  double epsilon = 1.0;
  GridSpec grid;
  double dt_safety = 0.4;
  double c_nl = 0.1;              ///< dt <= c_nl * ||u||_inf^{1-p}
  double blowup_threshold = 1e8;  ///< sup-norm level M declaring divergence
  double t_max = 10.0;
  Boundary boundary = Boundary::dirichlet;
  InitialDatum u0;
  std::optional<double> weighted_kappa;  ///< record ||u(t)||_{kappa} when set
  std::vector<double> snapshot_times;    ///< fields stored at exactly these times (0 allowed)

  /// Throws InvalidArgument naming the offending parameter.
  void validate() const;
};

struct Snapshot {
  double t = 0.0;
  ScalarField field;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<double> min_values;
  std::vector<double> masses;
  std::vector<double> boundary_max;
  std::vector<double> weighted_norms;  ///< empty unless SolverConfig::weighted_kappa is set
  Termination termination = Termination::horizon;
  std::optional<double> lifespan_estimate;  ///< extrapolated blow-up time T_h
  std::optional<double> threshold_time;     ///< first time with sup-norm >= M
  double last_stable_time = 0.0;
  bool boundary_contaminated = false;
  std::size_t steps = 0;
  std::vector<Snapshot> snapshots;
  ScalarField final_state;
};

/// One explicit step u + dt (Delta_H u + |u|^p). Non-finite output marks the result diverged.
ScalarField step(const ScalarField& u, double dt, double p, Boundary boundary = Boundary::dirichlet);

/// Integrates from epsilon * u0 until the sup-norm reaches M, t reaches t_max, or the state
/// stops being finite. On blow-up the terminal window is fitted to the ODE profile
/// ||u|| = ((p-1)(T - t))^{-1/(p-1)} and T is reported as lifespan_estimate.
TrajectoryRecord run(const SolverConfig& config);

/// The same from an explicit datum u0 on config.grid (config.u0 is ignored).
TrajectoryRecord run_from(const SolverConfig& config, const ScalarField& u0);

/// T from samples (t_i, s_i) of the terminal window: least squares of s^{1-p}/(p-1) on t,
/// extrapolated to zero.
double extrapolate_blowup_time(const std::vector<double>& t, const std::vector<double>& sup, double p);

struct RichardsonLifespan {
  double coarse = 0.0;  ///< T_h at (dt_safety, c_nl)
  double fine = 0.0;    ///< T_h at (dt_safety/2, c_nl/2)
  double extrapolated = 0.0;
};

/// Two runs with all step controls halved, combined as 2 T_fine - T_coarse.
/// Throws NumericalError if either run does not blow up.
RichardsonLifespan richardson_lifespan(const SolverConfig& config);

}  // namespace heis
