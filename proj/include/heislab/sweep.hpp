#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heislab/grid.hpp"
#include "heislab/solver.hpp"

namespace heis {

enum class Regime { subcritical, critical, supercritical };

const char* to_string(Regime r);

/// Compares p with 1 + 2/Q; equality within 1e-12 is critical. Throws for p <= 1.
Regime classify_regime(double p, double Q);

/// -(1/(p-1) - Q/2)^{-1}; throws InvalidArgument unless p is subcritical.
double theory_slope(double p, double Q);

/// Box sized to the diffusive reach of the expected lifespan.
struct GridPolicy {
  int n = 1;
  double box_factor = 4.0;          ///< L_xy = box_factor * sqrt(expected_T)
  double min_L_xy = 0.0;            ///< floor on L_xy (e.g. to contain the datum)
  int N = 65;                       ///< nodes per axis; must keep h_xy <= L_xy/32
  double memory_cap_bytes = 1.0 * (1u << 30);
  int fields_per_run = 4;           ///< state, scratch and work fields held by one run

  /// Throws InvalidArgument when the projected memory exceeds the cap, proposing the
  /// largest resolution that fits.
  GridSpec operator()(double expected_T) const;
};

GridSpec grid_policy(double expected_T, const GridPolicy& policy = {});

struct SweepRun {
  double epsilon = 0.0;
  double expected_T = 0.0;
  GridSpec grid;
  Termination termination = Termination::horizon;
  std::optional<double> lifespan;  ///< T_h for blow-up runs
  bool contaminated = false;
  bool sup_decreasing = false;     ///< final sup-norm below the initial one
  std::size_t steps = 0;
  int attempts = 0;                ///< solver runs including contamination retries
};

/// Receives every finished run with its full trajectory; called from worker threads.
using RunHook = std::function<void(std::size_t index, const SweepRun& run, const TrajectoryRecord& record)>;

struct SweepConfig {
  double p = 1.25;
  std::vector<double> epsilons;   ///< strictly decreasing, at least 3
  SolverConfig base;              ///< template; p, epsilon, grid, t_max and snapshots are set per run
  GridPolicy policy;
  int worker_count = 1;
  double initial_expected_T = 1.0;  ///< grid guess for the pilot (largest epsilon)
  double horizon_factor = 4.0;      ///< blow-up runs stop at min(base.t_max, factor * expected_T)
  int max_retries = 2;              ///< contaminated runs are repeated with expected_T * 4
  int snapshots_per_octave = 0;     ///< > 0 records geometric snapshots for the hook
  RunHook on_run;

  void validate() const;
};

/// Ordered ladder eps_0 * ratio^k, k = 0..count-1.
std::vector<double> geometric_ladder(double eps0, double ratio, int count);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares; throws InvalidArgument for fewer than 2 points or constant x.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Lower-tail exact Wald-Wolfowitz runs-test p-value for the signs of `residuals` (in the
/// given order). Few runs indicate systematic curvature. Zero residuals are dropped; returns
/// 1 when only one sign remains.
double runs_test_p_value(const std::vector<double>& residuals);

struct SweepResult {
  double p = 0.0;
  Regime regime = Regime::subcritical;
  std::vector<SweepRun> runs;
  std::size_t used_runs = 0;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double theory_slope = 0.0;       ///< NaN outside the subcritical range
  double r_squared = 0.0;
  double runs_test_p = 1.0;
  std::vector<double> loglog_slopes;  ///< consecutive d log T_h / d log eps, in ladder order
  bool superpolynomial = false;       ///< |loglog_slopes| strictly increasing toward small eps
  std::optional<double> threshold_epsilon;  ///< supercritical: largest eps reaching the horizon
  bool threshold_ok = false;
  bool any_contaminated = false;
  bool pass = false;
};

/// Runs every epsilon and fits the lifespan law of the regime.
///
/// The largest epsilon runs first as a pilot. Subcritical grids then come from the pilot's
/// T_h times the theoretical ratio, and the remaining runs execute concurrently on
/// worker_count workers. Critical grids follow a chain: each projection extrapolates
/// log T_h linearly in eps^{-(p-1)} through the two previous results. Every run depends only
/// on its own projection, so results are identical for any worker_count.
///
/// Subcritical: least squares of log T_h on log eps, pass when the slope is within 20% of the
/// theory slope, r^2 >= 0.95 and no run is contaminated. Critical: log T_h on eps^{-(p-1)},
/// pass on a positive slope with r^2 >= 0.9. Supercritical: pass when the ladder splits into
/// blow-ups above a threshold and decaying horizon runs below it.
SweepResult run_sweep(const SweepConfig& config);

}  // namespace heis
