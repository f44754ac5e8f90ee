#include "heislab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "heislab/error.hpp"

namespace heis {

const char* to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::compact_bump: return "compact_bump";
    case InitialKind::weighted_decay: return "weighted_decay";
    case InitialKind::constant: return "constant";
  }
  return "unknown";
}

InitialKind initial_kind_from_string(const std::string& name) {
  if (name == "compact_bump") return InitialKind::compact_bump;
  if (name == "weighted_decay") return InitialKind::weighted_decay;
  if (name == "constant") return InitialKind::constant;
  throw InvalidArgument("unknown initial datum '" + name + "' (expected compact_bump, weighted_decay or constant)");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::blowup: return "blowup";
    case Termination::horizon: return "horizon";
    case Termination::instability: return "instability";
  }
  return "unknown";
}

namespace {

double bump_value(const double* xy, int axes, double tau, double radius) {
  double r2 = 0.0;
  for (int a = 0; a < axes; ++a) r2 += xy[a] * xy[a];
  const double q = 2.0 * (r2 * r2 + tau * tau) / (radius * radius);
  if (q >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - q));
}

// Cell average of the bump over the cell centred at (xy, tau) by the midpoint rule with
// kx points per horizontal axis and kt along tau.
double bump_cell_average(const double* xy, int axes, double tau, double radius, double h, double ht, int kx,
                         int kt) {
  // Cells whose bounding box misses the support are zero.
  const double reach_xy = std::pow(0.5 * radius * radius, 0.25);
  const double reach_tau = radius / std::sqrt(2.0);
  for (int a = 0; a < axes; ++a) {
    if (std::abs(xy[a]) - 0.5 * h >= reach_xy) return 0.0;
  }
  if (std::abs(tau) - 0.5 * ht >= reach_tau) return 0.0;
  std::size_t total = static_cast<std::size_t>(kt);
  for (int a = 0; a < axes; ++a) total *= static_cast<std::size_t>(kx);
  double pt[2 * GridSpec::max_n];
  double acc = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (int a = 0; a < axes; ++a) {
      const int i = static_cast<int>(rem % kx);
      rem /= kx;
      pt[a] = xy[a] + h * ((i + 0.5) / kx - 0.5);
    }
    const int i = static_cast<int>(rem);
    acc += bump_value(pt, axes, tau + ht * ((i + 0.5) / kt - 0.5), radius);
  }
  return acc / static_cast<double>(total);
}

}  // namespace

ScalarField initial_datum(const InitialDatum& datum, const GridSpec& grid) {
  grid.validate();
  const int axes = grid.horizontal_axes();
  switch (datum.kind) {
    case InitialKind::constant:
      return ScalarField(grid, 1.0);
    case InitialKind::weighted_decay: {
      if (!(datum.kappa >= 0.0) || !std::isfinite(datum.kappa)) {
        throw InvalidArgument("initial_datum: weighted_decay needs kappa >= 0");
      }
      const double kappa = datum.kappa;
      return sample_coords(grid, [&](const double* xy, double tau) {
        return decay_weight(0.0, gauge_squared(xy, axes, tau), kappa);
      });
    }
    case InitialKind::compact_bump: {
      const double R = datum.radius;
      if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("initial_datum: compact_bump needs radius > 0");
      if (datum.subsamples < 1) throw InvalidArgument("initial_datum: subsamples must be >= 1");
      const double reach_xy = std::pow(0.5 * R * R, 0.25);
      const double reach_tau = R / std::sqrt(2.0);
      if (reach_xy >= grid.L_xy || reach_tau >= grid.L_tau) {
        std::ostringstream os;
        os << "initial_datum: compact_bump of radius " << R << " reaches |x_j|,|y_j| < " << reach_xy
           << ", |tau| < " << reach_tau << ", beyond the box (L_xy=" << grid.L_xy << ", L_tau=" << grid.L_tau
           << ")";
        throw InvalidArgument(os.str());
      }
      if (datum.subsamples == 1) {
        return sample_coords(grid, [&](const double* xy, double tau) { return bump_value(xy, axes, tau, R); });
      }
      const double h = grid.h_xy();
      const double ht = grid.h_tau();
      // Sub-cell spacing also resolves the support itself (at least 8 points across it).
      const int kx = std::max(datum.subsamples, static_cast<int>(std::ceil(4.0 * h / reach_xy)));
      const int kt = std::max(datum.subsamples, static_cast<int>(std::ceil(4.0 * ht / reach_tau)));
      return sample_coords(grid, [&](const double* xy, double tau) {
        return bump_cell_average(xy, axes, tau, R, h, ht, kx, kt);
      });
    }
  }
  throw InvalidArgument("initial_datum: unknown kind");
}

void SolverConfig::validate() const {
  grid.validate();
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("solver: p must be > 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("solver: epsilon must be > 0");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw InvalidArgument("solver: dt_safety must lie in (0, 1]");
  if (!(c_nl > 0.0) || !std::isfinite(c_nl)) throw InvalidArgument("solver: c_nl must be > 0");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("solver: t_max must be > 0");
  if (!std::isfinite(blowup_threshold)) throw InvalidArgument("solver: blowup_threshold must be finite");
  if (weighted_kappa && !(*weighted_kappa >= 0.0)) throw InvalidArgument("solver: weighted kappa must be >= 0");
  double prev = -1.0;
  for (double s : snapshot_times) {
    if (!(s > prev) || s < 0.0 || s > t_max) {
      throw InvalidArgument("solver: snapshot times must be increasing, nonnegative and <= t_max");
    }
    prev = s;
  }
}

ScalarField step(const ScalarField& u, double dt, double p, Boundary boundary) {
  u.require_finite("step");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step: dt must be positive");
  ScalarField out(u.grid);
  euler_step_into(u, out, dt, boundary, true, p);
  for (double v : out.values) {
    if (!std::isfinite(v)) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

double extrapolate_blowup_time(const std::vector<double>& t, const std::vector<double>& sup, double p) {
  if (t.size() != sup.size() || t.size() < 2) throw InvalidArgument("extrapolate_blowup_time: need >= 2 samples");
  const std::size_t m = t.size();
  double st = 0.0;
  double sz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    st += t[i];
    sz += std::pow(sup[i], 1.0 - p) / (p - 1.0);
  }
  const double mt = st / m;
  const double mz = sz / m;
  double stt = 0.0;
  double stz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = t[i] - mt;
    stt += dt * dt;
    stz += dt * (std::pow(sup[i], 1.0 - p) / (p - 1.0) - mz);
  }
  if (!(stt > 0.0)) throw NumericalError("extrapolate_blowup_time: samples share one time");
  const double slope = stz / stt;
  if (!(slope < 0.0)) throw NumericalError("extrapolate_blowup_time: terminal window is not growing");
  return mt - mz / slope;
}

namespace {

// (1 + t + g2)^{kappa/2} with a multiply loop for integer kappa/2.
double weight_power(double base, double half_kappa) {
  const double r = std::round(half_kappa);
  if (r == half_kappa && r >= 0.0 && r <= 8.0) {
    double w = 1.0;
    for (int i = 0; i < static_cast<int>(r); ++i) w *= base;
    return w;
  }
  return std::pow(base, half_kappa);
}

struct FieldStats {
  double sup = 0.0;
  double min = 0.0;
  double mass = 0.0;
  bool finite = true;
};

// sup |u|, min u and the quadrature mass in one pass; the mass uses ordered per-line partial
// sums so it does not depend on the thread count.
FieldStats field_stats(const ScalarField& u, std::vector<double>& partial) {
  const GridSpec& g = u.grid;
  const std::ptrdiff_t H = static_cast<std::ptrdiff_t>(g.horizontal_nodes());
  const int Nt = g.N_tau;
  partial.resize(static_cast<std::size_t>(H));
  double sup = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  int bad = 0;
#pragma omp parallel for reduction(max : sup) reduction(min : mn) reduction(+ : bad) schedule(static)
  for (std::ptrdiff_t hi = 0; hi < H; ++hi) {
    const double* line = u.values.data() + static_cast<std::size_t>(hi) * Nt;
    double sum = 0.0;
    for (int k = 0; k < Nt; ++k) {
      const double x = line[k];
      if (!std::isfinite(x)) {
        ++bad;
        continue;
      }
      sup = std::max(sup, std::abs(x));
      mn = std::min(mn, x);
      sum += x;
    }
    partial[static_cast<std::size_t>(hi)] = sum;
  }
  FieldStats s;
  s.sup = sup;
  s.min = mn;
  s.finite = bad == 0;
  for (double v : partial) s.mass += v;
  s.mass *= g.cell_volume();
  return s;
}

}  // namespace

TrajectoryRecord run(const SolverConfig& config) {
  config.validate();
  return run_from(config, initial_datum(config.u0, config.grid));
}

TrajectoryRecord run_from(const SolverConfig& config, const ScalarField& u0) {
  config.validate();
  if (!(u0.grid == config.grid)) throw InvalidArgument("solver: datum grid differs from the configured grid");
  u0.require_finite("solver datum");
  const GridSpec& g = config.grid;
  ScalarField u = u0;
  for (double& v : u.values) v *= config.epsilon;
  const double sup0 = sup_norm(u);
  if (!(sup0 > 0.0)) throw InvalidArgument("solver: initial datum vanishes on the grid");
  const double M = config.blowup_threshold;
  if (M < 100.0 * sup0) {
    std::ostringstream os;
    os << "solver: blowup_threshold " << M << " must be at least 100 * epsilon * sup|u0| = " << 100.0 * sup0;
    throw InvalidArgument(os.str());
  }
  const double dt_lin = stability_timestep(g, config.dt_safety).suggested_dt;
  const double p = config.p;

  std::vector<double> g2;
  double half_kappa = 0.0;
  if (config.weighted_kappa) {
    half_kappa = 0.5 * *config.weighted_kappa;
    g2.resize(g.size());
    const int axes = g.horizontal_axes();
    const ScalarField gs = sample_coords(g, [axes](const double* xy, double tau) { return gauge_squared(xy, axes, tau); });
    g2 = gs.values;
  }

  TrajectoryRecord rec;
  ScalarField next(g);
  double t = 0.0;
  std::size_t next_snapshot = 0;
  const bool dirichlet = config.boundary == Boundary::dirichlet;

  std::vector<double> partial;
  for (;;) {
    const FieldStats st = field_stats(u, partial);
    if (!st.finite) {
      rec.termination = Termination::instability;
      warn("solver: non-finite values at t=" + std::to_string(t) + "; run stopped as unstable");
      break;
    }
    rec.times.push_back(t);
    rec.sup_norms.push_back(st.sup);
    rec.min_values.push_back(st.min);
    rec.masses.push_back(st.mass);
    const double bmax = boundary_shell_max(u);
    rec.boundary_max.push_back(bmax);
    if (dirichlet && bmax > 0.01 * st.sup) rec.boundary_contaminated = true;
    if (config.weighted_kappa) {
      double w = 0.0;
      const double* v = u.values.data();
      const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for reduction(max : w) schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) w = std::max(w, std::abs(v[i]) * weight_power(1.0 + t + g2[i], half_kappa));
      rec.weighted_norms.push_back(w);
    }
    if (next_snapshot < config.snapshot_times.size() && t == config.snapshot_times[next_snapshot]) {
      rec.snapshots.push_back({t, u});
      ++next_snapshot;
    }
    if (st.sup >= M) {
      rec.termination = Termination::blowup;
      rec.threshold_time = t;
      break;
    }
    rec.last_stable_time = t;
    if (t >= config.t_max) {
      rec.termination = Termination::horizon;
      break;
    }
    double dt = dt_lin;
    if (st.sup > 0.0) dt = std::min(dt, config.c_nl * std::pow(st.sup, 1.0 - p));
    double target = config.t_max;
    if (next_snapshot < config.snapshot_times.size()) target = std::min(target, config.snapshot_times[next_snapshot]);
    bool land = false;
    if (t + dt >= target * (1.0 - 1e-14)) {
      dt = target - t;
      land = true;
    }
    euler_step_into(u, next, dt, config.boundary, true, p);
    std::swap(u, next);
    t = land ? target : t + dt;
    ++rec.steps;
  }

  if (rec.termination == Termination::blowup) {
    // Terminal window: samples above the geometric mean of the smallest sup-norm and M.
    const double smin = *std::min_element(rec.sup_norms.begin(), rec.sup_norms.end());
    const double level = std::sqrt(std::max(smin, 1e-300) * M);
    std::vector<double> wt;
    std::vector<double> ws;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      if (rec.sup_norms[i] >= level && (wt.empty() || rec.times[i] > wt.back())) {
        wt.push_back(rec.times[i]);
        ws.push_back(rec.sup_norms[i]);
      }
    }
    double T = *rec.threshold_time;
    if (wt.size() >= 3) {
      try {
        T = extrapolate_blowup_time(wt, ws, p);
      } catch (const NumericalError& e) {
        warn(std::string("solver: ") + e.what() + "; reporting the threshold crossing time");
      }
    }
    rec.lifespan_estimate = T;
  }
  if (rec.boundary_contaminated) {
    std::ostringstream os;
    os << "solver: boundary shell exceeded 1% of the sup-norm (epsilon=" << config.epsilon << ")";
    warn(os.str());
  }
  rec.final_state = std::move(u);
  return rec;
}

RichardsonLifespan richardson_lifespan(const SolverConfig& config) {
  SolverConfig fine = config;
  fine.dt_safety = 0.5 * config.dt_safety;
  fine.c_nl = 0.5 * config.c_nl;
  fine.snapshot_times.clear();
  SolverConfig coarse = config;
  coarse.snapshot_times.clear();
  const TrajectoryRecord a = run(coarse);
  const TrajectoryRecord b = run(fine);
  if (!a.lifespan_estimate || !b.lifespan_estimate) {
    throw NumericalError("richardson_lifespan: both runs must blow up before t_max");
  }
  RichardsonLifespan r;
  r.coarse = *a.lifespan_estimate;
  r.fine = *b.lifespan_estimate;
  r.extrapolated = 2.0 * r.fine - r.coarse;
  return r;
}

}  // namespace heis
