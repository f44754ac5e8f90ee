#include "heislab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "heislab/error.hpp"

namespace heis {

ScalarField delta_init(const GridSpec& grid, double mollifier_width) {
  grid.validate();
  if (!(mollifier_width >= 0.0) || !std::isfinite(mollifier_width)) {
    throw InvalidArgument("delta_init: mollifier width must be >= 0");
  }
  if (mollifier_width == 0.0) {
    ScalarField u(grid);
    u[grid.origin_index()] = 1.0 / grid.cell_volume();
    return u;
  }
  const double w = mollifier_width;
  const double wt = w * grid.h_tau() / grid.h_xy();
  const double inside = std::pow(std::erf(grid.L_xy / (std::sqrt(2.0) * w)), 2 * grid.n) *
                        std::erf(grid.L_tau / (std::sqrt(2.0) * wt));
  if (inside < 0.99) {
    std::ostringstream os;
    os << "delta_init: mollifier width " << w << " leaves " << 100.0 * (1.0 - inside)
       << "% of the mass outside the box";
    throw InvalidArgument(os.str());
  }
  const int axes = grid.horizontal_axes();
  ScalarField u = sample_coords(grid, [&](const double* xy, double tau) {
    double r2 = 0.0;
    for (int a = 0; a < axes; ++a) r2 += xy[a] * xy[a];
    return std::exp(-r2 / (2.0 * w * w) - tau * tau / (2.0 * wt * wt));
  });
  const double mass = integrate(u);
  for (double& v : u.values) v /= mass;
  return u;
}

double default_mollifier_width(const GridSpec& grid) { return 1.5 * grid.h_xy(); }

LinearPropagator::LinearPropagator(ScalarField u0, double dt, Boundary boundary)
    : u_(std::move(u0)), scratch_(u_.grid), dt_(dt), boundary_(boundary) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("propagate_linear: dt must be positive");
  u_.require_finite("propagate_linear");
  initial_sup_ = sup_norm(u_);
}

void LinearPropagator::advance_to(double t) {
  if (t < t_) throw InvalidArgument("propagate_linear: cannot step backwards in time");
  const double span = t - t_;
  if (span == 0.0) return;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt_ - 1e-12));
  const double h = span / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    euler_step_into(u_, scratch_, h, boundary_, false, 1.0);
    std::swap(u_, scratch_);
  }
  steps_ += steps;
  t_ = t;
  const double sup = sup_norm(u_);
  if (!std::isfinite(sup) || sup > 10.0 * initial_sup_ + 1e-300) {
    std::ostringstream os;
    os << "propagate_linear: instability at t=" << t << " (sup-norm " << sup << " vs initial "
       << initial_sup_ << "); reduce dt below the stability bound";
    throw NumericalError(os.str());
  }
}

ScalarField propagate_linear(const ScalarField& u0, double t_final, double dt, Boundary boundary) {
  if (t_final < 0.0) throw InvalidArgument("propagate_linear: t_final must be >= 0");
  if (t_final == 0.0) return u0;
  LinearPropagator prop(u0, dt, boundary);
  prop.advance_to(t_final);
  return prop.state();
}

namespace {

void fill_diagnostics(KernelSnapshot& k) {
  k.mass = integrate(k.field);
  k.min_value = min_value(k.field);
  k.max_value = max_value(k.field);
  k.center_value = k.field[k.field.grid.origin_index()];
  k.usable = k.mass >= 0.9 && k.mass <= 1.1;
  if (!k.usable) {
    std::ostringstream os;
    os << "heat_kernel: mass " << k.mass << " at t=" << k.t << " outside [0.9, 1.1]; snapshot flagged unusable";
    warn(os.str());
    return;
  }
  try {
    const SandwichFit fit = fit_gaussian_sandwich(k);
    k.fitted_c = fit.c;
    k.fitted_C = fit.C;
    k.log_upper_intercept = fit.log_upper_intercept;
    k.log_lower_intercept = fit.log_lower_intercept;
    k.fit_ok = true;
  } catch (const InvalidArgument&) {
    k.fit_ok = false;
  }
}

}  // namespace

std::vector<KernelSnapshot> heat_kernels(const std::vector<double>& times, const GridSpec& grid,
                                         const KernelOptions& options) {
  if (times.empty()) throw InvalidArgument("heat_kernel: no times requested");
  if (!std::is_sorted(times.begin(), times.end()) || times.front() <= 0.0) {
    throw InvalidArgument("heat_kernel: times must be positive and increasing");
  }
  const double dt = options.dt > 0.0 ? options.dt : stability_timestep(grid, options.safety).suggested_dt;
  const double width = options.mollifier_width < 0.0 ? default_mollifier_width(grid) : options.mollifier_width;
  LinearPropagator prop(delta_init(grid, width), dt);
  std::vector<KernelSnapshot> out;
  out.reserve(times.size());
  for (double t : times) {
    prop.advance_to(t);
    KernelSnapshot k;
    k.t = t;
    k.field = prop.state();
    fill_diagnostics(k);
    out.push_back(std::move(k));
  }
  return out;
}

KernelSnapshot heat_kernel(double t, const GridSpec& grid, const KernelOptions& options) {
  if (!(t > 0.0)) throw InvalidArgument("heat_kernel: t must be positive");
  return std::move(heat_kernels({t}, grid, options).front());
}

ScalingCheck check_scaling_identity(const KernelSnapshot& k_t, const KernelSnapshot& k_ref,
                                    double threshold_rel) {
  const GridSpec& g = k_t.field.grid;
  if (!(g == k_ref.field.grid)) throw InvalidArgument("check_scaling_identity: snapshots on different grids");
  if (!(k_t.t > 0.0) || !(k_ref.t > 0.0)) throw InvalidArgument("check_scaling_identity: times must be positive");
  const double Q = 2.0 * g.n + 2.0;
  const double lambda = std::sqrt(k_ref.t / k_t.t);
  const double amp = std::pow(lambda, Q);
  const double peak_t = max_value(k_t.field);
  const double peak_ref = max_value(k_ref.field);
  ScalingCheck out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = k_t.field[i];
    if (a <= threshold_rel * peak_t) continue;
    const GroupPoint xi = dilate(lambda, g.node(i));
    bool inside = std::abs(xi.tau) <= g.L_tau;
    for (int j = 0; j < g.n && inside; ++j) inside = std::abs(xi.x[j]) <= g.L_xy && std::abs(xi.y[j]) <= g.L_xy;
    if (!inside) continue;
    const double b = interpolate(k_ref.field, xi);
    if (b <= threshold_rel * peak_ref) continue;
    const double predicted = amp * b;
    out.max_rel_error = std::max(out.max_rel_error, std::abs(a - predicted) / predicted);
    ++out.admissible;
  }
  if (out.admissible == 0) throw InvalidArgument("check_scaling_identity: empty admissible set");
  return out;
}

namespace {

struct Pt {
  double x;
  double y;
};

double cross(const Pt& o, const Pt& a, const Pt& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Hull edge (slope, intercept) whose x-range contains x0. `upper` selects the upper chain.
std::pair<double, double> hull_edge_at(std::vector<Pt> pts, double x0, bool upper) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Pt> chain;
  for (const Pt& p : pts) {
    while (chain.size() >= 2) {
      const double c = cross(chain[chain.size() - 2], chain.back(), p);
      if ((upper && c >= 0.0) || (!upper && c <= 0.0)) {
        chain.pop_back();
      } else {
        break;
      }
    }
    chain.push_back(p);
  }
  if (chain.size() < 2) throw InvalidArgument("fit_gaussian_sandwich: degenerate point cloud");
  std::size_t e = 0;
  while (e + 2 < chain.size() && chain[e + 1].x <= x0) ++e;
  const Pt& a = chain[e];
  const Pt& b = chain[e + 1];
  const double slope = (b.y - a.y) / (b.x - a.x);
  return {slope, a.y - slope * a.x};
}

}  // namespace

SandwichFit fit_gaussian_sandwich(const KernelSnapshot& k, double threshold_rel) {
  const GridSpec& g = k.field.grid;
  if (!(k.t > 0.0)) throw InvalidArgument("fit_gaussian_sandwich: t must be positive");
  const double Q = 2.0 * g.n + 2.0;
  const double peak = max_value(k.field);
  const double scale = std::pow(k.t, 0.5 * Q);
  const int axes = g.horizontal_axes();
  // The threshold and the box both truncate the cloud from below; only the gauge ball in
  // which every node survives carries envelope information.
  std::vector<Pt> pts;
  double g_cut = std::numeric_limits<double>::infinity();
  int idx[2 * GridSpec::max_n];
  for (std::size_t hi = 0; hi < g.horizontal_nodes(); ++hi) {
    double xy[2 * GridSpec::max_n];
    g.horizontal_coords(hi, xy);
    g.horizontal_indices(hi, idx);
    bool face = false;
    for (int a = 0; a < axes; ++a) face = face || idx[a] == 0 || idx[a] == g.N_xy - 1;
    for (int m = 0; m < g.N_tau; ++m) {
      const double v = k.field[hi * g.N_tau + m];
      const double gx = gauge_squared(xy, axes, g.coord_tau(m)) / k.t;
      if (face || m == 0 || m == g.N_tau - 1 || v <= threshold_rel * peak) {
        g_cut = std::min(g_cut, gx);
        if (v <= threshold_rel * peak) continue;
      }
      pts.push_back({gx, std::log(scale * v)});
    }
  }
  std::erase_if(pts, [g_cut](const Pt& p) { return p.x >= g_cut; });
  if (pts.size() < 50) {
    throw InvalidArgument("fit_gaussian_sandwich: fewer than 50 admissible nodes (" + std::to_string(pts.size()) + ")");
  }
  double mean_x = 0.0;
  for (const Pt& p : pts) mean_x += p.x;
  mean_x /= static_cast<double>(pts.size());
  const auto [su, au] = hull_edge_at(pts, mean_x, true);
  const auto [sl, al] = hull_edge_at(pts, mean_x, false);
  SandwichFit fit;
  fit.c = -su;
  fit.C = -sl;
  fit.log_upper_intercept = au;
  fit.log_lower_intercept = al;
  fit.points = pts.size();
  return fit;
}

SemigroupCheck check_semigroup(const ScalarField& k_s, const ScalarField& k_t, const ScalarField& k_st,
                               double truncation_rel) {
  if (!(k_s.grid == k_t.grid) || !(k_s.grid == k_st.grid)) {
    throw InvalidArgument("check_semigroup: kernels on different grids");
  }
  const ScalarField conv = group_convolve(k_s, k_t, truncation_rel);
  std::vector<std::size_t> order(k_st.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return k_st[a] > k_st[b] || (k_st[a] == k_st[b] && a < b);
  });
  double total = 0.0;
  for (double v : k_st.values) total += std::max(v, 0.0);
  SemigroupCheck out;
  double acc = 0.0;
  for (std::size_t i : order) {
    if (acc >= 0.5 * total || k_st[i] <= 0.0) break;
    acc += k_st[i];
    out.max_rel_error = std::max(out.max_rel_error, std::abs(conv[i] - k_st[i]) / k_st[i]);
    ++out.region_nodes;
  }
  return out;
}

}  // namespace heis
