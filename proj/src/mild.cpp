#include "heislab/mild.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "heislab/error.hpp"
#include "heislab/heat.hpp"

namespace heis {

WeightedNormParams WeightedNormParams::make(double kappa, double T, double p, int n) {
  if (!(kappa > 0.0)) throw InvalidArgument("weighted norm: kappa must be > 0");
  if (!(T > 0.0)) throw InvalidArgument("weighted norm: T must be > 0");
  if (!(p > 1.0)) throw InvalidArgument("weighted norm: p must be > 1");
  WeightedNormParams w;
  w.kappa = kappa;
  w.T = T;
  w.theta = 0.5 * (2.0 * n + 2.0) * (p - 1.0);
  return w;
}

void SpaceTimeField::validate() const {
  if (slices.empty() || slices.size() != times.size()) {
    throw InvalidArgument("space-time field: need one slice per time node");
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0 && !(times[j] > times[j - 1])) throw InvalidArgument("space-time field: times must increase");
    if (!(slices[j].grid == slices.front().grid)) throw InvalidArgument("space-time field: slices on different grids");
  }
}

std::vector<double> uniform_times(double T, int m) {
  if (!(T > 0.0) || m < 1) throw InvalidArgument("uniform_times: need T > 0 and m >= 1");
  std::vector<double> t(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) t[j] = T * j / m;
  t.back() = T;
  return t;
}

double norm_X(const SpaceTimeField& u, const WeightedNormParams& params) {
  double best = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u.times[j] > params.T * (1.0 + 1e-12)) continue;
    best = std::max(best, weighted_sup_norm(u.slices[j], u.times[j], params.kappa));
  }
  return best;
}

SpaceTimeField combine(double a, const SpaceTimeField& u, double b, const SpaceTimeField& v) {
  if (u.times != v.times) throw InvalidArgument("combine: time grids differ");
  SpaceTimeField out;
  out.times = u.times;
  out.slices.reserve(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out.slices.push_back(linear_combination(a, u.slices[j], b, v.slices[j]));
  return out;
}

double inner_timestep(const GridSpec& grid, double spacing, double safety) {
  if (!(spacing > 0.0)) throw InvalidArgument("inner_timestep: spacing must be positive");
  const double dt = stability_timestep(grid, safety).suggested_dt;
  const double k = std::ceil(spacing / dt - 1e-9);
  return spacing / k;
}

namespace {

double slice_spacing(const std::vector<double>& times) {
  if (times.size() < 2) throw InvalidArgument("Duhamel quadrature: need at least two time nodes");
  if (times.front() != 0.0) throw InvalidArgument("Duhamel quadrature: time grid must start at 0");
  const double D = times[1] - times[0];
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (std::abs(times[j] - times[j - 1] - D) > 1e-9 * std::max(1.0, D)) {
      throw InvalidArgument("Duhamel quadrature: time grid must be uniform");
    }
  }
  return D;
}

int steps_per_slice(double D, double dt, const GridSpec& grid) {
  if (!(dt > 0.0)) throw InvalidArgument("Duhamel quadrature: dt must be positive");
  const double ratio = D / dt;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "Duhamel quadrature: dt=" << dt << " does not divide the slice spacing " << D;
    throw InvalidArgument(os.str());
  }
  if (dt > stability_timestep(grid, 1.0).suggested_dt) {
    throw InvalidArgument("Duhamel quadrature: dt exceeds the stability bound of the linear step");
  }
  return static_cast<int>(k);
}

// Applies k Euler steps of size h in place.
void propagate(ScalarField& c, ScalarField& scratch, int k, double h, Boundary b) {
  for (int s = 0; s < k; ++s) {
    euler_step_into(c, scratch, h, b, false, 1.0);
    std::swap(c, scratch);
  }
}

// Phi_0 = init, Phi_j = C_j + D/2 f_j with C_1 = P(init + D/2 f_0), C_{j+1} = P(C_j + D f_j).
// source(j, f) fills f with the integrand at slice j. visit(j, Phi_j) receives each slice.
void duhamel_sweep(const ScalarField& init, std::size_t m, double D, int k, double h, Boundary b,
                   const std::function<void(std::size_t, ScalarField&)>& source,
                   const std::function<void(std::size_t, const ScalarField&)>& visit) {
  const GridSpec& g = init.grid;
  ScalarField c = init;
  ScalarField f(g);
  ScalarField scratch(g);
  ScalarField out(g);
  visit(0, init);
  source(0, f);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = j == 0 ? 0.5 * D : D;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += w * f[i];
    propagate(c, scratch, k, h, b);
    source(j + 1, f);
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] + 0.5 * D * f[i];
    out.require_finite("Duhamel quadrature");
    visit(j + 1, out);
  }
}

}  // namespace

SpaceTimeField phi_operator(const SpaceTimeField& u, const ScalarField& u0, double epsilon, double p, double dt,
                            Boundary boundary) {
  u.validate();
  if (!(u0.grid == u.grid())) throw InvalidArgument("phi_operator: u0 and u live on different grids");
  if (!(p > 1.0)) throw InvalidArgument("phi_operator: p must be > 1");
  for (const ScalarField& s : u.slices) s.require_finite("phi_operator");
  u0.require_finite("phi_operator");
  const double D = slice_spacing(u.times);
  const int k = steps_per_slice(D, dt, u.grid());
  const double h = D / k;
  ScalarField init = u0;
  for (double& v : init.values) v *= epsilon;
  SpaceTimeField out;
  out.times = u.times;
  out.slices.resize(u.size());
  duhamel_sweep(
      init, u.size() - 1, D, k, h, boundary,
      [&](std::size_t j, ScalarField& f) {
        const ScalarField& s = u.slices[j];
        for (std::size_t i = 0; i < f.size(); ++i) {
          const double a = std::abs(s[i]);
          f[i] = p == 2.0 ? a * a : (a == 0.0 ? 0.0 : std::pow(a, p));
        }
      },
      [&](std::size_t j, const ScalarField& phi) { out.slices[j] = phi; });
  return out;
}

bool in_central_sample(const GridSpec& grid, std::size_t index) {
  int idx[2 * GridSpec::max_n];
  grid.horizontal_indices(index / grid.N_tau, idx);
  for (int a = 0; a < grid.horizontal_axes(); ++a) {
    if (std::abs(grid.coord_xy(idx[a])) > 0.5 * grid.L_xy + 1e-12) return false;
  }
  const int k = static_cast<int>(index % grid.N_tau);
  return std::abs(grid.coord_tau(k)) <= 0.25 * grid.L_tau + 1e-12;
}

namespace {

ScalarField gauge_sq_field(const GridSpec& grid) {
  const int axes = grid.horizontal_axes();
  return sample_coords(grid, [axes](const double* xy, double tau) { return gauge_squared(xy, axes, tau); });
}

// max over the central sample of u (1 + t + g2)^e / extra
double central_max_ratio(const ScalarField& u, const ScalarField& g2, double t, double e, double extra) {
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!in_central_sample(u.grid, i)) continue;
    best = std::max(best, std::abs(u[i]) * std::pow(1.0 + t + g2[i], e) / extra);
  }
  return best;
}

bool shell_contaminated(const ScalarField& u) { return boundary_shell_max(u) > 0.01 * sup_norm(u); }

double spread_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*lo > 0.0) || !std::isfinite(*hi)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

}  // namespace

DecayReport check_linear_decay(double kappa, const GridSpec& grid, const std::vector<double>& times) {
  grid.validate();
  const double Q = 2.0 * grid.n + 2.0;
  if (!(kappa > 0.0) || kappa == Q) throw InvalidArgument("check_linear_decay: kappa must be positive and differ from Q");
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() < 0.0) {
    throw InvalidArgument("check_linear_decay: times must be nonnegative and increasing");
  }
  const ScalarField g2 = gauge_sq_field(grid);
  ScalarField w(grid);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(1.0 + g2[i], -0.5 * kappa);
  const double e = 0.5 * std::min(kappa, Q);
  const double dt = stability_timestep(grid, 0.4).suggested_dt;
  LinearPropagator prop(std::move(w), dt);
  DecayReport r;
  for (double t : times) {
    prop.advance_to(t);
    r.times.push_back(t);
    r.max_ratios.push_back(central_max_ratio(prop.state(), g2, t, e, 1.0));
    if (t > 0.0 && shell_contaminated(prop.state())) r.contaminated = true;
  }
  r.max_ratio = *std::max_element(r.max_ratios.begin(), r.max_ratios.end());
  r.spread = spread_of(r.max_ratios);
  r.pass = std::isfinite(r.max_ratio) && r.spread < 2.0;
  if (r.contaminated) warn("check_linear_decay: boundary shell above 1% of the sup-norm; report marked");
  return r;
}

DuhamelReport check_duhamel_bound(double alpha, const GridSpec& grid, const std::vector<double>& times,
                                  int intervals_per_unit) {
  grid.validate();
  const double Q = 2.0 * grid.n + 2.0;
  if (!(alpha > 0.0) || alpha > 1.0 + 0.5 * Q + 1e-12) {
    throw InvalidArgument("check_duhamel_bound: alpha must lie in (0, 1 + Q/2]");
  }
  if (intervals_per_unit < 1) throw InvalidArgument("check_duhamel_bound: intervals_per_unit must be >= 1");
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || !(times.front() > 0.0)) {
    throw InvalidArgument("check_duhamel_bound: times must be positive and increasing");
  }
  const double D = 1.0 / intervals_per_unit;
  std::vector<std::size_t> wanted;
  for (double t : times) {
    const double j = std::round(t / D);
    if (std::abs(t / D - j) > 1e-9 * std::max(1.0, j)) {
      throw InvalidArgument("check_duhamel_bound: times must be multiples of 1/intervals_per_unit");
    }
    wanted.push_back(static_cast<std::size_t>(j));
  }
  const double h = inner_timestep(grid, D);
  const int k = static_cast<int>(std::lround(D / h));
  const ScalarField g2 = gauge_sq_field(grid);
  const bool integer_alpha = alpha == std::round(alpha) && alpha <= 8.0;
  DuhamelReport r;
  r.endpoint = std::abs(alpha - (1.0 + 0.5 * Q)) < 1e-12;
  std::size_t next = 0;
  duhamel_sweep(
      ScalarField(grid), wanted.back(), D, k, h, Boundary::dirichlet,
      [&](std::size_t j, ScalarField& f) {
        const double s = static_cast<double>(j) * D;
        for (std::size_t i = 0; i < f.size(); ++i) {
          const double base = 1.0 / (1.0 + s + g2[i]);
          if (integer_alpha) {
            double v = 1.0;
            for (int a = 0; a < static_cast<int>(alpha); ++a) v *= base;
            f[i] = v;
          } else {
            f[i] = std::pow(base, alpha);
          }
        }
      },
      [&](std::size_t j, const ScalarField& value) {
        while (next < wanted.size() && wanted[next] == j) {
          const double t = times[next];
          r.times.push_back(t);
          r.max_ratios.push_back(central_max_ratio(value, g2, t, alpha, t));
          r.max_ratios_log.push_back(central_max_ratio(value, g2, t, alpha, t * std::log(std::exp(1.0) + t)));
          if (shell_contaminated(value)) r.contaminated = true;
          ++next;
        }
      });
  r.spread = spread_of(r.endpoint ? r.max_ratios_log : r.max_ratios);
  r.uncorrected_grows = r.max_ratios.size() >= 2;
  for (std::size_t i = 1; i < r.max_ratios.size(); ++i) {
    r.uncorrected_grows = r.uncorrected_grows && r.max_ratios[i] > r.max_ratios[i - 1];
  }
  r.pass = std::isfinite(r.spread) && r.spread < 2.0;
  if (r.contaminated) warn("check_duhamel_bound: boundary shell above 1% of the sup-norm; report marked");
  return r;
}

double contraction_probe(const SpaceTimeField& u, const SpaceTimeField& v, const ScalarField& u0, double epsilon,
                         double p, double kappa, double dt, Boundary boundary) {
  if (u.times != v.times) throw InvalidArgument("contraction_probe: time grids differ");
  WeightedNormParams params;
  params.kappa = kappa;
  params.T = u.times.back();
  const double denom = norm_X(combine(1.0, u, -1.0, v), params);
  if (!(denom > 0.0)) throw InvalidArgument("contraction_probe: u and v coincide; the ratio is undefined");
  const SpaceTimeField pu = phi_operator(u, u0, epsilon, p, dt, boundary);
  const SpaceTimeField pv = phi_operator(v, u0, epsilon, p, dt, boundary);
  return norm_X(combine(1.0, pu, -1.0, pv), params) / denom;
}

SpaceTimeField random_ball_element(const GridSpec& grid, const std::vector<double>& times, double kappa,
                                   double radius, std::uint64_t seed) {
  grid.validate();
  if (!(radius > 0.0)) throw InvalidArgument("random_ball_element: radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp_dist(0.2, 1.0);
  std::uniform_real_distribution<double> node_dist(0.5, 1.0);
  const double amp = amp_dist(rng);
  const ScalarField g2 = gauge_sq_field(grid);
  SpaceTimeField u;
  u.times = times;
  for (double t : times) {
    ScalarField s(grid);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = radius * amp * node_dist(rng) * decay_weight(t, g2[i], kappa);
    u.slices.push_back(std::move(s));
  }
  u.validate();
  return u;
}

PicardResult picard_solve(const ScalarField& u0, double epsilon, double p, double kappa,
                          const std::vector<double>& times, int iterations, double dt, double tol,
                          Boundary boundary) {
  if (iterations < 1) throw InvalidArgument("picard_solve: iterations must be >= 1");
  WeightedNormParams params;
  params.kappa = kappa;
  params.T = times.back();
  SpaceTimeField zero;
  zero.times = times;
  zero.slices.assign(times.size(), ScalarField(u0.grid));
  PicardResult r;
  SpaceTimeField cur = phi_operator(zero, u0, epsilon, p, dt, boundary);
  int growth = 0;
  for (int it = 0; it < iterations; ++it) {
    SpaceTimeField next = phi_operator(cur, u0, epsilon, p, dt, boundary);
    const double res = norm_X(combine(1.0, next, -1.0, cur), params);
    const double ball = norm_X(next, params);
    r.lipschitz_estimates.push_back(r.residuals.empty() || r.residuals.back() == 0.0
                                        ? std::numeric_limits<double>::quiet_NaN()
                                        : res / r.residuals.back());
    growth = !r.residuals.empty() && res > r.residuals.back() ? growth + 1 : 0;
    r.residuals.push_back(res);
    r.ball_norms.push_back(ball);
    cur = std::move(next);
    if (growth >= 3) {
      r.contractive = false;
      warn("picard_solve: residual grew for 3 consecutive iterations; iteration is not contractive");
      break;
    }
    if (res <= tol * ball) {
      r.converged = true;
      break;
    }
  }
  r.solution = std::move(cur);
  return r;
}

}  // namespace heis
