#include "heislab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "heislab/error.hpp"
#include "heislab/sublaplacian.hpp"

namespace heis {

namespace {

constexpr int kTableIntervals = 4096;

// 5-point Gauss-Legendre on [a, b].
template <class F>
double gauss5(F&& f, double a, double b) {
  static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                  0.9061798459386640};
  static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                  0.2369268850561891, 0.2369268850561891};
  const double m = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * f(m + r * x[i]);
  return s * r;
}

}  // namespace

SmoothStep::SmoothStep(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("SmoothStep: smoothness scale must be positive");
  auto m = [c](double s) { return std::abs(s) >= 1.0 ? 0.0 : std::exp(-c / (1.0 - s * s)); };
  table_.assign(kTableIntervals + 1, 0.0);
  const double ds = 2.0 / kTableIntervals;
  for (int i = kTableIntervals - 1; i >= 0; --i) {
    const double a = -1.0 + i * ds;
    table_[i] = table_[i + 1] + gauss5(m, a, a + ds);
  }
  norm_ = table_[0];
}

double SmoothStep::value(double s) const {
  if (s <= -1.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double ds = 2.0 / kTableIntervals;
  const double pos = (s + 1.0) / ds;
  const int i = std::min(static_cast<int>(pos), kTableIntervals - 1);
  const double x = pos - i;
  const double s0 = -1.0 + i * ds;
  const double s1 = s0 + ds;
  const auto m = [this](double v) { return std::abs(v) >= 1.0 ? 0.0 : std::exp(-c_ / (1.0 - v * v)); };
  // Cubic Hermite with the exact slopes -m.
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
  const double h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x);
  const double h11 = x * x * (x - 1);
  const double v = h00 * table_[i] + h10 * ds * (-m(s0)) + h01 * table_[i + 1] + h11 * ds * (-m(s1));
  return std::clamp(v / norm_, 0.0, 1.0);
}

double SmoothStep::d1(double s) const {
  if (std::abs(s) >= 1.0) return 0.0;
  return -std::exp(-c_ / (1.0 - s * s)) / norm_;
}

double SmoothStep::d2(double s) const {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -std::exp(-c_ / q) * (-2.0 * c_ * s / (q * q)) / norm_;
}

BumpPair::BumpPair(double p, double smoothness_scale) : p_(p), step_(smoothness_scale) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("make_bumps: p must be > 1");
}

std::unique_ptr<BumpPair> make_bumps(double p, double smoothness_scale) {
  return std::make_unique<BumpPair>(p, smoothness_scale);
}

// alpha and phi: transition on [1/2, 1] via sigma = 4r - 3.
double BumpPair::alpha(double r) const { return step_.value(4.0 * std::abs(r) - 3.0); }
double BumpPair::alpha_d1(double r) const {
  return (r < 0.0 ? -4.0 : 4.0) * step_.d1(4.0 * std::abs(r) - 3.0);
}
double BumpPair::alpha_d2(double r) const { return 16.0 * step_.d2(4.0 * std::abs(r) - 3.0); }

// beta: transition on [1/4, 1] via sigma = (8/3)(|r| - 1/4) - 1.
double BumpPair::beta(double r) const { return step_.value(8.0 / 3.0 * (std::abs(r) - 0.25) - 1.0); }
double BumpPair::beta_d1(double r) const {
  return (r < 0.0 ? -8.0 / 3.0 : 8.0 / 3.0) * step_.d1(8.0 / 3.0 * (std::abs(r) - 0.25) - 1.0);
}
double BumpPair::beta_d2(double r) const { return 64.0 / 9.0 * step_.d2(8.0 / 3.0 * (std::abs(r) - 0.25) - 1.0); }

double BumpPair::phi(double s) const { return step_.value(4.0 * s - 3.0); }
double BumpPair::phi_d1(double s) const { return 4.0 * step_.d1(4.0 * s - 3.0); }
double BumpPair::phi_d2(double s) const { return 16.0 * step_.d2(4.0 * s - 3.0); }
double BumpPair::phi_star(double s) const { return s < 0.5 ? 0.0 : phi(s); }

double BumpPair::phi_R(double R, double t, const double* coords, int n, double tau) const {
  double x2 = 0.0;
  double y2 = 0.0;
  for (int j = 0; j < n; ++j) {
    x2 += coords[j] * coords[j];
    y2 += coords[n + j] * coords[n + j];
  }
  const double R2 = R * R;
  return beta(t / R2) * alpha(std::sqrt(x2) / R) * alpha(std::sqrt(y2) / R) * beta(tau / R2);
}

double BumpPair::s_R(double R, double t, const double* coords, int n, double tau) {
  double x2 = 0.0;
  double y2 = 0.0;
  for (int j = 0; j < n; ++j) {
    x2 += coords[j] * coords[j];
    y2 += coords[n + j] * coords[n + j];
  }
  return (t * t + x2 * x2 + y2 * y2 + tau * tau) / (R * R);
}

std::pair<double, double> BumpPair::psi_R(double R, double t, const double* coords, int n, double tau) const {
  const double s = s_R(R, t, coords, n, tau);
  if (s >= 1.0) return {0.0, 0.0};
  const double e = 2.0 * p_conjugate();
  const double v = std::pow(phi(s), e);
  return {v, s < 0.5 ? 0.0 : v};
}

QuotientConstants check_bump_shapes(const BumpPair& b, int samples) {
  if (samples < 10) throw InvalidArgument("check_bump_shapes: need at least 10 samples");
  QuotientConstants q;
  bool ok = true;
  const double ip = 1.0 / b.p();
  double prev_a = 1.0;
  double prev_b = 1.0;
  double prev_f = 1.0;
  for (int i = 0; i < samples; ++i) {
    const double r = 1.2 * i / (samples - 1);
    const double a = b.alpha(r);
    const double be = b.beta(r);
    const double f = b.phi(r);
    ok = ok && a >= 0.0 && a <= 1.0 && be >= 0.0 && be <= 1.0 && f >= 0.0 && f <= 1.0;
    ok = ok && a <= prev_a + 1e-15 && be <= prev_b + 1e-15 && f <= prev_f + 1e-15;
    ok = ok && be == b.beta(-r);
    if (r <= 0.5) ok = ok && a == 1.0 && f == 1.0;
    if (r <= 0.25) ok = ok && be == 1.0;
    if (r >= 1.0) ok = ok && a == 0.0 && be == 0.0 && f == 0.0;
    if (r < 0.5) ok = ok && b.phi_star(r) == 0.0;
    prev_a = a;
    prev_b = be;
    prev_f = f;
    if (a > 1e-12) {
      const double d = std::pow(a, ip);
      q.alpha_d1 = std::max(q.alpha_d1, std::abs(b.alpha_d1(r)) / d);
      q.alpha_d2 = std::max(q.alpha_d2, std::abs(b.alpha_d2(r)) / d);
    }
    if (be > 1e-12) {
      const double d = std::pow(be, ip);
      q.beta_d1 = std::max(q.beta_d1, std::abs(b.beta_d1(r)) / d);
      q.beta_d2 = std::max(q.beta_d2, std::abs(b.beta_d2(r)) / d);
    }
  }
  q.shape_ok = ok;
  return q;
}

namespace {

// max over nodes and sampled times of |D f| / (R^{-power} target^{1/p}).
struct FitOut {
  double t_fit = 0.0;
  double lap_fit = 0.0;
};

template <class Value, class Target>
FitOut fit_family(const GridSpec& g, double R, double power, double t_end, int time_samples, double p,
                  double floor, Value&& value, Target&& target) {
  const int n = g.n;
  const double scale = std::pow(R, -power);
  const double delta = 1e-5 * t_end;
  const double ip = 1.0 / p;
  FitOut out;
  for (int k = 0; k < time_samples; ++k) {
    const double t = t_end * k / (time_samples - 1);
    const ScalarField f = sample_coords(g, [&](const double* c, double tau) { return value(t, c, n, tau); });
    const ScalarField tg = sample_coords(g, [&](const double* c, double tau) { return target(t, c, n, tau); });
    const ScalarField lap = apply_sublaplacian(f);
    const ScalarField fp = sample_coords(g, [&](const double* c, double tau) { return value(t + delta, c, n, tau); });
    const ScalarField fm = sample_coords(g, [&](const double* c, double tau) { return value(t - delta, c, n, tau); });
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!(tg[i] > floor)) continue;
      const double denom = scale * std::pow(tg[i], ip);
      out.lap_fit = std::max(out.lap_fit, std::abs(lap[i]) / denom);
      out.t_fit = std::max(out.t_fit, std::abs(fp[i] - fm[i]) / (2.0 * delta) / denom);
    }
  }
  return out;
}

GridSpec phi_grid(double R, int n, int N) { return GridSpec{n, R, R * R, N, N}; }
GridSpec psi_grid(double R, int n, int N) { return GridSpec{n, std::sqrt(R), R, N, N}; }

double spread_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*lo > 0.0) || !std::isfinite(*hi)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

void require_support_inside(const GridSpec& g, double reach_xy, double reach_tau, const char* what) {
  if (g.L_xy < reach_xy * (1.0 - 1e-12) || g.L_tau < reach_tau * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << what << ": grid (L_xy=" << g.L_xy << ", L_tau=" << g.L_tau << ") does not contain the support (|x_j| < "
       << reach_xy << ", |tau| < " << reach_tau << ")";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

double fit_phi_laplacian(const BumpPair& b, double R, const GridSpec& g, int time_samples, double target_floor) {
  g.validate();
  require_support_inside(g, R, R * R, "derivative_bound_check");
  auto phi = [&](double t, const double* c, int n, double tau) { return b.phi_R(R, t, c, n, tau); };
  return fit_family(g, R, 2.0, R * R, time_samples, b.p(), target_floor, phi, phi).lap_fit;
}

DerivativeFit derivative_bound_check(const BumpPair& b, const std::vector<double>& R_values, int n, int N,
                                     int time_samples, double target_floor) {
  if (R_values.empty()) throw InvalidArgument("derivative_bound_check: no R values");
  if (time_samples < 2) throw InvalidArgument("derivative_bound_check: need at least 2 time samples");
  DerivativeFit fit;
  for (double R : R_values) {
    if (!(R > 0.0)) throw InvalidArgument("derivative_bound_check: R must be positive");
    const GridSpec gp = phi_grid(R, n, N);
    gp.validate();
    auto phi = [&](double t, const double* c, int nn, double tau) { return b.phi_R(R, t, c, nn, tau); };
    const FitOut a = fit_family(gp, R, 2.0, R * R, time_samples, b.p(), target_floor, phi, phi);
    const GridSpec gs = psi_grid(R, n, N);
    gs.validate();
    auto psi = [&](double t, const double* c, int nn, double tau) { return b.psi_R(R, t, c, nn, tau).first; };
    auto psi_star = [&](double t, const double* c, int nn, double tau) { return b.psi_R(R, t, c, nn, tau).second; };
    const FitOut s = fit_family(gs, R, 1.0, R, time_samples, b.p(), target_floor, psi, psi_star);
    fit.R_values.push_back(R);
    fit.phi_t.push_back(a.t_fit);
    fit.phi_lap.push_back(a.lap_fit);
    fit.psi_t.push_back(s.t_fit);
    fit.psi_lap.push_back(s.lap_fit);
  }
  fit.spread = std::max({spread_of(fit.phi_t), spread_of(fit.phi_lap), spread_of(fit.psi_t), spread_of(fit.psi_lap)});
  fit.pass = fit.spread < 2.0;
  return fit;
}

namespace {

void require_snapshots(const std::vector<Snapshot>& s, const char* what) {
  if (s.empty() || s.front().t != 0.0) {
    throw InvalidArgument(std::string(what) + ": snapshots must start at t = 0");
  }
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k].t > s[k - 1].t)) throw InvalidArgument(std::string(what) + ": snapshot times must increase");
    if (!(s[k].field.grid == s.front().field.grid)) {
      throw InvalidArgument(std::string(what) + ": snapshots on different grids");
    }
  }
}

double abs_pow(double v, double p) {
  const double a = std::abs(v);
  return p == 2.0 ? a * a : (a == 0.0 ? 0.0 : std::pow(a, p));
}

// int over the box of weight(coords, tau) * h(u) restricted to |x_j|, |y_j| < reach_xy and
// |tau| < reach_tau.
template <class W, class H>
double box_integral(const ScalarField& u, double reach_xy, double reach_tau, W&& weight, H&& h) {
  const GridSpec& g = u.grid;
  const int axes = g.horizontal_axes();
  const double hx = g.h_xy();
  const double ht = g.h_tau();
  const int c = g.center_xy();
  const int ct = g.center_tau();
  const int span = std::min(c, static_cast<int>(std::ceil(reach_xy / hx)));
  const int span_t = std::min(ct, static_cast<int>(std::ceil(reach_tau / ht)));
  const int width = 2 * span + 1;
  std::size_t count = 1;
  for (int a = 0; a < axes; ++a) count *= static_cast<std::size_t>(width);
  double total = 0.0;
  int idx[2 * GridSpec::max_n];
  double coords[2 * GridSpec::max_n];
  for (std::size_t q = 0; q < count; ++q) {
    std::size_t rem = q;
    std::size_t hidx = 0;
    for (int a = axes - 1; a >= 0; --a) {
      idx[a] = c - span + static_cast<int>(rem % width);
      rem /= width;
    }
    for (int a = 0; a < axes; ++a) {
      hidx = hidx * g.N_xy + idx[a];
      coords[a] = g.coord_xy(idx[a]);
    }
    const double* line = u.values.data() + hidx * g.N_tau;
    double line_sum = 0.0;
    for (int k = ct - span_t; k <= ct + span_t; ++k) {
      const double w = weight(coords, g.coord_tau(k));
      if (w != 0.0) line_sum += w * h(line[k]);
    }
    total += line_sum;
  }
  return total * g.cell_volume();
}

// Trapezoid weights over snapshot times clipped to [0, t_end]; the first snapshot at or past
// t_end closes the rule. Returns the number of snapshots used.
std::size_t trapezoid_weights(const std::vector<Snapshot>& s, double t_end, std::vector<double>& w) {
  w.assign(s.size(), 0.0);
  std::size_t used = 1;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double dt = s[k].t - s[k - 1].t;
    w[k - 1] += 0.5 * dt;
    w[k] += 0.5 * dt;
    used = k + 1;
    if (s[k].t >= t_end) break;
  }
  return used;
}

}  // namespace

PhiFunctionals functionals_phi(const std::vector<Snapshot>& snapshots, double epsilon, double R,
                               const BumpPair& b) {
  require_snapshots(snapshots, "functionals_phi");
  if (!(R > 0.0)) throw InvalidArgument("functionals_phi: R must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("functionals_phi: epsilon must be positive");
  const double R2 = R * R;
  if (snapshots.back().t < R2 * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "functionals_phi: R^2 = " << R2 << " exceeds the covered horizon " << snapshots.back().t
       << "; the largest admissible R is " << std::sqrt(snapshots.back().t);
    throw InvalidArgument(os.str());
  }
  const int n = snapshots.front().field.grid.n;
  const double p = b.p();
  std::vector<double> w;
  const std::size_t used = trapezoid_weights(snapshots, R2, w);
  PhiFunctionals out;
  for (std::size_t k = 0; k < used; ++k) {
    const double t = snapshots[k].t;
    if (w[k] == 0.0 || t >= R2) continue;
    const double beta_t = b.beta(t / R2);
    out.I += w[k] * beta_t *
             box_integral(
                 snapshots[k].field, R, R2,
                 [&](const double* c, double tau) { return b.phi_R(R, 0.0, c, n, tau); },
                 [p](double v) { return abs_pow(v, p); });
  }
  out.J = box_integral(
              snapshots.front().field, R, R2, [&](const double* c, double tau) { return b.phi_R(R, 0.0, c, n, tau); },
              [](double v) { return v; }) /
          epsilon;
  return out;
}

namespace {

// (X(r), Y(r)) by space-time quadrature.
std::pair<double, double> psi_pair(const std::vector<Snapshot>& s, double r, const BumpPair& b) {
  const int n = s.front().field.grid.n;
  const double p = b.p();
  std::vector<double> w;
  const std::size_t used = trapezoid_weights(s, r, w);
  double X = 0.0;
  double Y = 0.0;
  const double reach_xy = std::sqrt(r);
  for (std::size_t k = 0; k < used; ++k) {
    const double t = s[k].t;
    if (w[k] == 0.0 || t >= r) continue;
    const double x = box_integral(
        s[k].field, reach_xy, r,
        [&](const double* c, double tau) { return b.psi_R(r, t, c, n, tau).first; },
        [p](double v) { return abs_pow(v, p); });
    const double y = box_integral(
        s[k].field, reach_xy, r, [&](const double* c, double tau) { return b.psi_R(r, t, c, n, tau).second; },
        [p](double v) { return abs_pow(v, p); });
    X += w[k] * x;
    Y += w[k] * y;
  }
  return {X, Y};
}

std::size_t snapshots_before(const std::vector<Snapshot>& s, double r) {
  std::size_t c = 0;
  for (const Snapshot& q : s) c += q.t < r ? 1 : 0;
  return c;
}

}  // namespace

PsiFunctionals functionals_psi(const std::vector<Snapshot>& snapshots, const std::vector<double>& R_values,
                               const BumpPair& b, int points_per_octave) {
  require_snapshots(snapshots, "functionals_psi");
  if (R_values.empty() || !std::is_sorted(R_values.begin(), R_values.end())) {
    throw InvalidArgument("functionals_psi: R values must be nonempty and increasing");
  }
  if (points_per_octave < 1) throw InvalidArgument("functionals_psi: points_per_octave must be >= 1");
  for (double R : R_values) {
    if (snapshots.back().t < R * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "functionals_psi: R = " << R << " exceeds the covered horizon " << snapshots.back().t;
      throw InvalidArgument(os.str());
    }
    if (snapshots_before(snapshots, R) < 8) {
      std::ostringstream os;
      os << "functionals_psi: fewer than 8 snapshots inside the time support [0, " << R << ")";
      throw InvalidArgument(os.str());
    }
  }
  // Smallest radius whose time support holds 8 snapshots.
  const double r_lo = snapshots[7].t * (1.0 + 1e-12);
  PsiFunctionals out;
  double W = 0.0;
  double r_prev = r_lo;
  double y_prev = psi_pair(snapshots, r_lo, b).second;
  for (double R : R_values) {
    if (R > r_prev) {
      const int pieces = std::max(1, static_cast<int>(std::ceil(points_per_octave * std::log2(R / r_prev))));
      const double lr0 = std::log(r_prev);
      const double dl = (std::log(R) - lr0) / pieces;
      for (int i = 1; i <= pieces; ++i) {
        const double r = i == pieces ? R : std::exp(lr0 + i * dl);
        const double y = psi_pair(snapshots, r, b).second;
        W += 0.5 * dl * (y_prev + y);
        y_prev = y;
      }
      r_prev = R;
    }
    const auto [X, Y] = psi_pair(snapshots, R, b);
    out.R_values.push_back(R);
    out.X.push_back(X);
    out.Y.push_back(Y);
    out.W.push_back(W);
    out.xw_margin.push_back(X > 0.0 ? (X - 2.0 / std::numbers::ln2 * W) / X : 0.0);
  }
  return out;
}

std::vector<GCutoffRow> g_cutoff_check(const std::function<double(double)>& g,
                                     const std::function<double(double)>& g_applied,
                                     const std::vector<double>& A_values, const std::vector<double>& R_values) {
  constexpr int shape_samples = 2000;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= shape_samples; ++i) {
    const double s = 2.0 * i / shape_samples;
    const double v = g(s);
    if (!std::isfinite(v)) throw InvalidArgument("g_cutoff_check: g is not finite");
    if ((s < 0.5 || s >= 1.0) && v != 0.0) {
      throw InvalidArgument("g_cutoff_check: g must vanish on [0, 1/2) and [1, inf)");
    }
    if (s > 0.5 && s < 1.0) {
      if (v > prev + 1e-12) throw InvalidArgument("g_cutoff_check: g must be decreasing on (1/2, 1)");
      prev = v;
    }
  }
  std::vector<GCutoffRow> rows;
  for (double A : A_values) {
    for (double R : R_values) {
      if (!(A > 0.0) || !(R > 0.0)) throw InvalidArgument("g_cutoff_check: A and R must be positive");
      GCutoffRow row;
      row.A = A;
      row.R = R;
      // r = e^u; the integrand lives on r in (sqrt(A), sqrt(2A)).
      const double lo = 0.5 * std::log(A);
      const double hi = std::min(0.5 * std::log(2.0 * A), std::log(R));
      if (hi > lo) {
        constexpr int panels = 400;
        const double du = (hi - lo) / panels;
        for (int i = 0; i < panels; ++i) {
          row.lhs += gauss5([&](double u) { return g(A * std::exp(-2.0 * u)); }, lo + i * du, lo + (i + 1) * du);
        }
      }
      row.rhs_literal = 0.5 * std::numbers::ln2 * g(A / (R * R));
      row.rhs_applied = 0.5 * std::numbers::ln2 * g_applied(A / (R * R));
      row.literal_holds = row.lhs <= row.rhs_literal * (1.0 + 1e-9) + 1e-14;
      row.applied_holds = row.lhs <= row.rhs_applied * (1.0 + 1e-9) + 1e-14;
      rows.push_back(row);
    }
  }
  return rows;
}

double subcritical_exponent(double p, int n) {
  if (!(p > 1.0)) throw InvalidArgument("subcritical_exponent: p must be > 1");
  const double Q = 2.0 * n + 2.0;
  return Q - (Q + 2.0) / p;
}

SubcriticalCheck subcritical_inequality_check(const std::vector<Snapshot>& snapshots, double epsilon,
                                              const BumpPair& b, const std::vector<double>& R_values) {
  require_snapshots(snapshots, "subcritical_inequality_check");
  if (R_values.empty()) throw InvalidArgument("subcritical_inequality_check: no R values");
  SubcriticalCheck out;
  const int n = snapshots.front().field.grid.n;
  out.exponent = subcritical_exponent(b.p(), n);
  for (double R : R_values) {
    const PhiFunctionals f = functionals_phi(snapshots, epsilon, R, b);
    if (!(f.J > 0.0)) {
      std::ostringstream os;
      os << "subcritical_inequality_check: J_R = " << f.J << " at R = " << R
         << " is not positive; the datum violates the positivity hypothesis";
      throw Error(ErrorKind::check_failed, os.str());
    }
    out.R_values.push_back(R);
    out.I.push_back(f.I);
    out.J.push_back(f.J);
    const double denom = std::pow(R, out.exponent) * std::pow(f.I, 1.0 / b.p());
    out.C_fit.push_back(denom > 0.0 ? (f.I + epsilon * f.J) / denom : std::numeric_limits<double>::infinity());
  }
  out.spread = spread_of(out.C_fit);
  out.pass = out.spread < 4.0;
  return out;
}

std::vector<double> geometric_snapshot_times(double t_min, double t_end, int per_octave) {
  if (!(t_min > 0.0) || !(t_end > t_min) || per_octave < 1) {
    throw InvalidArgument("geometric_snapshot_times: need 0 < t_min < t_end and per_octave >= 1");
  }
  std::vector<double> t{0.0};
  const double g = std::pow(2.0, 1.0 / per_octave);
  for (double s = t_min; s <= t_end * (1.0 + 1e-12); s *= g) t.push_back(s);
  return t;
}

}  // namespace heis
