// Acceptance suite: runs the thirteen acceptance criteria at their stated tolerances and
// prints one PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.
//
//   heislab_acceptance [--only 1,7,12] [--workers N]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heislab/certificates.hpp"
#include "heislab/error.hpp"
#include "heislab/grid.hpp"
#include "heislab/group.hpp"
#include "heislab/heat.hpp"
#include "heislab/mild.hpp"
#include "heislab/solver.hpp"
#include "heislab/sublaplacian.hpp"
#include "heislab/sweep.hpp"

using namespace heis;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(f, v[i]);
  return s;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

int g_workers = 1;

// ---- shared kernels -------------------------------------------------------------------

// Spike-seeded kernels on the reference box [-4, 4]^2 x [-16, 16].
const GridSpec kKernelGrid{1, 4.0, 16.0, 65, 65};
const std::vector<double> kKernelTimes{0.05, 0.1, 0.2, 0.25, 0.4, 0.5, 0.8, 1.0};

std::vector<KernelSnapshot> reference_kernels(const GridSpec& grid, const std::vector<double>& times) {
  KernelOptions opt;
  opt.mollifier_width = 0.0;
  return heat_kernels(times, grid, opt);
}

const std::vector<KernelSnapshot>& kernels65() {
  static const std::vector<KernelSnapshot> ks = reference_kernels(kKernelGrid, kKernelTimes);
  return ks;
}

const KernelSnapshot& kernel_at(const std::vector<KernelSnapshot>& ks, double t) {
  for (const auto& k : ks) {
    if (k.t == t) return k;
  }
  throw std::logic_error("no kernel at t=" + std::to_string(t));
}

// ---- shared subcritical sweep (criteria 7 and 12) ------------------------------------

struct SubcriticalSweep {
  SweepResult result;
  std::map<std::size_t, double> xw_worst;  ///< run index -> worst X-W margin
  std::map<std::size_t, double> subcrit_spread;
  double seconds = 0.0;
};

const SubcriticalSweep& subcritical_sweep() {
  static const SubcriticalSweep s = [] {
    SubcriticalSweep out;
    SweepConfig c;
    c.p = 1.25;
    c.epsilons = geometric_ladder(1.0, std::sqrt(0.5), 6);
    c.base.u0.kind = InitialKind::compact_bump;
    c.base.u0.radius = 1.0;
    c.base.u0.subsamples = 5;
    c.base.t_max = 1e6;
    c.initial_expected_T = 60.0;
    c.snapshots_per_octave = 8;
    c.worker_count = g_workers;
    const auto bumps = make_bumps(c.p);
    std::mutex mu;
    c.on_run = [&](std::size_t i, const SweepRun&, const TrajectoryRecord& rec) {
      if (!rec.lifespan_estimate || rec.snapshots.size() < 9) return;
      const double tl = rec.snapshots.back().t;
      const PsiFunctionals psi = functionals_psi(rec.snapshots, {tl / 16.0, tl / 4.0, tl}, *bumps);
      const double worst = *std::min_element(psi.xw_margin.begin(), psi.xw_margin.end());
      const double r = std::sqrt(tl);
      const SubcriticalCheck sub = subcritical_inequality_check(rec.snapshots, 1.0, *bumps, {r / 4.0, r / 2.0, r});
      std::lock_guard<std::mutex> lock(mu);
      out.xw_worst[i] = worst;
      out.subcrit_spread[i] = sub.spread;
    };
    const auto t0 = Clock::now();
    out.result = run_sweep(c);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return s;
}

// ---- criteria -------------------------------------------------------------------------

Outcome c1_ode_oracle() {
  const auto t0 = Clock::now();
  std::vector<double> got;
  bool ok = true;
  for (double eps : {1.0, 0.5, 0.25}) {
    SolverConfig c;
    c.p = 2.0;
    c.epsilon = eps;
    c.boundary = Boundary::periodic;
    c.u0.kind = InitialKind::constant;
    c.grid = GridSpec{1, 1.0, 1.0, 9, 9};
    c.t_max = 100.0;
    c.blowup_threshold = 1e12;
    const double T = richardson_lifespan(c).extrapolated;
    got.push_back(T);
    ok = ok && std::abs(T - 1.0 / eps) <= 0.01 / eps;
  }
  const double s = seconds_since(t0);
  return {ok && s < 10.0, "T_h={" + join(got, "%.5f") + "} vs {1,2,4}, " + fmt("%.1f s", s)};
}

Outcome c2_mass() {
  const auto t0 = Clock::now();
  const auto& ks = kernels65();
  double worst = 0.0;
  std::vector<double> masses;
  for (double t : {0.05, 0.1, 0.25, 0.5}) {
    const double m = kernel_at(ks, t).mass;
    masses.push_back(m);
    worst = std::max(worst, std::abs(m - 1.0));
  }
  const double s = seconds_since(t0);
  return {worst <= 0.02 && s < 60.0, "mass={" + join(masses, "%.5f") + "} worst dev " + fmt("%.2e", worst) + ", " +
                                         fmt("%.1f s", s)};
}

Outcome c3_scaling() {
  const auto t0 = Clock::now();
  const auto& ks = kernels65();
  const double e65 = check_scaling_identity(kernel_at(ks, 0.25), kernel_at(ks, 1.0)).max_rel_error;
  const GridSpec g97{1, 4.0, 16.0, 97, 97};
  const auto k97 = reference_kernels(g97, {0.25, 1.0});
  const double e97 = check_scaling_identity(k97[0], k97[1]).max_rel_error;
  const double s = seconds_since(t0);
  const bool pass = e97 <= 0.05 && e97 < e65 && s < 300.0;
  return {pass, "max rel error 65^3 " + fmt("%.4g", e65) + ", 97^3 " + fmt("%.4g", e97) + " (limit 0.05), " +
                    fmt("%.1f s", s)};
}

Outcome c4_center_decay() {
  const auto t0 = Clock::now();
  const auto& ks = kernels65();
  std::vector<double> x, y;
  for (double t : {0.1, 0.2, 0.4, 0.8}) {
    x.push_back(std::log(t));
    y.push_back(std::log(kernel_at(ks, t).center_value));
  }
  const double slope = least_squares(x, y).slope;
  const double s = seconds_since(t0);
  return {std::abs(slope + 2.0) <= 0.15 && s < 120.0, "slope " + fmt("%.4f", slope) + " vs -2 +- 0.15, " +
                                                          fmt("%.1f s", s)};
}

Outcome c5_sandwich() {
  const auto& ks = kernels65();
  const KernelSnapshot& a = kernel_at(ks, 0.2);
  const KernelSnapshot& b = kernel_at(ks, 0.4);
  auto within = [](double u, double v) { return std::abs(u - v) <= 0.2 * std::max(u, v); };
  const bool pass = a.fit_ok && b.fit_ok && a.fitted_c > 0 && b.fitted_c > 0 && a.fitted_C > 0 && b.fitted_C > 0 &&
                    a.fitted_c <= a.fitted_C && b.fitted_c <= b.fitted_C && within(a.fitted_c, b.fitted_c) &&
                    within(a.fitted_C, b.fitted_C);
  return {pass, "t=0.2: c=" + fmt("%.4f", a.fitted_c) + " C=" + fmt("%.4f", a.fitted_C) + "; t=0.4: c=" +
                    fmt("%.4f", b.fitted_c) + " C=" + fmt("%.4f", b.fitted_C)};
}

Outcome c6_semigroup() {
  const auto t0 = Clock::now();
  const GridSpec g{1, 2.5, 4.0, 65, 65};
  const auto ks = reference_kernels(g, {0.1, 0.2});
  const SemigroupCheck sg = check_semigroup(ks[0].field, ks[0].field, ks[1].field);
  return {sg.max_rel_error <= 0.05, "central deviation " + fmt("%.4f", sg.max_rel_error) + " on " +
                                        std::to_string(sg.region_nodes) + " nodes, " + fmt("%.1f s", seconds_since(t0))};
}

Outcome c7_subcritical() {
  const SubcriticalSweep& s = subcritical_sweep();
  const SweepResult& r = s.result;
  std::vector<double> Th;
  for (const auto& run : r.runs) Th.push_back(run.lifespan.value_or(std::nan("")));
  const double rel = std::abs(r.fitted_slope - r.theory_slope) / std::abs(r.theory_slope);
  const bool pass = r.runs.size() == 6 && r.used_runs == 6 && rel <= 0.2 && r.r_squared >= 0.95 &&
                    !r.any_contaminated && s.seconds < 1800.0;
  return {pass, "slope " + fmt("%.4f", r.fitted_slope) + " vs " + fmt("%.2f", r.theory_slope) + ", r2 " +
                    fmt("%.5f", r.r_squared) + ", T_h={" + join(Th, "%.2f") + "}, contaminated=" +
                    (r.any_contaminated ? "yes" : "no") + ", runs-test p " + fmt("%.2f", r.runs_test_p) + ", " +
                    fmt("%.1f s", s.seconds)};
}

Outcome c8_critical() {
  const auto t0 = Clock::now();
  SweepConfig c;
  c.p = 1.5;
  c.epsilons = {256.0, 128.0, 64.0, 32.0};
  c.base.u0.kind = InitialKind::compact_bump;
  c.base.u0.radius = 1.0;
  c.base.u0.subsamples = 5;
  c.base.t_max = 1e6;
  // One box for every run, large enough for the slowest one, so the comparison across
  // epsilon is not distorted by resolution changes.
  c.policy.min_L_xy = 16.0;
  c.initial_expected_T = 1.0;
  c.worker_count = g_workers;
  const SweepResult r = run_sweep(c);
  std::vector<double> Th;
  bool capped = true;
  for (const auto& run : r.runs) {
    Th.push_back(run.lifespan.value_or(std::nan("")));
    capped = capped && run.lifespan && *run.lifespan <= 50.0;
  }
  const bool pass = r.used_runs == 4 && capped && r.fitted_slope > 0 && r.r_squared >= 0.9 && r.superpolynomial;
  return {pass, "T_h={" + join(Th, "%.3f") + "}, slope " + fmt("%.4g", r.fitted_slope) + ", r2 " +
                    fmt("%.4f", r.r_squared) + ", |loglog|={" + join(r.loglog_slopes, "%.3f") + "}, " +
                    fmt("%.1f s", seconds_since(t0))};
}

Outcome c9_supercritical() {
  const auto t0 = Clock::now();
  const double eps0 = 0.1;
  std::vector<double> ratios;
  bool horizon = true;
  int contaminated = 0;
  for (double eps : {eps0, eps0 / 2.0, eps0 / 4.0}) {
    SolverConfig c;
    c.p = 2.0;
    c.epsilon = eps;
    c.grid = GridSpec{1, 16.0, 256.0, 65, 65};
    c.u0.kind = InitialKind::weighted_decay;
    c.u0.kappa = 2.0;
    c.weighted_kappa = 2.0;
    c.t_max = 10.0;
    const TrajectoryRecord rec = run(c);
    horizon = horizon && rec.termination == Termination::horizon && rec.times.back() >= 10.0 - 1e-9;
    contaminated += rec.boundary_contaminated ? 1 : 0;
    ratios.push_back(*std::max_element(rec.weighted_norms.begin(), rec.weighted_norms.end()) / eps);
  }
  const double A = *std::max_element(ratios.begin(), ratios.end());
  const double sp = spread(ratios);
  return {horizon && sp <= 2.0, "norm/eps={" + join(ratios, "%.4f") + "}, A=" + fmt("%.4f", A) + ", spread " +
                                    fmt("%.3f", sp) + ", all horizon=" + (horizon ? "yes" : "no") +
                                    ", boundary-flagged runs " + std::to_string(contaminated) + ", " +
                                    fmt("%.1f s", seconds_since(t0))};
}

Outcome c10_contraction() {
  const auto t0 = Clock::now();
  const GridSpec g{1, 4.0, 16.0, 33, 33};
  const double eps = 0.1, p = 2.0, kappa = 2.0, T = 1.0;
  InitialDatum d;
  d.kind = InitialKind::weighted_decay;
  d.kappa = kappa;
  const ScalarField u0 = initial_datum(d, g);
  const auto times = uniform_times(T, 8);
  const double dt = inner_timestep(g, T / 8);
  std::mt19937_64 rng(20240917);
  double worst_probe = 0.0;
  for (int i = 0; i < 20; ++i) {
    const SpaceTimeField a = random_ball_element(g, times, kappa, 2.0 * eps, rng());
    const SpaceTimeField b = random_ball_element(g, times, kappa, 2.0 * eps, rng());
    worst_probe = std::max(worst_probe, contraction_probe(a, b, u0, eps, p, kappa, dt));
  }

  WeightedNormParams wp;
  wp.kappa = kappa;
  wp.T = T;
  double worst_ratio = 0.0;
  bool converged = true;
  std::vector<double> diffs;
  for (int m : {8, 16}) {
    const double safety = m == 8 ? 0.4 : 0.2;
    const auto ts = uniform_times(T, m);
    const PicardResult pr = picard_solve(u0, eps, p, kappa, ts, 30, inner_timestep(g, T / m, safety), 1e-13);
    converged = converged && pr.converged && pr.contractive;
    for (std::size_t k = 1; k < pr.residuals.size(); ++k) {
      if (pr.residuals[k - 1] > 1e3 * std::numeric_limits<double>::epsilon() * pr.ball_norms[k - 1]) {
        worst_ratio = std::max(worst_ratio, pr.lipschitz_estimates[k]);
      }
    }
    SolverConfig c;
    c.p = p;
    c.epsilon = eps;
    c.grid = g;
    c.u0 = d;
    c.t_max = T;
    c.dt_safety = safety;
    c.c_nl = m == 8 ? 0.1 : 0.05;
    c.snapshot_times = ts;
    const TrajectoryRecord rec = run(c);
    SpaceTimeField stepped;
    stepped.times = ts;
    for (const auto& sn : rec.snapshots) stepped.slices.push_back(sn.field);
    diffs.push_back(norm_X(combine(1.0, pr.solution, -1.0, stepped), wp));
  }
  const bool pass = worst_probe <= 0.6 && converged && worst_ratio <= 0.7 && diffs[1] <= 0.5 * diffs[0];
  return {pass, "worst probe " + fmt("%.4f", worst_probe) + ", worst Picard ratio " + fmt("%.4f", worst_ratio) +
                    ", |Picard - stepped| " + fmt("%.3e", diffs[0]) + " -> " + fmt("%.3e", diffs[1]) + ", " +
                    fmt("%.1f s", seconds_since(t0))};
}

Outcome c11_estimates() {
  const auto t0 = Clock::now();
  const GridSpec g{1, 16.0, 256.0, 65, 65};
  const std::vector<double> decay_times{0.2, 0.4, 0.8};
  const std::vector<double> duhamel_times{0.5, 2.0, 8.0};
  const DecayReport d6 = check_linear_decay(6.0, g, decay_times);
  const DecayReport d2 = check_linear_decay(2.0, g, decay_times);
  const DuhamelReport a2 = check_duhamel_bound(2.0, g, duhamel_times, 8);
  const DuhamelReport a3 = check_duhamel_bound(3.0, g, duhamel_times, 8);
  const bool pass = d6.pass && d2.pass && a2.pass && a3.pass && a3.endpoint && a3.uncorrected_grows;
  return {pass, "decay spreads k=6 " + fmt("%.3f", d6.spread) + ", k=2 " + fmt("%.3f", d2.spread) +
                    "; duhamel a=2 " + fmt("%.3f", a2.spread) + ", a=3 log-corrected " + fmt("%.3f", a3.spread) +
                    " uncorrected {" + join(a3.max_ratios, "%.3f") + "}, " + fmt("%.1f s", seconds_since(t0))};
}

Outcome c12_certificates() {
  const auto t0 = Clock::now();
  const auto bumps = make_bumps(1.25);
  const DerivativeFit df = derivative_bound_check(*bumps, {4.0, 8.0, 16.0});
  const double below = subcritical_exponent(1.5 - 1e-9, 1);
  const double at = subcritical_exponent(1.5, 1);
  const double above = subcritical_exponent(1.5 + 1e-9, 1);
  const bool flips = below < 0.0 && at == 0.0 && above > 0.0;

  const SubcriticalSweep& s = subcritical_sweep();
  std::size_t blowups = 0;
  for (const auto& run : s.result.runs) blowups += run.lifespan ? 1 : 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [i, m] : s.xw_worst) worst = std::min(worst, m);
  const bool margin_ok = blowups > 0 && s.xw_worst.size() == blowups && worst >= -0.02;
  double sub = 0.0;
  for (const auto& [i, v] : s.subcrit_spread) sub = std::max(sub, v);
  return {df.pass && flips && margin_ok, "derivative-quotient spread " + fmt("%.3f", df.spread) + ", X-W worst margin " +
                                       fmt("%.4f", worst) + " over " + std::to_string(s.xw_worst.size()) +
                                       " trajectories, exponent sign flip " + (flips ? "exact" : "wrong") +
                                       ", subcritical C_fit spread " + fmt("%.3f", sub) + ", " +
                                       fmt("%.1f s", seconds_since(t0))};
}

Outcome c13_operator() {
  const GridSpec g{1, 4.0, 16.0, 65, 65};
  using Image = std::function<double(double, double, double)>;
  struct Identity {
    std::function<double(double, double, double)> u;
    Image image;
  };
  const std::vector<Identity> ids{
      {[](double, double, double) { return 1.0; }, [](double, double, double) { return 0.0; }},
      {[](double x, double, double) { return x; }, [](double, double, double) { return 0.0; }},
      {[](double, double y, double) { return y; }, [](double, double, double) { return 0.0; }},
      {[](double, double, double t) { return t; }, [](double, double, double) { return 0.0; }},
      {[](double x, double, double) { return x * x; }, [](double, double, double) { return 2.0; }},
      {[](double, double y, double) { return y * y; }, [](double, double, double) { return 2.0; }},
      {[](double, double, double t) { return t * t; }, [](double x, double y, double) { return 8.0 * (x * x + y * y); }},
      {[](double x, double, double t) { return x * t; }, [](double, double y, double) { return 4.0 * y; }},
      {[](double, double y, double t) { return y * t; }, [](double x, double, double) { return -4.0 * x; }},
  };
  double worst = 0.0;
  for (const auto& id : ids) {
    const ScalarField u = sample_coords(g, [&](const double* c, double t) { return id.u(c[0], c[1], t); });
    const ScalarField L = apply_sublaplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!is_interior(g, i, 1)) continue;
      const GroupPoint p = g.node(i);
      worst = std::max(worst, std::abs(L[i] - id.image(p.x[0], p.y[0], p.tau)));
    }
  }

  // Gaussian refinement: Delta_H e^{-r^2 - tau^2} = (4r^2 - 4 + 4r^2(4tau^2 - 2)) e^{-r^2 - tau^2}.
  auto err_on = [](int N) {
    const GridSpec gg{1, 4.0, 4.0, N, N};
    const ScalarField u =
        sample_coords(gg, [](const double* c, double t) { return std::exp(-c[0] * c[0] - c[1] * c[1] - t * t); });
    const ScalarField L = apply_sublaplacian(u);
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!is_interior(gg, i, 1)) continue;
      const GroupPoint p = gg.node(i);
      const double r2 = p.x[0] * p.x[0] + p.y[0] * p.y[0];
      const double exact = (4.0 * r2 - 4.0 + 4.0 * r2 * (4.0 * p.tau * p.tau - 2.0)) * std::exp(-r2 - p.tau * p.tau);
      e = std::max(e, std::abs(L[i] - exact));
    }
    return e;
  };
  const double e1 = err_on(33), e2 = err_on(65);
  const double order = std::log2(e1 / e2);
  return {worst <= 1e-9 && order >= 1.9, "worst identity error " + fmt("%.2e", worst) + ", Gaussian errors " +
                                             fmt("%.3e", e1) + " -> " + fmt("%.3e", e2) + ", order " +
                                             fmt("%.3f", order)};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "ODE blow-up oracle", c1_ode_oracle},
    {2, "heat-kernel mass", c2_mass},
    {3, "kernel scaling identity", c3_scaling},
    {4, "center-value decay", c4_center_decay},
    {5, "Gaussian sandwich", c5_sandwich},
    {6, "semigroup law", c6_semigroup},
    {7, "subcritical lifespan scaling", c7_subcritical},
    {8, "critical functional form", c8_critical},
    {9, "supercritical global existence", c9_supercritical},
    {10, "contraction regime", c10_contraction},
    {11, "a priori estimate calibrations", c11_estimates},
    {12, "certificate suite", c12_certificates},
    {13, "discrete operator exactness", c13_operator},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heislab acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--workers", g_workers, "concurrent sweep runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  int failed = 0, ran = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
