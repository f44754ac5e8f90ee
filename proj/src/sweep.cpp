#include "heislab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "heislab/certificates.hpp"
#include "heislab/error.hpp"

namespace heis {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "?";
}

Regime classify_regime(double p, double Q) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("classify_regime: p must exceed 1");
  if (!(Q > 0.0)) throw InvalidArgument("classify_regime: Q must be positive");
  const double pF = 1.0 + 2.0 / Q;
  if (std::abs(p - pF) <= 1e-12) return Regime::critical;
  return p < pF ? Regime::subcritical : Regime::supercritical;
}

double theory_slope(double p, double Q) {
  if (classify_regime(p, Q) != Regime::subcritical) {
    throw InvalidArgument("theory_slope: the power law applies only for p < 1 + 2/Q");
  }
  return -1.0 / (1.0 / (p - 1.0) - Q / 2.0);
}

GridSpec GridPolicy::operator()(double expected_T) const {
  if (!(expected_T > 0.0) || !std::isfinite(expected_T)) {
    throw InvalidArgument("grid_policy: expected_T must be positive and finite");
  }
  if (N < 65 || N % 2 == 0) throw InvalidArgument("grid_policy: N must be odd and >= 65 (h_xy <= L_xy/32)");
  if (!(box_factor >= 4.0)) throw InvalidArgument("grid_policy: box_factor must be >= 4");
  const double L = std::max(min_L_xy, box_factor * std::sqrt(expected_T));
  GridSpec g{n, L, L * L, N, N};
  g.validate();
  const double bytes = 8.0 * static_cast<double>(g.size()) * fields_per_run;
  if (bytes > memory_cap_bytes) {
    // Largest odd N with N^{2n+1} * 8 * fields within the cap.
    const double per_axis = std::pow(memory_cap_bytes / (8.0 * fields_per_run), 1.0 / (2 * n + 1));
    int fit = static_cast<int>(std::floor(per_axis));
    if (fit % 2 == 0) --fit;
    std::ostringstream os;
    os << "grid_policy: " << N << " nodes per axis needs " << bytes / (1 << 20) << " MiB, above the cap of "
       << memory_cap_bytes / (1 << 20) << " MiB; use N <= " << fit;
    throw InvalidArgument(os.str());
  }
  return g;
}

GridSpec grid_policy(double expected_T, const GridPolicy& policy) { return policy(expected_T); }

void SweepConfig::validate() const {
  if (epsilons.size() < 3) throw InvalidArgument("sweep: need at least 3 epsilons");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i])) throw InvalidArgument("sweep: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidArgument("sweep: epsilons must strictly decrease");
  }
  classify_regime(p, 2.0 * policy.n + 2.0);
  if (worker_count < 1) throw InvalidArgument("sweep: worker_count must be >= 1");
  if (!(initial_expected_T > 0.0)) throw InvalidArgument("sweep: initial_expected_T must be positive");
  if (!(horizon_factor > 1.0)) throw InvalidArgument("sweep: horizon_factor must exceed 1");
  if (max_retries < 0) throw InvalidArgument("sweep: max_retries must be >= 0");
  if (snapshots_per_octave < 0) throw InvalidArgument("sweep: snapshots_per_octave must be >= 0");
  if (base.grid.n != policy.n) throw InvalidArgument("sweep: base grid and policy disagree on n");
}

std::vector<double> geometric_ladder(double eps0, double ratio, int count) {
  if (!(eps0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
    throw InvalidArgument("geometric_ladder: need eps0 > 0, 0 < ratio < 1, count >= 1");
  }
  std::vector<double> e(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) e[k] = eps0 * std::pow(ratio, k);
  return e;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("least_squares: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) f.residuals.push_back(y[i] - (f.intercept + f.slope * x[i]));
  return f;
}

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// P(R = r) for the number of runs with n1 and n2 symbols.
double runs_probability(int r, int n1, int n2) {
  const double total = binom(n1 + n2, n1);
  if (r % 2 == 0) {
    const int k = r / 2;
    return 2.0 * binom(n1 - 1, k - 1) * binom(n2 - 1, k - 1) / total;
  }
  const int k = (r - 1) / 2;
  return (binom(n1 - 1, k - 1) * binom(n2 - 1, k) + binom(n1 - 1, k) * binom(n2 - 1, k - 1)) / total;
}

}  // namespace

double runs_test_p_value(const std::vector<double>& residuals) {
  std::vector<int> s;
  for (double r : residuals) {
    if (r > 0.0) s.push_back(1);
    else if (r < 0.0) s.push_back(0);
  }
  const int n1 = static_cast<int>(std::count(s.begin(), s.end(), 1));
  const int n2 = static_cast<int>(s.size()) - n1;
  if (n1 == 0 || n2 == 0) return 1.0;
  int runs = 1;
  for (std::size_t i = 1; i < s.size(); ++i) runs += s[i] != s[i - 1] ? 1 : 0;
  double p = 0.0;
  for (int r = 2; r <= runs; ++r) p += runs_probability(r, n1, n2);
  return std::min(1.0, p);
}

namespace {

SweepRun execute(const SweepConfig& cfg, std::size_t index, double expected_T, Regime regime) {
  SweepRun out;
  out.epsilon = cfg.epsilons[index];
  double T = expected_T;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    SolverConfig sc = cfg.base;
    sc.p = cfg.p;
    sc.epsilon = out.epsilon;
    sc.grid = cfg.policy(T);
    sc.t_max = regime == Regime::supercritical ? cfg.base.t_max : std::min(cfg.base.t_max, cfg.horizon_factor * T);
    sc.snapshot_times.clear();
    if (cfg.snapshots_per_octave > 0) {
      sc.snapshot_times = geometric_snapshot_times(sc.t_max / 1024.0, sc.t_max, cfg.snapshots_per_octave);
      while (sc.snapshot_times.back() > sc.t_max) sc.snapshot_times.pop_back();
    }
    TrajectoryRecord rec = run(sc);
    out.expected_T = T;
    out.grid = sc.grid;
    out.termination = rec.termination;
    out.lifespan = rec.lifespan_estimate;
    out.contaminated = rec.boundary_contaminated;
    out.sup_decreasing = rec.sup_norms.back() < rec.sup_norms.front();
    out.steps = rec.steps;
    out.attempts = attempt + 1;
    if (!out.contaminated || attempt == cfg.max_retries) {
      if (cfg.on_run) cfg.on_run(index, out, rec);
      return out;
    }
    T *= 4.0;
  }
  return out;
}

bool usable(const SweepRun& r) { return r.termination == Termination::blowup && r.lifespan && !r.contaminated; }

// Runs `indices` on up to `workers` threads; expected[i] must already be set.
void execute_parallel(const SweepConfig& cfg, const std::vector<std::size_t>& indices,
                      const std::vector<double>& expected, Regime regime, std::vector<SweepRun>& runs) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t q = next++; q < indices.size(); q = next++) {
      try {
        const std::size_t i = indices[q];
        runs[i] = execute(cfg, i, expected[i], regime);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(cfg.worker_count, static_cast<int>(indices.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const double Q = 2.0 * cfg.policy.n + 2.0;
  SweepResult res;
  res.p = cfg.p;
  res.regime = classify_regime(cfg.p, Q);
  res.theory_slope = res.regime == Regime::subcritical ? theory_slope(cfg.p, Q)
                                                       : std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = cfg.epsilons.size();
  res.runs.assign(m, SweepRun{});
  std::vector<double> expected(m, cfg.initial_expected_T);

  if (res.regime == Regime::supercritical) {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    std::fill(expected.begin(), expected.end(), cfg.base.t_max);
    execute_parallel(cfg, all, expected, res.regime, res.runs);
  } else {
    res.runs[0] = execute(cfg, 0, expected[0], res.regime);
    const double T0 = res.runs[0].lifespan.value_or(res.runs[0].expected_T);
    if (res.regime == Regime::subcritical) {
      std::vector<std::size_t> rest;
      for (std::size_t i = 1; i < m; ++i) {
        expected[i] = T0 * std::pow(cfg.epsilons[i] / cfg.epsilons[0], res.theory_slope);
        rest.push_back(i);
      }
      execute_parallel(cfg, rest, expected, res.regime, res.runs);
    } else {
      const double e = cfg.p - 1.0;
      for (std::size_t i = 1; i < m; ++i) {
        const SweepRun& a = res.runs[i - 1];
        const double Ta = a.lifespan.value_or(a.expected_T);
        double proj = Ta * std::pow(cfg.epsilons[i - 1] / cfg.epsilons[i], 1.0 / e);
        if (i >= 2 && usable(res.runs[i - 2]) && usable(a)) {
          const SweepRun& b = res.runs[i - 2];
          const double xa = std::pow(a.epsilon, -e);
          const double xb = std::pow(b.epsilon, -e);
          const double slope = (std::log(*a.lifespan) - std::log(*b.lifespan)) / (xa - xb);
          const double xi = std::pow(cfg.epsilons[i], -e);
          proj = 1.5 * std::exp(std::log(*a.lifespan) + std::max(slope, 0.0) * (xi - xa));
        }
        expected[i] = std::max(proj, Ta);
        res.runs[i] = execute(cfg, i, expected[i], res.regime);
      }
    }
  }

  for (const SweepRun& r : res.runs) res.any_contaminated = res.any_contaminated || r.contaminated;

  if (res.regime == Regime::supercritical) {
    // Blow-ups must occupy a prefix of the ladder; the remainder reaches the horizon decaying.
    std::size_t split = 0;
    while (split < m && res.runs[split].termination == Termination::blowup) ++split;
    bool ok = split < m;
    for (std::size_t i = split; i < m; ++i) {
      ok = ok && res.runs[i].termination == Termination::horizon && res.runs[i].sup_decreasing;
    }
    if (split < m) res.threshold_epsilon = res.runs[split].epsilon;
    res.threshold_ok = ok;
    res.pass = ok;
    res.fitted_slope = res.fitted_intercept = res.r_squared = std::numeric_limits<double>::quiet_NaN();
    return res;
  }

  std::vector<double> x, y, le;
  std::ostringstream detail;
  bool mixed = false;
  for (const SweepRun& r : res.runs) {
    if (r.termination != Termination::blowup) mixed = true;
    detail << " eps=" << r.epsilon << ":" << to_string(r.termination) << (r.contaminated ? "(contaminated)" : "");
    if (!usable(r)) continue;
    y.push_back(std::log(*r.lifespan));
    le.push_back(std::log(r.epsilon));
    x.push_back(res.regime == Regime::subcritical ? std::log(r.epsilon) : std::pow(r.epsilon, -(cfg.p - 1.0)));
  }
  if (mixed && res.regime == Regime::subcritical) warn("sweep: mixed terminations in a subcritical sweep:" + detail.str());
  res.used_runs = x.size();
  if (x.size() < 3) {
    throw NumericalError("sweep: fewer than 3 usable blow-up runs;" + detail.str());
  }
  const LinearFit fit = least_squares(x, y);
  res.fitted_slope = fit.slope;
  res.fitted_intercept = fit.intercept;
  res.r_squared = fit.r_squared;
  res.runs_test_p = runs_test_p_value(fit.residuals);
  for (std::size_t i = 1; i < y.size(); ++i) res.loglog_slopes.push_back((y[i] - y[i - 1]) / (le[i] - le[i - 1]));
  res.superpolynomial = res.loglog_slopes.size() >= 2;
  for (std::size_t i = 1; i < res.loglog_slopes.size(); ++i) {
    res.superpolynomial = res.superpolynomial && std::abs(res.loglog_slopes[i]) > std::abs(res.loglog_slopes[i - 1]);
  }
  if (res.regime == Regime::subcritical) {
    res.pass = std::abs(fit.slope - res.theory_slope) <= 0.2 * std::abs(res.theory_slope) && fit.r_squared >= 0.95 &&
               !res.any_contaminated;
  } else {
    res.pass = fit.slope > 0.0 && fit.r_squared >= 0.9;
  }
  return res;
}

}  // namespace heis
