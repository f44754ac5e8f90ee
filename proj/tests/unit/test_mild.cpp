#include <doctest.h>

#include <cmath>
#include <random>

#include "heislab/error.hpp"
#include "heislab/heat.hpp"
#include "heislab/mild.hpp"
#include "heislab/solver.hpp"

using namespace heis;

namespace {

const GridSpec small{1, 2.0, 4.0, 13, 13};

ScalarField bump(const GridSpec& g) {
  InitialDatum d;
  d.radius = 1.0;
  return initial_datum(d, g);
}

SpaceTimeField random_space_time(const GridSpec& g, const std::vector<double>& times, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  SpaceTimeField u;
  u.times = times;
  for (std::size_t j = 0; j < times.size(); ++j) {
    ScalarField s(g);
    for (double& v : s.values) v = d(rng);
    u.slices.push_back(std::move(s));
  }
  return u;
}

// Applies the slice propagator P = e^{D Delta_H} (as Euler steps of size dt) k times.
ScalarField power(const ScalarField& f, int k, double D, double dt) {
  ScalarField out = f;
  for (int i = 0; i < k; ++i) out = propagate_linear(out, D, dt);
  return out;
}

// Direct trapezoid double sum: Phi_j = eps P^j u0 + D (P^j f_0 / 2 + sum_{0<i<j} P^{j-i} f_i + f_j / 2).
SpaceTimeField direct_phi(const SpaceTimeField& u, const ScalarField& u0, double eps, double p, double dt) {
  const double D = u.times[1] - u.times[0];
  const std::size_t m = u.size();
  std::vector<ScalarField> f;
  for (const ScalarField& s : u.slices) {
    ScalarField fi(s.grid);
    for (std::size_t i = 0; i < s.size(); ++i) fi[i] = std::pow(std::abs(s[i]), p);
    f.push_back(std::move(fi));
  }
  SpaceTimeField out;
  out.times = u.times;
  for (std::size_t j = 0; j < m; ++j) {
    ScalarField acc = power(u0, static_cast<int>(j), D, dt);
    for (double& v : acc.values) v *= eps;
    if (j > 0) {
      for (std::size_t i = 0; i <= j; ++i) {
        const double w = (i == 0 || i == j) ? 0.5 * D : D;
        acc = linear_combination(1.0, acc, w, power(f[i], static_cast<int>(j - i), D, dt));
      }
    }
    out.slices.push_back(std::move(acc));
  }
  return out;
}

double max_rel_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
  double m = 0.0, s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t i = 0; i < a.slices[j].size(); ++i) {
      m = std::max(m, std::abs(a.slices[j][i] - b.slices[j][i]));
      s = std::max(s, std::abs(b.slices[j][i]));
    }
  }
  return m / std::max(s, 1e-300);
}

}  // namespace

TEST_CASE("norm parameters and time grids") {
  const WeightedNormParams w = WeightedNormParams::make(2.0, 3.0, 1.25, 1);
  CHECK(w.kappa == 2.0);
  CHECK(w.T == 3.0);
  CHECK(w.theta == doctest::Approx(0.5));
  CHECK(WeightedNormParams::make(2.0, 1.0, 1.5, 1).theta == doctest::Approx(1.0));
  CHECK(uniform_times(1.0, 4) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(uniform_times(1.0, 0), InvalidArgument);
}

TEST_CASE("space-time field validation") {
  SpaceTimeField u = random_space_time(small, {0.0, 0.5, 1.0}, 1);
  CHECK_NOTHROW(u.validate());
  SpaceTimeField bad = u;
  bad.times = {0.0, 1.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = u;
  bad.slices.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = u;
  bad.slices[1] = ScalarField(GridSpec{1, 2.0, 4.0, 9, 9});
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("norm_X") {
  const std::vector<double> ts{0.0, 0.5, 1.0, 1.5};
  SpaceTimeField u;
  u.times = ts;
  for (double t : ts) u.slices.emplace_back(small, t);  // slice j is the constant t
  WeightedNormParams w;
  w.kappa = 0.0;
  w.T = 1.0;
  CHECK(norm_X(u, w) == 1.0);  // slices beyond T are ignored
  w.T = 2.0;
  CHECK(norm_X(u, w) == 1.5);
  w.kappa = 2.0;
  // the constant 1.5 at t = 1.5, weight largest at the box corner
  double best = 0.0;
  for (std::size_t j = 0; j < ts.size(); ++j) best = std::max(best, weighted_sup_norm(u.slices[j], ts[j], 2.0));
  CHECK(norm_X(u, w) == best);
  const SpaceTimeField r = random_space_time(small, ts, 2);
  for (double lambda : {-3.0, 0.5, 7.0}) {
    CHECK(norm_X(combine(lambda, r, 0.0, r), w) == doctest::Approx(std::abs(lambda) * norm_X(r, w)));
  }
  CHECK(norm_X(combine(1.0, r, 1.0, u), w) <= norm_X(r, w) + norm_X(u, w) + 1e-12);
}

TEST_CASE("inner timestep") {
  const double dt0 = stability_timestep(small, 0.4).suggested_dt;
  for (double D : {0.01, 0.125, 1.0 / 3.0}) {
    const double dt = inner_timestep(small, D);
    CHECK(dt <= dt0 * (1 + 1e-12));
    const double k = D / dt;
    CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
    CHECK(D / (std::round(k) - 1) > dt0);  // the largest such step
  }
  CHECK_THROWS_AS(inner_timestep(small, 0.0), InvalidArgument);
}

TEST_CASE("Duhamel recursion equals the direct double sum") {
  const std::vector<double> ts = uniform_times(0.2, 5);
  const double dt = inner_timestep(small, ts[1]);
  const ScalarField u0 = bump(small);
  for (double p : {1.25, 2.0, 3.0}) {
    const SpaceTimeField u = random_space_time(small, ts, 7);
    const SpaceTimeField fast = phi_operator(u, u0, 0.3, p, dt);
    const SpaceTimeField slow = direct_phi(u, u0, 0.3, p, dt);
    CHECK(max_rel_diff(fast, slow) <= 1e-12);
  }
}

TEST_CASE("Phi of zero is the scaled linear evolution") {
  const std::vector<double> ts = uniform_times(0.3, 3);
  const double dt = inner_timestep(small, ts[1]);
  const ScalarField u0 = bump(small);
  SpaceTimeField zero;
  zero.times = ts;
  zero.slices.assign(ts.size(), ScalarField(small));
  const SpaceTimeField phi = phi_operator(zero, u0, 0.7, 2.0, dt);
  CHECK(phi.slices[0].values == linear_combination(0.7, u0, 0.0, u0).values);
  for (std::size_t j = 1; j < ts.size(); ++j) {
    ScalarField lin = propagate_linear(u0, ts[j], dt);
    for (double& v : lin.values) v *= 0.7;
    for (std::size_t i = 0; i < lin.size(); ++i) CHECK(phi.slices[j][i] == doctest::Approx(lin[i]).scale(1.0).epsilon(1e-12));
  }
  // epsilon = 0 leaves only the source term, which vanishes on zero.
  const SpaceTimeField none = phi_operator(zero, u0, 0.0, 2.0, dt);
  for (const ScalarField& s : none.slices) CHECK(sup_norm(s) == 0.0);
}

TEST_CASE("property: Phi is monotone on nonnegative data") {
  const std::vector<double> ts = uniform_times(0.2, 4);
  const double dt = inner_timestep(small, ts[1]);
  const ScalarField u0 = bump(small);
  const SpaceTimeField a = random_ball_element(small, ts, 2.0, 0.5, 3);
  const SpaceTimeField b = combine(1.0, a, 1.0, random_ball_element(small, ts, 2.0, 0.5, 4));
  const SpaceTimeField pa = phi_operator(a, u0, 0.0, 2.0, dt);
  const SpaceTimeField pb = phi_operator(b, u0, 0.0, 2.0, dt);
  WeightedNormParams w;
  w.kappa = 2.0;
  w.T = ts.back();
  CHECK(norm_X(pb, w) >= norm_X(pa, w));
  // At t = 0 no source has acted yet.
  CHECK(sup_norm(pa.slices[0]) == 0.0);
  CHECK(sup_norm(pa.slices.back()) > 0.0);
}

TEST_CASE("phi_operator rejects bad inputs") {
  const std::vector<double> ts = uniform_times(0.2, 4);
  const double dt = inner_timestep(small, ts[1]);
  const SpaceTimeField u = random_space_time(small, ts, 5);
  const ScalarField u0 = bump(small);
  CHECK_THROWS_AS(phi_operator(u, u0, 1.0, 1.0, dt), InvalidArgument);
  CHECK_THROWS_AS(phi_operator(u, u0, 1.0, 2.0, 0.7 * dt), InvalidArgument);
  CHECK_THROWS_AS(phi_operator(u, ScalarField(GridSpec{1, 2.0, 4.0, 9, 9}), 1.0, 2.0, dt), InvalidArgument);
  SpaceTimeField shifted = u;
  for (double& t : shifted.times) t += 0.1;
  CHECK_THROWS_AS(phi_operator(shifted, u0, 1.0, 2.0, dt), InvalidArgument);
  SpaceTimeField uneven = u;
  uneven.times[2] += 0.01;
  CHECK_THROWS_AS(phi_operator(uneven, u0, 1.0, 2.0, dt), InvalidArgument);
}

TEST_CASE("random ball elements") {
  const std::vector<double> ts = uniform_times(1.0, 4);
  const SpaceTimeField a = random_ball_element(small, ts, 2.0, 0.3, 9);
  const SpaceTimeField b = random_ball_element(small, ts, 2.0, 0.3, 9);
  WeightedNormParams w;
  w.kappa = 2.0;
  w.T = 1.0;
  CHECK(norm_X(a, w) <= 0.3 * (1 + 1e-12));
  CHECK(norm_X(a, w) > 0.3 * 0.2 * 0.5);
  CHECK(a.slices.back().values == b.slices.back().values);
  for (const ScalarField& s : a.slices) CHECK(min_value(s) > 0.0);
  CHECK_THROWS_AS(random_ball_element(small, ts, 2.0, 0.0, 1), InvalidArgument);
}

TEST_CASE("contraction probe and Picard iteration for small data") {
  const std::vector<double> ts = uniform_times(0.5, 4);
  const double dt = inner_timestep(small, ts[1]);
  const ScalarField u0 = bump(small);
  const double eps = 0.05, p = 2.0, kappa = 2.0;
  const SpaceTimeField a = random_ball_element(small, ts, kappa, 2 * eps, 11);
  const SpaceTimeField b = random_ball_element(small, ts, kappa, 2 * eps, 12);
  const double ratio = contraction_probe(a, b, u0, eps, p, kappa, dt);
  CHECK(ratio > 0.0);
  CHECK(ratio < 0.5);
  CHECK_THROWS_AS(contraction_probe(a, a, u0, eps, p, kappa, dt), InvalidArgument);

  const PicardResult r = picard_solve(u0, eps, p, kappa, ts, 30, dt, 1e-13);
  CHECK(r.converged);
  CHECK(r.contractive);
  for (std::size_t k = 1; k < r.residuals.size(); ++k) {
    if (r.residuals[k - 1] > 1e-14 * r.ball_norms[k - 1]) CHECK(r.residuals[k] < r.residuals[k - 1]);
  }
  // The fixed point satisfies u = Phi[u].
  const SpaceTimeField again = phi_operator(r.solution, u0, eps, p, dt);
  WeightedNormParams w;
  w.kappa = kappa;
  w.T = ts.back();
  CHECK(norm_X(combine(1.0, again, -1.0, r.solution), w) <= 1e-12 * norm_X(r.solution, w));
  // and stays in the ball of radius 2 eps ||u0||
  CHECK(norm_X(r.solution, w) <= 2 * eps * weighted_sup_norm(u0, 0.0, kappa));

  const PicardResult z = picard_solve(u0, 0.0, p, kappa, ts, 5, dt);
  CHECK(z.converged);
  for (const ScalarField& s : z.solution.slices) CHECK(sup_norm(s) == 0.0);
  CHECK_THROWS_AS(picard_solve(u0, eps, p, kappa, ts, 0, dt), InvalidArgument);
}

TEST_CASE("central sample") {
  const GridSpec g{1, 4.0, 16.0, 9, 9};
  CHECK(in_central_sample(g, g.origin_index()));
  CHECK_FALSE(in_central_sample(g, 0));
  // tau = 4 = L_tau / 4 is included, tau = 8 is not.
  CHECK(in_central_sample(g, g.origin_index() + 1));
  CHECK_FALSE(in_central_sample(g, g.origin_index() + 2));
}

TEST_CASE("linear decay and Duhamel reports are internally consistent") {
  const GridSpec g{1, 4.0, 16.0, 33, 33};
  const DecayReport d = check_linear_decay(2.0, g, {0.1, 0.2});
  REQUIRE(d.max_ratios.size() == 2u);
  const double hi = std::max(d.max_ratios[0], d.max_ratios[1]), lo = std::min(d.max_ratios[0], d.max_ratios[1]);
  CHECK(d.max_ratio == hi);
  CHECK(d.spread == doctest::Approx(hi / lo));
  CHECK(d.pass == (std::isfinite(hi) && d.spread < 2.0));
  const DuhamelReport r = check_duhamel_bound(3.0, g, {0.5, 1.0}, 8);
  CHECK(r.endpoint);
  CHECK_FALSE(check_duhamel_bound(2.0, g, {0.5}, 8).endpoint);
  REQUIRE(r.max_ratios.size() == 2u);
  // t log(e + t) >= t, so the corrected ratios are the smaller ones.
  for (std::size_t i = 0; i < 2; ++i) CHECK(r.max_ratios_log[i] <= r.max_ratios[i]);
  CHECK_THROWS_AS(check_duhamel_bound(3.0, g, {0.3}, 8), InvalidArgument);
}
