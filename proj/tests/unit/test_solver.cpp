#include <doctest.h>

#include <cmath>

#include "heislab/error.hpp"
#include "heislab/solver.hpp"

using namespace heis;

namespace {

SolverConfig ode_config(double p, double eps) {
  SolverConfig c;
  c.p = p;
  c.epsilon = eps;
  c.grid = GridSpec{1, 1.0, 1.0, 9, 9};
  c.boundary = Boundary::periodic;
  c.u0.kind = InitialKind::constant;
  c.blowup_threshold = 1e12;
  c.t_max = 1e3;
  return c;
}

SolverConfig bump_config(double eps) {
  SolverConfig c;
  c.p = 2.0;
  c.epsilon = eps;
  c.grid = GridSpec{1, 3.0, 9.0, 25, 25};
  c.u0.kind = InitialKind::compact_bump;
  c.u0.radius = 1.0;
  c.blowup_threshold = 1e6;
  c.t_max = 20.0;
  return c;
}

}  // namespace

TEST_CASE("initial data") {
  const GridSpec g{1, 2.0, 4.0, 17, 17};
  InitialDatum d;
  const ScalarField bump = initial_datum(d, g);
  CHECK(bump[g.origin_index()] == doctest::Approx(1.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GroupPoint p = g.node(i);
    const double s = horizontal_norm2(p) + std::abs(p.tau);
    if (s >= d.radius) CHECK(bump[i] == 0.0);
    CHECK(bump[i] >= 0.0);
    CHECK(bump[i] <= 1.0);
  }
  // exp(1 - 1/(1 - q)), q = 2(r^4 + tau^2)/R^2: node (0.25, 0, 0) has q = 2/256.
  const std::size_t i1 = g.origin_index() + static_cast<std::size_t>(g.axis_stride(0));
  const double q = 2.0 * std::pow(0.25, 4);
  CHECK(bump[i1] == doctest::Approx(std::exp(1.0 - 1.0 / (1.0 - q))));

  d.kind = InitialKind::weighted_decay;
  d.kappa = 3.0;
  const ScalarField w = initial_datum(d, g);
  CHECK(w[g.origin_index()] == 1.0);
  // node (0, 0, 1): |eta|^2 = 1
  CHECK(w[g.origin_index() + 2] == doctest::Approx(std::pow(2.0, -1.5)));
  d.kind = InitialKind::constant;
  for (double v : initial_datum(d, g).values) CHECK(v == 1.0);

  InitialDatum big;
  big.radius = 20.0;
  CHECK_THROWS_WITH_AS(initial_datum(big, g), doctest::Contains("beyond the box"), InvalidArgument);
  InitialDatum neg;
  neg.kind = InitialKind::weighted_decay;
  neg.kappa = -1.0;
  CHECK_THROWS_AS(initial_datum(neg, g), InvalidArgument);
}

TEST_CASE("cell-averaged bump approaches the exact integral on a coarse grid") {
  InitialDatum d;
  d.radius = 1.0;
  const GridSpec fine{1, 2.0, 2.0, 161, 161};
  const double reference = integrate(initial_datum(d, fine));
  const GridSpec coarse{1, 2.0, 2.0, 17, 17};
  d.subsamples = 5;
  const double averaged = integrate(initial_datum(d, coarse));
  CHECK(averaged == doctest::Approx(reference).epsilon(0.01));
  d.subsamples = 0;
  CHECK_THROWS_AS(initial_datum(d, coarse), InvalidArgument);
}

TEST_CASE("datum names") {
  for (InitialKind k : {InitialKind::compact_bump, InitialKind::weighted_decay, InitialKind::constant}) {
    CHECK(initial_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(initial_kind_from_string("gaussian"), InvalidArgument);
  CHECK(std::string(to_string(Termination::blowup)) == "blowup");
}

TEST_CASE("step") {
  const GridSpec g{1, 1.0, 1.0, 9, 9};
  const ScalarField c(g, 2.0);
  const ScalarField s = step(c, 0.01, 2.0, Boundary::periodic);
  for (double v : s.values) CHECK(v == doctest::Approx(2.0 + 0.01 * 4.0).epsilon(1e-14));
  const ScalarField s3 = step(c, 0.01, 3.0, Boundary::periodic);
  for (double v : s3.values) CHECK(v == doctest::Approx(2.08).epsilon(1e-14));
  // The source is |u|^p, so negative states are pushed up as well.
  const ScalarField n = step(ScalarField(g, -2.0), 0.01, 2.0, Boundary::periodic);
  for (double v : n.values) CHECK(v == doctest::Approx(-1.96));
  CHECK(step(ScalarField(g, 1e200), 1.0, 2.0, Boundary::periodic).diverged);
  CHECK_THROWS_AS(step(c, 0.0, 2.0), InvalidArgument);
}

TEST_CASE("configuration validation") {
  SolverConfig c = ode_config(2.0, 1.0);
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto mutate, const char* word) {
    SolverConfig b = c;
    mutate(b);
    CHECK_THROWS_WITH_AS(b.validate(), doctest::Contains(word), InvalidArgument);
  };
  bad([](SolverConfig& b) { b.p = 1.0; }, "p");
  bad([](SolverConfig& b) { b.epsilon = 0.0; }, "epsilon");
  bad([](SolverConfig& b) { b.dt_safety = 2.0; }, "dt_safety");
  bad([](SolverConfig& b) { b.c_nl = -1.0; }, "c_nl");
  bad([](SolverConfig& b) { b.t_max = 0.0; }, "t_max");
  bad([](SolverConfig& b) { b.snapshot_times = {0.5, 0.1}; }, "snapshot");
  bad([](SolverConfig& b) { b.weighted_kappa = -1.0; }, "kappa");
  c.blowup_threshold = 50.0;
  CHECK_THROWS_WITH_AS(run(c), doctest::Contains("100 * epsilon"), InvalidArgument);
}

TEST_CASE("constant periodic data follow the discrete ODE recursion exactly") {
  const SolverConfig c = ode_config(2.0, 0.5);
  const TrajectoryRecord r = run(c);
  REQUIRE(r.termination == Termination::blowup);
  REQUIRE(r.times.size() > 10u);
  for (std::size_t i = 0; i + 1 < r.times.size(); ++i) {
    const double dt = r.times[i + 1] - r.times[i];
    // dt is recovered from a difference of absolute times, which costs a few ulps of t.
    const double s = r.sup_norms[i];
    const double slack = 1e-12 * r.sup_norms[i + 1] + 4e-16 * r.times[i + 1] * s * s;
    REQUIRE(std::abs(r.sup_norms[i + 1] - (s + dt * s * s)) <= slack);
    REQUIRE(r.min_values[i] == doctest::Approx(r.sup_norms[i]));
    REQUIRE(dt <= c.c_nl / s * (1 + 1e-9) + 4e-16 * r.times[i + 1]);
  }
  CHECK_FALSE(r.boundary_contaminated);
  CHECK(*r.threshold_time <= *r.lifespan_estimate + 1e-3);
}

TEST_CASE("ODE oracle: lifespan of constant data is eps^{1-p}/(p-1)") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double eps : {0.5, 1.0, 2.0}) {
      SolverConfig c = ode_config(p, eps);
      c.c_nl = 0.01;
      const double exact = std::pow(eps, 1.0 - p) / (p - 1.0);
      const TrajectoryRecord r = run(c);
      REQUIRE(r.lifespan_estimate.has_value());
      CHECK(*r.lifespan_estimate == doctest::Approx(exact).epsilon(0.005));
      // Halving both step controls roughly halves the first-order bias.
      SolverConfig h = c;
      h.c_nl = 0.005;
      h.dt_safety = 0.5 * c.dt_safety;
      const double e1 = std::abs(*r.lifespan_estimate - exact);
      const double e2 = std::abs(*run(h).lifespan_estimate - exact);
      CHECK(e2 < 0.6 * e1);
    }
  }
}

TEST_CASE("extrapolate_blowup_time") {
  // Exact profile s = ((p-1)(T-t))^{-1/(p-1)} recovers T.
  for (double p : {1.25, 2.0, 3.0}) {
    const double T = 3.7;
    std::vector<double> t, s;
    for (int i = 0; i < 10; ++i) {
      t.push_back(3.0 + 0.05 * i);
      s.push_back(std::pow((p - 1.0) * (T - t.back()), -1.0 / (p - 1.0)));
    }
    CHECK(extrapolate_blowup_time(t, s, p) == doctest::Approx(T).epsilon(1e-12));
  }
  CHECK_THROWS_AS(extrapolate_blowup_time({1.0}, {1.0}, 2.0), InvalidArgument);
  CHECK_THROWS_AS(extrapolate_blowup_time({1.0, 1.0}, {1.0, 2.0}, 2.0), NumericalError);
  CHECK_THROWS_AS(extrapolate_blowup_time({1.0, 2.0}, {2.0, 1.0}, 2.0), NumericalError);
}

TEST_CASE("richardson lifespan for the constant datum") {
  SolverConfig c = ode_config(2.0, 1.0);
  const RichardsonLifespan r = richardson_lifespan(c);
  CHECK(r.extrapolated == doctest::Approx(2 * r.fine - r.coarse));
  CHECK(std::abs(r.extrapolated - 1.0) <= std::abs(r.coarse - 1.0));
  CHECK(r.extrapolated == doctest::Approx(1.0).epsilon(0.01));
  c.p = 3.0;
  c.epsilon = 1e-3;
  c.t_max = 1.0;
  CHECK_THROWS_AS(richardson_lifespan(c), NumericalError);
}

TEST_CASE("property: the lifespan decreases with the amplitude") {
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {32.0, 64.0, 128.0, 256.0}) {
    const TrajectoryRecord r = run(bump_config(eps));
    REQUIRE(r.termination == Termination::blowup);
    CHECK(*r.lifespan_estimate < prev);
    prev = *r.lifespan_estimate;
  }
}

TEST_CASE("property: larger data stay above smaller data") {
  SolverConfig a = bump_config(1.0);
  a.t_max = 0.2;
  SolverConfig b = a;
  b.epsilon = 1.5;
  const TrajectoryRecord ra = run(a), rb = run(b);
  REQUIRE(ra.termination == Termination::horizon);
  // The mixed stencil is not a positive scheme, so comparison only holds away from its
  // tiny undershoot tail.
  const double floor = 1e-6 * sup_norm(ra.final_state);
  for (std::size_t i = 0; i < ra.final_state.size(); ++i) {
    if (ra.final_state[i] > floor) CHECK(rb.final_state[i] >= ra.final_state[i]);
  }
  CHECK(rb.sup_norms.back() > ra.sup_norms.back());
}

TEST_CASE("snapshots, weighted norms and horizon") {
  SolverConfig c = bump_config(0.5);
  c.t_max = 0.3;
  c.snapshot_times = {0.0, 0.1, 0.3};
  c.weighted_kappa = 2.0;
  const TrajectoryRecord r = run(c);
  CHECK(r.termination == Termination::horizon);
  CHECK(r.times.back() == 0.3);
  REQUIRE(r.snapshots.size() == 3u);
  CHECK(r.snapshots[0].t == 0.0);
  CHECK(r.snapshots[1].t == 0.1);
  CHECK(r.snapshots[2].field.values == r.final_state.values);
  CHECK(sup_norm(r.snapshots[0].field) == doctest::Approx(0.5));
  REQUIRE(r.weighted_norms.size() == r.times.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) CHECK(r.weighted_norms[i] >= r.sup_norms[i] * (1.0 - 1e-12));
  CHECK_FALSE(r.lifespan_estimate.has_value());
  CHECK(r.last_stable_time == 0.3);
}

TEST_CASE("run_from rejects a datum on another grid or a vanishing datum") {
  const SolverConfig c = bump_config(1.0);
  CHECK_THROWS_AS(run_from(c, ScalarField(GridSpec{1, 3.0, 9.0, 9, 9}, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(run_from(c, ScalarField(c.grid)), InvalidArgument);
}
