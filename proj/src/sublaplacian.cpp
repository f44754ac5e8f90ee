#include "heislab/sublaplacian.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>
#include <vector>

#include "heislab/error.hpp"

namespace heis {

namespace {

// Neighbour access along a tau line with the ghost convention applied.
struct Line {
  const double* data = nullptr;
  int Nt = 0;
  bool periodic = false;

  double at(int k) const {
    if (data == nullptr) return 0.0;
    if (k < 0) return periodic ? data[k + Nt] : 0.0;
    if (k >= Nt) return periodic ? data[k - Nt] : 0.0;
    return data[k];
  }
};

struct LineContext {
  int axes = 0;
  double r2 = 0.0;
  double coef[2 * GridSpec::max_n];  // mixed-term coefficients per horizontal axis
  Line minus[2 * GridSpec::max_n];
  Line plus[2 * GridSpec::max_n];
  Line self;
};

void build_context(const GridSpec& g, const ScalarField& u, std::size_t hidx, Boundary b, LineContext& ctx) {
  const int n = g.n;
  const int Nt = g.N_tau;
  const bool periodic = b == Boundary::periodic;
  ctx.axes = 2 * n;
  int idx[2 * GridSpec::max_n];
  double xy[2 * GridSpec::max_n];
  g.horizontal_indices(hidx, idx);
  g.horizontal_coords(hidx, xy);
  ctx.r2 = 0.0;
  for (int a = 0; a < 2 * n; ++a) ctx.r2 += xy[a] * xy[a];
  for (int j = 0; j < n; ++j) {
    ctx.coef[j] = 4.0 * xy[n + j];   // 4 y_j d_xj d_tau
    ctx.coef[n + j] = -4.0 * xy[j];  // -4 x_j d_yj d_tau
  }
  const double* base = u.values.data() + hidx * Nt;
  ctx.self = Line{base, Nt, periodic};
  for (int a = 0; a < 2 * n; ++a) {
    const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(g.axis_stride(a));
    const std::ptrdiff_t wrap = stride * g.N_xy;
    const double* lo = nullptr;
    const double* hi = nullptr;
    if (idx[a] > 0) {
      lo = base - stride;
    } else if (periodic) {
      lo = base - stride + wrap;
    }
    if (idx[a] < g.N_xy - 1) {
      hi = base + stride;
    } else if (periodic) {
      hi = base + stride - wrap;
    }
    ctx.minus[a] = Line{lo, Nt, periodic};
    ctx.plus[a] = Line{hi, Nt, periodic};
  }
}

// Applies emit(k, u_k, (Delta_H u)_k) along every line.
template <class Emit>
void stencil_sweep(const ScalarField& u, Boundary b, Emit&& emit) {
  const GridSpec& g = u.grid;
  if (g.N_xy < 5 || g.N_tau < 5) throw InvalidArgument("sub-Laplacian: grid needs at least 5 nodes per axis");
  const std::size_t H = g.horizontal_nodes();
  const int Nt = g.N_tau;
  const double ih2 = 1.0 / (g.h_xy() * g.h_xy());
  const double iht2 = 1.0 / (g.h_tau() * g.h_tau());
  const double icross = 1.0 / (4.0 * g.h_xy() * g.h_tau());
  const std::vector<double> zeros(static_cast<std::size_t>(Nt), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(H); ++hi) {
    LineContext ctx;
    build_context(g, u, static_cast<std::size_t>(hi), b, ctx);
    const double ctau = 4.0 * ctx.r2 * iht2;
    const std::size_t offset = static_cast<std::size_t>(hi) * Nt;
    auto node = [&](int k) {
      const double c = ctx.self.data[k];
      double horiz = 0.0;
      double cross = 0.0;
      for (int a = 0; a < ctx.axes; ++a) {
        const Line& m = ctx.minus[a];
        const Line& p = ctx.plus[a];
        horiz += p.at(k) - 2.0 * c + m.at(k);
        cross += ctx.coef[a] * (p.at(k + 1) - p.at(k - 1) - m.at(k + 1) + m.at(k - 1));
      }
      const double vert = ctx.self.at(k + 1) - 2.0 * c + ctx.self.at(k - 1);
      emit(offset + static_cast<std::size_t>(k), c, horiz * ih2 + ctau * vert + cross * icross);
    };
    node(0);
    // Interior of the line: no ghost logic, missing neighbour lines read as zeros.
    const double* mp[2 * GridSpec::max_n];
    const double* pp[2 * GridSpec::max_n];
    for (int a = 0; a < ctx.axes; ++a) {
      mp[a] = ctx.minus[a].data ? ctx.minus[a].data : zeros.data();
      pp[a] = ctx.plus[a].data ? ctx.plus[a].data : zeros.data();
    }
    const double* self = ctx.self.data;
    auto interior = [&](auto axes_tag) {
      constexpr int fixed = decltype(axes_tag)::value;
      const int axes = fixed > 0 ? fixed : ctx.axes;
      for (int k = 1; k < Nt - 1; ++k) {
        const double c = self[k];
        double horiz = 0.0;
        double cross = 0.0;
        for (int a = 0; a < axes; ++a) {
          const double* m = mp[a];
          const double* p = pp[a];
          horiz += p[k] + m[k];
          cross += ctx.coef[a] * (p[k + 1] - p[k - 1] - m[k + 1] + m[k - 1]);
        }
        horiz -= 2.0 * axes * c;
        const double vert = self[k + 1] - 2.0 * c + self[k - 1];
        emit(offset + static_cast<std::size_t>(k), c, horiz * ih2 + ctau * vert + cross * icross);
      }
    };
    if (ctx.axes == 2) {
      interior(std::integral_constant<int, 2>{});
    } else {
      interior(std::integral_constant<int, 0>{});
    }
    node(Nt - 1);
  }
}

}  // namespace

ScalarField apply_sublaplacian(const ScalarField& u, Boundary boundary) {
  ScalarField out(u.grid);
  apply_sublaplacian_into(u, out, boundary);
  return out;
}

void apply_sublaplacian_into(const ScalarField& u, ScalarField& out, Boundary boundary) {
  if (!(out.grid == u.grid)) out = ScalarField(u.grid);
  double* dst = out.values.data();
  stencil_sweep(u, boundary, [dst](std::size_t i, double, double lap) { dst[i] = lap; });
  out.diverged = u.diverged;
}

void euler_step_into(const ScalarField& u, ScalarField& out, double dt, Boundary boundary,
                     bool with_source, double p) {
  if (!(out.grid == u.grid)) out = ScalarField(u.grid);
  double* dst = out.values.data();
  if (with_source) {
    // std::pow dominates the step cost; the exponents used in practice reduce to sqrt chains.
    if (p == 2.0) {
      stencil_sweep(u, boundary, [dst, dt](std::size_t i, double c, double lap) { dst[i] = c + dt * (lap + c * c); });
    } else if (p == 1.5) {
      stencil_sweep(u, boundary, [dst, dt](std::size_t i, double c, double lap) {
        const double a = std::abs(c);
        dst[i] = c + dt * (lap + a * std::sqrt(a));
      });
    } else if (p == 1.25) {
      stencil_sweep(u, boundary, [dst, dt](std::size_t i, double c, double lap) {
        const double a = std::abs(c);
        dst[i] = c + dt * (lap + a * std::sqrt(std::sqrt(a)));
      });
    } else {
      stencil_sweep(u, boundary, [dst, dt, p](std::size_t i, double c, double lap) {
        dst[i] = c + dt * (lap + (c == 0.0 ? 0.0 : std::pow(std::abs(c), p)));
      });
    }
  } else {
    stencil_sweep(u, boundary, [dst, dt](std::size_t i, double c, double lap) { dst[i] = c + dt * lap; });
  }
  out.diverged = u.diverged;
}

ScalarField apply_vector_field(const ScalarField& u, VectorFieldId which, Boundary boundary) {
  const GridSpec& g = u.grid;
  if (which.j < 0 || which.j >= g.n) throw InvalidArgument("apply_vector_field: field index out of range");
  if (g.N_xy < 5 || g.N_tau < 5) throw InvalidArgument("apply_vector_field: grid needs at least 5 nodes per axis");
  const int n = g.n;
  const int axis = which.kind == VectorFieldId::Kind::X ? which.j : n + which.j;
  const std::size_t H = g.horizontal_nodes();
  const int Nt = g.N_tau;
  const double i2h = 1.0 / (2.0 * g.h_xy());
  const double i2ht = 1.0 / (2.0 * g.h_tau());
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t hi = 0; hi < static_cast<std::ptrdiff_t>(H); ++hi) {
    LineContext ctx;
    build_context(g, u, static_cast<std::size_t>(hi), boundary, ctx);
    double xy[2 * GridSpec::max_n];
    g.horizontal_coords(static_cast<std::size_t>(hi), xy);
    // X_j: +2 y_j d_tau;  Y_j: -2 x_j d_tau
    const double tcoef = which.kind == VectorFieldId::Kind::X ? 2.0 * xy[n + which.j] : -2.0 * xy[which.j];
    double* dst = out.values.data() + static_cast<std::size_t>(hi) * Nt;
    for (int k = 0; k < Nt; ++k) {
      const double dh = (ctx.plus[axis].at(k) - ctx.minus[axis].at(k)) * i2h;
      const double dtau = (ctx.self.at(k + 1) - ctx.self.at(k - 1)) * i2ht;
      dst[k] = dh + tcoef * dtau;
    }
  }
  return out;
}

ScalarField sum_of_squares_apply(const ScalarField& u, Boundary boundary) {
  ScalarField acc(u.grid);
  for (int j = 0; j < u.grid.n; ++j) {
    for (auto kind : {VectorFieldId::Kind::X, VectorFieldId::Kind::Y}) {
      const VectorFieldId id{kind, j};
      const ScalarField once = apply_vector_field(u, id, boundary);
      const ScalarField twice = apply_vector_field(once, id, boundary);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += twice[i];
    }
  }
  return acc;
}

StencilReport stability_timestep(const GridSpec& grid, double safety) {
  grid.validate();
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("stability_timestep: safety must lie in (0, 1]");
  const int n = grid.n;
  const double h = grid.h_xy();
  const double ht = grid.h_tau();
  // Every term is maximised at a corner of the box, where |x_j| = |y_j| = L_xy.
  const double L = grid.L_xy;
  const double Lmax2 = 2.0 * n * L * L;
  const double row = 2.0 * 2.0 * n / (h * h) + 8.0 * Lmax2 / (ht * ht) + n * 4.0 * (2.0 * L) / (h * ht);
  StencilReport r;
  r.max_abs_row_sum = row;
  r.suggested_dt = safety / row;
  return r;
}

double estimate_spectral_radius(const GridSpec& grid, int iterations, std::uint64_t seed) {
  grid.validate();
  if (iterations < 1) throw InvalidArgument("estimate_spectral_radius: need at least one iteration");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField v(grid);
  for (double& x : v.values) x = dist(rng);
  ScalarField w(grid);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
    apply_sublaplacian_into(v, w, Boundary::dirichlet);
    double wn = 0.0;
    for (double x : w.values) wn += x * x;
    lambda = std::sqrt(wn);
    std::swap(v, w);
  }
  return lambda;
}

StencilReport stability_timestep_sharpened(const GridSpec& grid, double safety, int iterations,
                                           std::uint64_t seed) {
  StencilReport r = stability_timestep(grid, safety);
  r.spectral_radius = estimate_spectral_radius(grid, iterations, seed);
  return r;
}

bool is_interior(const GridSpec& grid, std::size_t index, int halo) {
  int idx[2 * GridSpec::max_n];
  grid.horizontal_indices(index / grid.N_tau, idx);
  for (int a = 0; a < grid.horizontal_axes(); ++a) {
    if (idx[a] < halo || idx[a] > grid.N_xy - 1 - halo) return false;
  }
  const int k = static_cast<int>(index % grid.N_tau);
  return k >= halo && k <= grid.N_tau - 1 - halo;
}

}  // namespace heis
