#pragma once

#include <cstdint>

#include "heislab/grid.hpp"

namespace heis {

/// Ghost-node convention outside the box.
enum class Boundary {
  dirichlet,  ///< zero outside the box
  periodic,   ///< wrap every axis
};

/// Expanded-coefficient sub-Laplacian
///   sum_j (d_xj^2 + d_yj^2) + 4|(x,y)|^2 d_tau^2 + 4 sum_j (y_j d_xj d_tau - x_j d_yj d_tau)
/// with second-order central differences and the 4-point cross stencil for mixed terms.
ScalarField apply_sublaplacian(const ScalarField& u, Boundary boundary = Boundary::dirichlet);

/// Allocation-free variant; out must live on u's grid.
void apply_sublaplacian_into(const ScalarField& u, ScalarField& out, Boundary boundary);

/// out = u + dt * (Delta_H u + |u|^p), or the linear step when with_source is false.
/// Both variants share one code path, so disabling the source reproduces the linear
/// step bit for bit.
void euler_step_into(const ScalarField& u, ScalarField& out, double dt, Boundary boundary,
                     bool with_source, double p);

/// Identifies X_j (horizontal field along x_j) or Y_j; j is zero-based.
struct VectorFieldId {
  enum class Kind { X, Y };
  Kind kind = Kind::X;
  int j = 0;
};

/// X_j = d_xj + 2 y_j d_tau,  Y_j = d_yj - 2 x_j d_tau, with central first differences.
ScalarField apply_vector_field(const ScalarField& u, VectorFieldId which,
                               Boundary boundary = Boundary::dirichlet);

/// sum_j X_j^2 + Y_j^2 by composing apply_vector_field; cross-check only (two-node halo).
ScalarField sum_of_squares_apply(const ScalarField& u, Boundary boundary = Boundary::dirichlet);

struct StencilReport {
  double max_abs_row_sum = 0.0;
  double suggested_dt = 0.0;
  /// Power-iteration estimate of the discrete operator's spectral radius; 0 when not requested.
  double spectral_radius = 0.0;
};

/// Conservative explicit step: safety / max over nodes of
///   2*2n/h_xy^2 + 8 L_max^2/h_tau^2 + sum_j 4(|y_j| + |x_j|)/(h_xy h_tau).
StencilReport stability_timestep(const GridSpec& grid, double safety);

/// Same as stability_timestep, additionally sharpened by power iteration.
StencilReport stability_timestep_sharpened(const GridSpec& grid, double safety, int iterations,
                                           std::uint64_t seed = 1);

/// Largest |lambda| of the Dirichlet discrete operator by power iteration.
double estimate_spectral_radius(const GridSpec& grid, int iterations, std::uint64_t seed = 1);

/// True for nodes at least `halo` nodes away from every face.
bool is_interior(const GridSpec& grid, std::size_t index, int halo);

}  // namespace heis
