#pragma once

#include "qs/units.hpp"

#include <cstddef>
#include <vector>

namespace qs {

// Uniform grid for the Cayley-form propagator. Hard walls: the wave just
// outside the first and last node is pinned to zero, so the box must be
// large enough that reflections stay clear of the comparison window.
// x_min is snapped onto a node of sin(k x) so the initial state vanishes
// at the left wall exactly.
struct GridSpec {
  double x_min;
  double x_max;
  double dx;
  double dt;
  std::size_t n;
  double stability_ratio;  // dt c2m / (hbar dx^2); diagnostic only, the
                           // scheme is unconditionally stable

  double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx; }
};

GridSpec make_grid(double x_min_request, double x_max, double dx, double dt, double k);

struct GridState {
  GridSpec grid;
  std::vector<cplx> psi;
  double t = 0.0;
};

// cutoff plane wave pressed against the shutter: 2i sin(kx) for x < 0, zero
// beyond, evaluated on the nodes
GridState initialize_shutter_state(const GridSpec& g, double k);

// advance to t_end with (1 + i dt H / 2hbar) psi' = (1 - i dt H / 2hbar) psi;
// t_end - t must be a whole number of steps
void evolve(GridState& s, const BarrierProfile& p, double t_end);

// discrete l2 norm, sum |psi|^2 dx
double grid_norm(const GridState& s);

// Time before either wall can corrupt a comparison window [x_lo, x_hi]:
// nearest wall clearance divided by the classical front speed.
double validity_horizon(const GridSpec& g, double x_lo, double x_hi, double speed);

} // namespace qs
