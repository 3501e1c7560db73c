#pragma once

#include "qs/scattering.hpp"

#include <vector>

namespace qs {

// Quasibound state attached to a lower-half-plane zero of 1/t(k).
// The interior solution is normalized by
//   int_0^L u^2 dx + i (u(0)^2 + u(L)^2) / (2 k_n) = 1
// (squares of u, not moduli; the boundary term regularizes the divergent
// outgoing tails). Outside the structure u continues as a pure outgoing
// wave on both sides.
struct GamowMode {
  cplx k;       // pole wavenumber, Im k < 0
  cplx energy;  // c2m k^2 = eps - i gamma / 2
  cplx u0, uL;  // normalized boundary values

  struct EdgeSample {
    double x;     // left edge of the segment
    cplx u, du;
    cplx kappa;
    double w;
  };
  std::vector<EdgeSample> edges;

  double eps() const { return energy.real(); }
  double gamma() const { return -2.0 * energy.imag(); }
};

// Newton refinement of a pole seed on 1/t(k); NaN on non-convergence.
cplx refine_pole(const BarrierProfile& p, cplx seed);

// build the normalized mode for an already-refined pole
GamowMode gamow_mode(const BarrierProfile& p, cplx k_pole);

// u_n(x) anywhere, outgoing tails beyond the structure
cplx gamow_value(const GamowMode& g, const BarrierProfile& p, double x);

// residue of t(k) at a simple pole, computed as 1 / (d(1/t)/dk)
cplx transmission_residue(const BarrierProfile& p, cplx k_pole);

// all poles with 0 < Re k <= k_max in the fourth quadrant, sorted by Re k.
// Seeded from real-axis transmission peaks plus a coarse quadrant grid so
// both narrow and broad levels are caught.
std::vector<GamowMode> find_modes(const BarrierProfile& p, double k_max);

} // namespace qs
