#pragma once
#include "qs/units.hpp"

namespace qs {

// Plane-wave transfer matrix: (A,B) coefficients left of the structure in
// terms of those on the right, (A_0, B_0)^T = M (A_L, B_L)^T.
// Stored in scaled form, full value = exp(log_scale) * m, so opaque
// barriers (kappa*w of order 10^2 during pole hunts) cannot overflow.
struct TransferMatrix {
  cplx m11, m12, m21, m22;
  double log_scale;

  cplx full_m11() const;     // exp(log_scale) * m11, may legitimately be huge
  cplx log_det() const;      // log of the full determinant; 0 for a valid matrix
};

// kappa_j = sqrt(k^2 - V_j / c2m), principal branch
cplx local_wavenumber(cplx k, double v_mev, double c2m);

// (psi, psi') carried across a constant-potential stretch; exact, unit
// determinant, dx may be negative (inverse step).
struct WavePair {
  cplx u, du;
};
WavePair propagate_pair(WavePair w, cplx kappa, double dx);

TransferMatrix transfer_matrix(const BarrierProfile& p, cplx k);

struct ScatteringAmplitudes {
  cplx t, r;
  cplx k;
};

// incident e^{ikx} from the left, transmitted t e^{ikx} beyond the structure
ScatteringAmplitudes scattering_amplitudes(const BarrierProfile& p, cplx k);

// 1/t(k) without forming t; this is the pole-search objective (zeros of 1/t)
cplx inverse_transmission(const BarrierProfile& p, cplx k);

// phi_k: e^{ikx} + r e^{-ikx} for x < 0, interior by forward propagation,
// t e^{ikx} for x >= L. Real incidence wavenumber.
cplx stationary_wave(const BarrierProfile& p, double k, double x);

} // namespace qs
