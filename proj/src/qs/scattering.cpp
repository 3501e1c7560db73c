#include "qs/scattering.hpp"

#include <cmath>
#include <stdexcept>

namespace qs {
namespace {

// sin(z)/z with the cancellation-free series near 0
cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    cplx z2 = z * z;
    return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0);
  }
  return std::sin(z) / z;
}

struct ScaledP {
  cplx p11, p12, p21, p22; // (psi(L), psi'(L)) = exp(s) * P (psi(0), psi'(0))
  double s;
};

ScaledP interior_propagator(const BarrierProfile& p, cplx k) {
  WavePair c1{1.0, 0.0}, c2{0.0, 1.0};
  double s = 0.0;
  for (const auto& seg : p.segments) {
    cplx kap = local_wavenumber(k, seg.height, p.c2m);
    c1 = propagate_pair(c1, kap, seg.width);
    c2 = propagate_pair(c2, kap, seg.width);
    double mu = std::max(std::max(std::abs(c1.u), std::abs(c1.du)),
                         std::max(std::abs(c2.u), std::abs(c2.du)));
    if (mu > 1e8) {
      c1.u /= mu; c1.du /= mu; c2.u /= mu; c2.du /= mu;
      s += std::log(mu);
    }
  }
  return {c1.u, c2.u, c1.du, c2.du, s};
}

} // namespace

cplx local_wavenumber(cplx k, double v_mev, double c2m) {
  return std::sqrt(k * k - v_mev / c2m);
}

WavePair propagate_pair(WavePair w, cplx kappa, double dx) {
  cplx c = std::cos(kappa * dx);
  cplx s = dx * sinc(kappa * dx);
  cplx ks = -kappa * std::sin(kappa * dx);
  return {c * w.u + s * w.du, ks * w.u + c * w.du};
}

cplx TransferMatrix::full_m11() const { return m11 * std::exp(log_scale); }

cplx TransferMatrix::log_det() const {
  return std::log(m11 * m22 - m12 * m21) + 2.0 * log_scale;
}

TransferMatrix transfer_matrix(const BarrierProfile& p, cplx k) {
  if (k == cplx(0.0, 0.0)) throw std::domain_error("transfer_matrix: k = 0 is singular");
  ScaledP ip = interior_propagator(p, k);

  // full P has det 1, so P^{-1} = exp(s) * adj(P_scaled)
  cplx a = ip.p22, b = -ip.p12, c = -ip.p21, d = ip.p11;

  const cplx ik = cplx(0.0, 1.0) * k;
  const double l = p.length;
  cplx epl = std::exp(ik * l), eml = std::exp(-ik * l);

  // rows of Q0^{-1} = [[1, 1/ik], [1, -1/ik]] / 2
  // columns of QL = [[epl, eml], [ik epl, -ik eml]]
  cplx q11 = (a + b * ik) * epl, q12 = (a - b * ik) * eml;
  cplx q21 = (c + d * ik) * epl, q22 = (c - d * ik) * eml;

  TransferMatrix m;
  m.m11 = 0.5 * (q11 + q21 / ik);
  m.m12 = 0.5 * (q12 + q22 / ik);
  m.m21 = 0.5 * (q11 - q21 / ik);
  m.m22 = 0.5 * (q12 - q22 / ik);
  m.log_scale = ip.s;
  return m;
}

ScatteringAmplitudes scattering_amplitudes(const BarrierProfile& p, cplx k) {
  TransferMatrix m = transfer_matrix(p, k);
  return {std::exp(-m.log_scale) / m.m11, m.m21 / m.m11, k};
}

cplx inverse_transmission(const BarrierProfile& p, cplx k) {
  return transfer_matrix(p, k).full_m11();
}

cplx stationary_wave(const BarrierProfile& p, double k, double x) {
  ScatteringAmplitudes amps = scattering_amplitudes(p, k);
  const cplx ik(0.0, k);
  if (x < 0.0) return std::exp(ik * x) + amps.r * std::exp(-ik * x);
  if (x >= p.length) return amps.t * std::exp(ik * x);

  WavePair w{1.0 + amps.r, ik * (1.0 - amps.r)};
  double left = 0.0;
  for (const auto& seg : p.segments) {
    cplx kap = local_wavenumber(cplx(k, 0.0), seg.height, p.c2m);
    if (x < left + seg.width) return propagate_pair(w, kap, x - left).u;
    w = propagate_pair(w, kap, seg.width);
    left += seg.width;
  }
  return w.u; // x == length exactly
}

} // namespace qs
