#include "qs/resonances.hpp"

#include <algorithm>
#include <cmath>

namespace qs {
namespace {

// int_0^w (u cos(kap s) + du sin(kap s)/kap)^2 ds, closed form.
// Series branches take over where the direct forms cancel.
cplx segment_u2_integral(cplx u, cplx du, cplx kap, double w) {
  cplx z = kap * w;
  cplx z2 = z * z;

  cplx sinc2z = (std::abs(z) < 5e-4)
                    ? 1.0 - 2.0 * z2 / 3.0 * (1.0 - z2 / 5.0)
                    : std::sin(2.0 * z) / (2.0 * z);
  cplx c2 = 0.5 * w * (1.0 + sinc2z);

  cplx snc = (std::abs(z) < 5e-4) ? 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
                                  : std::sin(z) / z;
  cplx cs = 0.5 * w * w * snc * snc;

  cplx s2 = (std::abs(z) < 1e-2)
                ? w * w * w * (1.0 / 3.0 - z2 / 15.0 + 2.0 * z2 * z2 / 315.0)
                : 0.5 * w / (kap * kap) * (1.0 - sinc2z);

  return u * u * c2 + 2.0 * u * du * cs + du * du * s2;
}

} // namespace

cplx refine_pole(const BarrierProfile& p, cplx seed) {
  const double h = 1e-7;
  const cplx bad(std::nan(""), std::nan(""));
  cplx kk = seed;
  for (int it = 0; it < 80; ++it) {
    cplx f = inverse_transmission(p, kk);
    cplx fp = (inverse_transmission(p, kk + h) - inverse_transmission(p, kk - h)) / (2.0 * h);
    if (fp == cplx(0.0, 0.0)) return bad;
    cplx dk = f / fp;
    kk -= dk;
    if (!std::isfinite(kk.real()) || !std::isfinite(kk.imag()) || std::abs(kk) > 50.0)
      return bad;
    if (std::abs(dk) < 1e-13) return kk;
  }
  return bad;
}

GamowMode gamow_mode(const BarrierProfile& p, cplx kp) {
  const cplx i(0.0, 1.0);
  const double l = p.length;
  const int n = static_cast<int>(p.segments.size());

  GamowMode g;
  g.k = kp;
  g.energy = energy_from_wavenumber(kp, p.c2m);
  g.uL = std::exp(i * kp * l);
  g.edges.resize(n);

  // carry (u, u') from the outgoing right tail back to x = 0
  WavePair w{g.uL, i * kp * g.uL};
  double x = l;
  for (int j = n - 1; j >= 0; --j) {
    const auto& seg = p.segments[j];
    cplx kap = local_wavenumber(kp, seg.height, p.c2m);
    w = propagate_pair(w, kap, -seg.width);
    x -= seg.width;
    g.edges[j] = {x, w.u, w.du, kap, seg.width};
  }
  g.u0 = g.edges.front().u;

  cplx norm2 = 0.0;
  for (const auto& e : g.edges) norm2 += segment_u2_integral(e.u, e.du, e.kappa, e.w);
  norm2 += i * (g.u0 * g.u0 + g.uL * g.uL) / (2.0 * kp);

  cplx c = std::sqrt(norm2);
  g.u0 /= c;
  g.uL /= c;
  for (auto& e : g.edges) {
    e.u /= c;
    e.du /= c;
  }
  return g;
}

cplx gamow_value(const GamowMode& g, const BarrierProfile& p, double x) {
  const cplx i(0.0, 1.0);
  if (x <= 0.0) return g.u0 * std::exp(-i * g.k * x);
  if (x >= p.length) return g.uL * std::exp(i * g.k * (x - p.length));
  for (auto it = g.edges.rbegin(); it != g.edges.rend(); ++it) {
    if (x >= it->x) return propagate_pair({it->u, it->du}, it->kappa, x - it->x).u;
  }
  return g.u0; // x fell between 0 and edges.front().x by rounding
}

cplx transmission_residue(const BarrierProfile& p, cplx kp) {
  const double h = 1e-6;
  cplx fp = (inverse_transmission(p, kp + h) - inverse_transmission(p, kp - h)) / (2.0 * h);
  return 1.0 / fp;
}

std::vector<GamowMode> find_modes(const BarrierProfile& p, double k_max) {
  std::vector<cplx> seeds;

  // narrow levels show up as |t|^2 peaks for real k
  const double dk = 0.002;
  double t0 = 0.0, t1 = 0.0;
  for (double kk = dk; kk <= k_max + dk; kk += dk) {
    double t2 = std::norm(scattering_amplitudes(p, cplx(kk, 0.0)).t);
    if (t1 > t0 && t1 > t2) seeds.push_back(cplx(kk - dk, -0.02));
    t0 = t1;
    t1 = t2;
  }
  // coarse quadrant grid backfills the broad ones the scan cannot see
  for (double a = 0.05; a <= k_max + 1e-12; a += 0.05)
    for (double b : {0.01, 0.05, 0.12, 0.2, 0.3, 0.4}) seeds.push_back(cplx(a, -b));

  std::vector<cplx> found;
  for (cplx seed : seeds) {
    cplx kp = refine_pole(p, seed);
    if (!std::isfinite(kp.real())) continue;
    if (kp.real() <= 0.02 || kp.real() > k_max) continue;
    if (kp.imag() >= -1e-7 || kp.imag() < -1.0) continue;
    if (std::abs(inverse_transmission(p, kp)) > 1e-9) continue;
    bool dup = false;
    for (cplx q : found) dup = dup || std::abs(q - kp) < 1e-8;
    if (!dup) found.push_back(kp);
  }
  std::sort(found.begin(), found.end(),
            [](cplx a, cplx b) { return a.real() < b.real(); });

  std::vector<GamowMode> modes;
  modes.reserve(found.size());
  for (cplx kp : found) modes.push_back(gamow_mode(p, kp));
  return modes;
}

} // namespace qs
