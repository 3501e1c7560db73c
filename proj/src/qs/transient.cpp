#include "qs/transient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qs {
namespace {

const cplx kI(0.0, 1.0);

std::size_t clamp_pairs(const ShutterModel& m, std::size_t n) {
  return std::min(n, m.modes.size());
}

} // namespace

ShutterModel make_shutter_model(BarrierProfile profile, std::vector<GamowMode> modes,
                                double e_mev) {
  if (e_mev <= 0.0) throw std::invalid_argument("shutter model: energy must be positive");
  ShutterModel m;
  m.e = e_mev;
  m.k = wavenumber_from_energy(e_mev, profile.c2m);
  m.t_k = scattering_amplitudes(profile, cplx(m.k, 0.0)).t;
  m.t_mk = scattering_amplitudes(profile, cplx(-m.k, 0.0)).t;
  std::sort(modes.begin(), modes.end(), [e_mev](const GamowMode& a, const GamowMode& b) {
    return std::abs(a.eps() - e_mev) < std::abs(b.eps() - e_mev);
  });
  m.modes = std::move(modes);
  m.profile = std::move(profile);
  return m;
}

cplx psi_internal(const ShutterModel& m, double x, double t, std::size_t n_pairs) {
  const double k = m.k, c2m = m.profile.c2m;
  cplx acc = stationary_wave(m.profile, k, x) * moshinsky_m(moshinsky_arg(k, 0.0, t, c2m)) -
             stationary_wave(m.profile, -k, x) * moshinsky_m(moshinsky_arg(-k, 0.0, t, c2m));
  cplx s = 0.0;
  const std::size_t n = clamp_pairs(m, n_pairs);
  for (std::size_t j = 0; j < n; ++j) {
    const GamowMode& g = m.modes[j];
    cplx kn = g.k;
    cplx coef = 2.0 * k * g.u0 * gamow_value(g, m.profile, x) / (k * k - kn * kn);
    s += coef * moshinsky_m(moshinsky_arg(kn, 0.0, t, c2m));
    // mirror pole at -conj(kn) carries the conjugate coefficient
    cplx knm = -std::conj(kn);
    s += std::conj(coef) * moshinsky_m(moshinsky_arg(knm, 0.0, t, c2m));
  }
  return acc - kI * s;
}

cplx psi_external(const ShutterModel& m, double x, double t, std::size_t n_pairs) {
  const double k = m.k, c2m = m.profile.c2m, l = m.profile.length;
  cplx acc = m.t_k * moshinsky_m(moshinsky_arg(k, x, t, c2m)) -
             m.t_mk * moshinsky_m(moshinsky_arg(-k, x, t, c2m));
  cplx s = 0.0;
  const std::size_t n = clamp_pairs(m, n_pairs);
  for (std::size_t j = 0; j < n; ++j) {
    const GamowMode& g = m.modes[j];
    cplx kn = g.k;
    cplx tn = 2.0 * k * g.u0 * g.uL * std::exp(-kI * kn * l) / (k * k - kn * kn);
    s += tn * moshinsky_m(moshinsky_arg(kn, x, t, c2m));
    cplx knm = -std::conj(kn);
    s += std::conj(tn) * moshinsky_m(moshinsky_arg(knm, x, t, c2m));
  }
  // free-spreading quadratic phase, exp(i m x^2 / 2 hbar t) in these units
  cplx phase = std::exp(kI * x * x * kHbar / (4.0 * c2m * t));
  return (acc - kI * s) * phase;
}

cplx psi_external_one_level(const ShutterModel& m, double x, double t) {
  return psi_external(m, x, t, 1);
}

double internal_buildup_ratio(const GamowMode& mode, double e_mev, double t) {
  double gt = mode.gamma() * t / kHbar;
  double w = (e_mev - mode.eps()) / kHbar;
  return 1.0 + std::exp(-gt) - 2.0 * std::exp(-0.5 * gt) * std::cos(w * t);
}

double external_ratio_closed_form(const BarrierProfile& p, const GamowMode& mode,
                                  double e_mev, double x_f, double t, bool force) {
  double k = wavenumber_from_energy(e_mev, p.c2m);
  double arrival = x_f / speed_nm_fs(k, p.c2m);
  if (t < arrival && !force)
    throw std::domain_error("external closed form: t below the classical arrival time");
  double a = mode.k.real(), b = -mode.k.imag();
  double d = x_f - p.length;
  double gt = mode.gamma() * t / kHbar;
  double w = (e_mev - mode.eps()) / kHbar;  // signed detuning sets the fringe motion
  return 1.0 + std::exp(-gt + 2.0 * b * d) -
         2.0 * std::exp(b * d - 0.5 * gt) * std::cos((a - k) * d + w * t);
}

TimeScales time_scales(const GamowMode& mode, double e_mev) {
  TimeScales ts;
  ts.tau_lifetime = kHbar / mode.gamma();
  ts.tau_buildup = 10.0 * ts.tau_lifetime;
  double de = std::abs(e_mev - mode.eps());
  ts.tau_response = de > 0.0 ? M_PI * kHbar / de : std::nan("");
  ts.crossover_detuning = M_PI * mode.gamma();
  return ts;
}

double response_maximum_time(const GamowMode& mode, double e_mev, int m) {
  if (m < 1) throw std::invalid_argument("response maximum index starts at 1");
  double de = std::abs(e_mev - mode.eps());
  return de > 0.0 ? (2.0 * m - 1.0) * M_PI * kHbar / de : std::nan("");
}

double buildup_cycle_count(const GamowMode& mode, double e_mev, double t) {
  return t * std::abs(e_mev - mode.eps()) / (2.0 * M_PI * kHbar);
}

FrontResult locate_front(const ShutterModel& m, double t, double threshold) {
  const double v = speed_nm_fs(m.k, m.profile.c2m);
  const double xc = v * t;
  const double l = m.profile.length;
  const double step = std::max(2.0, xc / 1200.0);

  std::vector<double> xs, dens;
  for (double x = l; x < 1.35 * xc; x += step) {
    xs.push_back(x);
    dens.push_back(std::norm(psi_external(m, x, t) / m.t_k));
  }
  double plateau = 0.0;
  std::size_t np = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0.8 * xc) {
      plateau += dens[i];
      ++np;
    }
  }
  plateau /= static_cast<double>(np);
  for (std::size_t i = xs.size(); i-- > 0;) {
    if (dens[i] > threshold * plateau) return {xs[i], plateau};
  }
  return {std::nan(""), plateau};
}

} // namespace qs
