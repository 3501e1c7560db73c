#include "qs/units.hpp"

#include <cmath>
#include <stdexcept>

namespace qs {

double c2m_from_mass(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("effective mass must be positive");
  return kHalfHbar2OverMe / mu;
}

double wavenumber_from_energy(double e_mev, double c2m) {
  if (e_mev < 0.0) throw std::invalid_argument("negative incidence energy");
  return std::sqrt(e_mev / c2m);
}

double energy_from_wavenumber(double k, double c2m) { return c2m * k * k; }

cplx energy_from_wavenumber(cplx k, double c2m) { return c2m * k * k; }

double classical_speed(double e_mev, double c2m) {
  return speed_nm_fs(wavenumber_from_energy(e_mev, c2m), c2m) * 1e3;
}

double speed_nm_fs(double k, double c2m) { return 2.0 * c2m * k / kHbar; }

double BarrierProfile::potential(double x) const {
  if (x < 0.0 || x >= length) return 0.0;
  double left = 0.0;
  for (const auto& s : segments) {
    if (x < left + s.width) return s.height;
    left += s.width;
  }
  return 0.0;
}

BarrierProfile make_profile(std::vector<Segment> segments, double mu) {
  if (segments.empty()) throw std::invalid_argument("empty profile");
  double len = 0.0;
  for (const auto& s : segments) {
    if (!(s.width > 0.0)) throw std::invalid_argument("segment widths must be positive");
    len += s.width;
  }
  BarrierProfile p;
  p.segments = std::move(segments);
  p.mass_mu = mu;
  p.c2m = c2m_from_mass(mu);
  p.length = len;
  return p;
}

BarrierProfile build_double_barrier(double vb_mev, double barrier_nm,
                                    double well_nm, double mu) {
  if (!(vb_mev > 0.0)) throw std::invalid_argument("barrier height must be positive");
  return make_profile({{barrier_nm, vb_mev}, {well_nm, 0.0}, {barrier_nm, vb_mev}}, mu);
}

} // namespace qs
