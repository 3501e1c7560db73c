#pragma once
#include <complex>
#include <vector>

// Unit system: nm, fs, meV. All module interfaces stick to these.

namespace qs {

using cplx = std::complex<double>;

inline constexpr double kHbar = 658.2119569;        // meV fs
inline constexpr double kHalfHbar2OverMe = 38.0998; // hbar^2/(2 m_e), meV nm^2

// hbar^2/(2 m) for an effective mass of mu electron masses, meV nm^2
double c2m_from_mass(double mu);

// k = sqrt(E / (hbar^2/2m)); E in meV, k in 1/nm. E must be >= 0.
double wavenumber_from_energy(double e_mev, double c2m);

double energy_from_wavenumber(double k, double c2m);
cplx energy_from_wavenumber(cplx k, double c2m);

// propagation speed hbar k / m of the front; returned in nm/ps
double classical_speed(double e_mev, double c2m);

// same speed in the native nm/fs used internally
double speed_nm_fs(double k, double c2m);

struct Segment {
  double width;  // nm
  double height; // meV
};

// piecewise-constant structure occupying [0, length]; V = 0 outside
struct BarrierProfile {
  std::vector<Segment> segments;
  double mass_mu;
  double c2m;    // hbar^2/(2 m), meV nm^2
  double length; // nm, sum of segment widths

  double potential(double x) const;
};

BarrierProfile make_profile(std::vector<Segment> segments, double mu);

// symmetric double barrier: height vb on [0,bw] and [bw+ww, 2bw+ww], well between
BarrierProfile build_double_barrier(double vb_mev, double barrier_nm,
                                    double well_nm, double mu);

} // namespace qs
