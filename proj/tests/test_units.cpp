#include <doctest.h>

#include "qs/units.hpp"

#include <cmath>
#include <stdexcept>

using namespace qs;

TEST_CASE("mass scaling of hbar^2/2m") {
  CHECK(c2m_from_mass(1.0) == doctest::Approx(38.0998).epsilon(1e-12));
  CHECK(c2m_from_mass(0.067) == doctest::Approx(568.6537313432836).epsilon(1e-12));
  CHECK_THROWS_AS(c2m_from_mass(0.0), std::invalid_argument);
  CHECK_THROWS_AS(c2m_from_mass(-1.0), std::invalid_argument);
}

TEST_CASE("energy-wavenumber round trip") {
  double c2m = c2m_from_mass(0.067);
  double k = wavenumber_from_energy(74.97, c2m);
  CHECK(energy_from_wavenumber(k, c2m) == doctest::Approx(74.97).epsilon(1e-14));
  CHECK(wavenumber_from_energy(0.0, c2m) == 0.0);
  CHECK_THROWS_AS(wavenumber_from_energy(-1.0, c2m), std::invalid_argument);

  cplx kc(0.37, -0.0012);
  cplx e = energy_from_wavenumber(kc, c2m);
  CHECK(e.real() == doctest::Approx(c2m * (0.37 * 0.37 - 0.0012 * 0.0012)));
  CHECK(e.imag() == doctest::Approx(c2m * 2.0 * 0.37 * -0.0012));
}

TEST_CASE("front speed at the working energy") {
  double c2m = c2m_from_mass(0.067);
  // 74.97 meV electron in GaAs: ~0.627 nm/fs = 627 nm/ps
  CHECK(classical_speed(74.97, c2m) == doctest::Approx(627.0).epsilon(2e-3));
  double k = wavenumber_from_energy(74.97, c2m);
  CHECK(speed_nm_fs(k, c2m) * 1e3 == doctest::Approx(classical_speed(74.97, c2m)));
}

TEST_CASE("double barrier profile geometry") {
  auto p = build_double_barrier(230.0, 5.0, 5.0, 0.067);
  CHECK(p.length == doctest::Approx(15.0));
  CHECK(p.potential(-1.0) == 0.0);
  CHECK(p.potential(0.0) == 230.0);
  CHECK(p.potential(4.999) == 230.0);
  CHECK(p.potential(5.0) == 0.0);
  CHECK(p.potential(9.999) == 0.0);
  CHECK(p.potential(10.0) == 230.0);
  CHECK(p.potential(14.999) == 230.0);
  CHECK(p.potential(15.0) == 0.0);
  CHECK(p.potential(100.0) == 0.0);

  CHECK_THROWS_AS(build_double_barrier(-5.0, 5.0, 5.0, 0.067), std::invalid_argument);
  CHECK_THROWS_AS(make_profile({}, 0.067), std::invalid_argument);
  CHECK_THROWS_AS(make_profile({{-1.0, 10.0}}, 0.067), std::invalid_argument);
}
