#include "qs/cn_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace qs {

GridSpec make_grid(double x_min_request, double x_max, double dx, double dt, double k) {
  if (dx <= 0.0 || dt <= 0.0) throw std::invalid_argument("grid: dx and dt must be positive");
  if (x_min_request >= 0.0) throw std::invalid_argument("grid: left wall must sit below the shutter");
  if (k <= 0.0) throw std::invalid_argument("grid: wavenumber must be positive");

  double m = std::round(-x_min_request * k / M_PI);
  GridSpec g;
  g.x_min = -m * M_PI / k;
  g.x_max = x_max;
  g.dx = dx;
  g.dt = dt;
  g.n = static_cast<std::size_t>(std::round((x_max - g.x_min) / dx)) + 1;
  g.stability_ratio = dt * kHalfHbar2OverMe / (kHbar * dx * dx);
  return g;
}

GridState initialize_shutter_state(const GridSpec& g, double k) {
  GridState s;
  s.grid = g;
  s.psi.assign(g.n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < g.n; ++j) {
    double x = g.x(j);
    if (x < 0.0) s.psi[j] = cplx(0.0, 2.0) * std::sin(k * x);
  }
  return s;
}

void evolve(GridState& s, const BarrierProfile& p, double t_end) {
  const GridSpec& g = s.grid;
  double span = t_end - s.t;
  if (span < 0.0) throw std::invalid_argument("evolve: cannot step backwards");
  auto steps = static_cast<std::size_t>(std::round(span / g.dt));
  if (std::abs(static_cast<double>(steps) * g.dt - span) > 1e-9)
    throw std::invalid_argument("evolve: t_end is not a whole number of steps away");
  if (steps == 0) return;

  const std::size_t n = g.n;
  const double alpha = g.dt * p.c2m / (2.0 * kHbar * g.dx * g.dx);
  const double beta = g.dt / (2.0 * kHbar);
  const cplx ia(0.0, alpha);

  // diagonals are time independent, so the forward-elimination factors of the
  // Thomas sweep are computed once
  std::vector<cplx> diag_p(n), diag_m(n), cp(n), inv_den(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx h(0.0, 2.0 * alpha + beta * p.potential(g.x(j)));
    diag_p[j] = 1.0 + h;
    diag_m[j] = 1.0 - h;
  }
  cp[0] = -ia / diag_p[0];
  inv_den[0] = 1.0 / diag_p[0];
  for (std::size_t j = 1; j < n; ++j) {
    cplx den = diag_p[j] + ia * cp[j - 1];
    inv_den[j] = 1.0 / den;
    cp[j] = -ia / den;
  }

  std::vector<cplx>& psi = s.psi;
  std::vector<cplx> d(n);
  for (std::size_t step = 0; step < steps; ++step) {
    d[0] = diag_m[0] * psi[0] + ia * psi[1];
    for (std::size_t j = 1; j + 1 < n; ++j)
      d[j] = diag_m[j] * psi[j] + ia * (psi[j - 1] + psi[j + 1]);
    d[n - 1] = diag_m[n - 1] * psi[n - 1] + ia * psi[n - 2];

    d[0] *= inv_den[0];
    for (std::size_t j = 1; j < n; ++j)
      d[j] = (d[j] + ia * d[j - 1]) * inv_den[j];

    psi[n - 1] = d[n - 1];
    for (std::size_t j = n - 1; j-- > 0;)
      psi[j] = d[j] - cp[j] * psi[j + 1];
  }
  s.t += static_cast<double>(steps) * g.dt;
}

double grid_norm(const GridState& s) {
  double acc = 0.0;
  for (const cplx& v : s.psi) acc += std::norm(v);
  return acc * s.grid.dx;
}

double validity_horizon(const GridSpec& g, double x_lo, double x_hi, double speed) {
  double clearance = std::min(x_lo - g.x_min, g.x_max - x_hi);
  return clearance / speed;
}

} // namespace qs
