#pragma once

#include "qs/faddeeva.hpp"
#include "qs/resonances.hpp"

#include <cstddef>
#include <vector>

namespace qs {

// Closed-form propagator for the cutoff plane wave released at t = 0 against
// the barrier structure: everything the series solutions reuse per call,
// frozen at construction. Modes are kept sorted by detuning from e, so a
// truncated sum always keeps the most resonant terms.
struct ShutterModel {
  BarrierProfile profile;
  std::vector<GamowMode> modes;
  double e;    // incidence energy, meV
  double k;    // incidence wavenumber, 1/nm
  cplx t_k;    // transmission amplitude at +k
  cplx t_mk;   // transmission amplitude at -k
};

ShutterModel make_shutter_model(BarrierProfile profile, std::vector<GamowMode> modes,
                                double e_mev);

// wavefunction for x <= L: plane-wave doublet plus the resonance sum,
// all Moshinsky arguments taken at the shutter plane x = 0
cplx psi_internal(const ShutterModel& m, double x, double t,
                  std::size_t n_pairs = static_cast<std::size_t>(-1));

// wavefunction for x >= L: transmitted doublet plus resonance sum, carrying
// the free-spreading quadratic phase in front
cplx psi_external(const ShutterModel& m, double x, double t,
                  std::size_t n_pairs = static_cast<std::size_t>(-1));

// single dominant-level approximation of psi_external
cplx psi_external_one_level(const ShutterModel& m, double x, double t);

// |Psi(L,t)/T_k|^2 with only the nearest level retained, closed form:
// 1 + e^{-gamma t/hbar} - 2 e^{-gamma t/2hbar} cos(delta_e t/hbar)
double internal_buildup_ratio(const GamowMode& mode, double e_mev, double t);

// same ratio at a detector plane x_f beyond the barrier. Valid once the
// front has classically reached x_f; earlier times throw unless forced.
// The oscillation frequency carries the signed detuning (e - eps_n).
double external_ratio_closed_form(const BarrierProfile& p, const GamowMode& mode,
                                  double e_mev, double x_f, double t,
                                  bool force = false);

struct TimeScales {
  double tau_lifetime;        // hbar / gamma
  double tau_buildup;         // 10 hbar / gamma
  double tau_response;        // pi hbar / |e - eps|, NaN at resonance incidence
  double crossover_detuning;  // pi gamma: detuning where response equals lifetime
};
TimeScales time_scales(const GamowMode& mode, double e_mev);

// t_m = (2m-1) pi hbar / |e - eps|, the m-th closed-form density maximum
double response_maximum_time(const GamowMode& mode, double e_mev, int m);

// oscillation cycles completed by time t: t |e - eps| / (2 pi hbar)
double buildup_cycle_count(const GamowMode& mode, double e_mev, double t);

// Transmitted-front position: walk down from well past the classical
// position x = v t and report the first point whose density exceeds
// `threshold` times the plateau mean behind the front.
struct FrontResult {
  double x_front;
  double plateau;  // mean of |psi/T_k|^2 over x < 0.8 v t
};
FrontResult locate_front(const ShutterModel& m, double t, double threshold = 0.1);

} // namespace qs
