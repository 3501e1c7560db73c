#pragma once
#include "qs/units.hpp"

namespace qs {

// w(z) = exp(-z^2) erfc(-iz), any z. Lower half plane goes through
// w(-z) = 2 exp(-z^2) - w(z), which can overflow for large |Im z|;
// that overflow propagates as inf rather than being masked.
cplx faddeeva_w(cplx z);

// M(y) = (1/2) exp(y^2) erfc(y) = (1/2) w(iy). The Re(y) < 0 branch uses
// M(y) = exp(y^2) - M(-y) and throws if exp(y^2) is not representable.
cplx moshinsky_m(cplx y);

// y_q(x,t) = e^{-i pi/4} sqrt(hbar/(4 c2m t)) (x - 2 c2m q t / hbar).
// The t -> 0+ limit is taken by the caller; t must be > 0 here.
cplx moshinsky_arg(cplx q, double x, double t, double c2m);

} // namespace qs
