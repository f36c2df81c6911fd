#pragma once
// Exact heat kernels on the plane and the infinite flat cone C_gamma
// (metric dr^2 + gamma^2 r^2 dtheta^2, total angle 2*pi*gamma).
//
// Diagonal kernel, mode-sum form with x = r^2/(2t):
//     H(t,r) = (1/(4*pi*gamma*t)) * S(x),   S(x) = sum_m e^{-x} I_{|m|/gamma}(x),
// which reduces to 1/(4*pi*t) for gamma = 1 since sum_m I_|m|(x) = e^x.
// For x beyond the documented switch point the excess over the plane is
// below 1e-16 relative (it decays like e^{-2 sin^2(pi*gamma) x}) and the
// plane value is returned.

#include <cstddef>

namespace speclab {

double plane_diag(double t);  // 1/(4 pi t)

// sum over modes, certified truncation (monotone decay in m)
double cone_mode_sum(double x, double gamma);

// switch point of the asymptotic (plane) branch, in x = r^2/(2t)
double cone_diag_switch_x(double gamma);

double cone_diag(double t, double r, double gamma);

// c(gamma) = 2*pi*gamma \int_0^inf [cone_diag - plane_diag] r dr
//          = (1/2)    \int_0^inf [S(x) - gamma] dx        (t-independent)
double cone_trace_excess(double gamma);

// renormalized cone integral over {r >= r0}: the finite part, as eps -> 0,
// of  \int_{r0 <= r <= 1/eps} cone_diag(tau, r) dA
//   = (1/2) \int_{x0}^inf [S(x) - gamma] dx - gamma*x0/2,  x0 = r0^2/(2 tau).
double cone_renorm_tail(double tau, double r0, double gamma);

// u_k(1,y): local heat coefficient of C_gamma at r = 1 (n = 2: u0 = 1/4pi,
// u2 = 0 by flatness; odd k vanish).  Throws for unsupported k.
double u_coefficient(double gamma, int k);

}  // namespace speclab
