#pragma once

#include <complex>
#include <vector>

#include "ahss/controllers.hpp"

namespace ahss {

using Complex = std::complex<double>;

/// Constants of the SISO Lyapunov analysis.
///   a      = (|M0| + 2|M*|)^2 / nu2
///   b_stab = 4 a mu nu2 / (gamma nu1 |M*|^2)
///   b_conv = a mu nu2 / (gamma nu1 c2^2)
///   c1     = a mu nu1 |M*|^2 / (nu1 + a nu2)^2
///   c2     = |M*| if M0 == M*, else |Im(M0 - M*) conj(M*)| / |M0 - M*|
struct LyapunovConstants {
    double a;
    double b_stab;
    double b_conv;
    double c1;
    double c2;
};

/// Throws when M0 is anti-phase to M* (c2 = 0, outside the admissible set).
LyapunovConstants lyap_constants(Complex M0, Complex M_star, double mu, double gamma,
                                 double nu1, double nu2);

/// Estimator-contraction gap: LHS - RHS of
///   ||M_k - M*||^2 - ||M_{k-1} - M*||^2
///     <= -gamma ||(M_{k-1} - M*) M_{k-1}^H y_k||^2 / (nu2 + ||M_{k-1}^H y_k||^2).
/// Nonpositive (to 1e-12) along exact phasor-domain closed-loop runs.
double prop1_gap(const CMat& M_prev, const CMat& M_next, const CMat& M_star,
                 const CVec& y_k, double gamma, double nu2);

/// V(y, Mtilde) = ln(1 + a |y|^2) + b |Mtilde|^2.
double lyap_V(Complex y, Complex M_tilde, double a, double b);

/// One step of the exact SISO phasor-domain closed loop.
struct StepRecord {
    long k;            // step index, from 1
    Complex y;         // y_k
    Complex u;         // u_k
    Complex M;         // M_k
    double eta;        // estimator step size used at step k
    double V;          // V(y_k, Mtilde_{k-1})
    double dV;         // V(y_{k+1}, Mtilde_k) - V(y_k, Mtilde_{k-1})
    double dV_M;       // |Mtilde_k|^2 - |Mtilde_{k-1}|^2
    double dV_y;       // |y_{k+1}|^2 - |y_k|^2
    double prop1_gap;  // estimator-contraction gap at step k
};

struct StepTrace {
    Complex M_star;
    Complex d_hat;
    Complex M0;
    Complex u0;
    Complex y1;
    AhssGains gains;
    LyapunovConstants constants;  // with b = b_conv in V
    std::vector<StepRecord> steps;
};

/// Iterate the exact SISO closed-loop recursions in phasor space for K steps
/// (no time-domain simulation), recording every Lyapunov quantity.
StepTrace siso_closed_loop_iterate(Complex M_star, Complex d_hat, Complex u0, Complex M0,
                                   const AhssGains& gains, long K);

/// ΔV bound margin at step k: dV + c1 |y_k|^2 / (1 + a |y_k|^2). Nonpositive
/// (to 1e-12) along exact runs with b = b_conv.
double lyap_bound_margin(const StepRecord& rec, const LyapunovConstants& c);

}  // namespace ahss
