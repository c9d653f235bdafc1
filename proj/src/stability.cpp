#include "ahss/stability.hpp"

#include <cmath>

namespace ahss {

LyapunovConstants lyap_constants(Complex M0, Complex M_star, double mu, double gamma,
                                 double nu1, double nu2) {
    AhssGains{mu, gamma, nu1, nu2}.validate();
    if (M0 == Complex(0.0, 0.0)) throw std::invalid_argument("M0 must be nonzero");

    LyapunovConstants c{};
    const double a = std::pow(std::abs(M0) + 2.0 * std::abs(M_star), 2) / nu2;
    c.a = a;
    c.b_stab = 4.0 * a * mu * nu2 / (gamma * nu1 * std::norm(M_star));
    c.c1 = a * mu * nu1 * std::norm(M_star) / std::pow(nu1 + a * nu2, 2);

    if (M0 == M_star) {
        c.c2 = std::abs(M_star);
    } else {
        const Complex Mtilde0 = M0 - M_star;
        const Complex cross = M0 * std::conj(M_star);
        if (cross.imag() == 0.0) {
            if (cross.real() < 0.0)
                throw std::domain_error("outside admissible set: M0 is anti-phase to M_*");
            throw std::domain_error("degenerate constants: M0 is a positive real multiple of M_*");
        }
        c.c2 = std::abs((Mtilde0 * std::conj(M_star)).imag()) / std::abs(Mtilde0);
    }
    c.b_conv = a * mu * nu2 / (gamma * nu1 * c.c2 * c.c2);
    return c;
}

double prop1_gap(const CMat& M_prev, const CMat& M_next, const CMat& M_star,
                 const CVec& y_k, double gamma, double nu2) {
    const double lhs = (M_next - M_star).squaredNorm() - (M_prev - M_star).squaredNorm();
    const CVec filt = M_prev.adjoint() * y_k;
    const double rhs = -gamma * ((M_prev - M_star) * filt).squaredNorm() / (nu2 + filt.squaredNorm());
    return lhs - rhs;
}

double lyap_V(Complex y, Complex M_tilde, double a, double b) {
    return std::log1p(a * std::norm(y)) + b * std::norm(M_tilde);
}

double lyap_bound_margin(const StepRecord& rec, const LyapunovConstants& c) {
    const double y2 = std::norm(rec.y);
    return rec.dV + c.c1 * y2 / (1.0 + c.a * y2);
}

StepTrace siso_closed_loop_iterate(Complex M_star, Complex d_hat, Complex u0, Complex M0,
                                   const AhssGains& gains, long K) {
    gains.validate();
    if (M0 == Complex(0.0, 0.0)) throw std::invalid_argument("M0 must be nonzero");

    StepTrace trace;
    trace.M_star = M_star;
    trace.d_hat = d_hat;
    trace.M0 = M0;
    trace.u0 = u0;
    trace.gains = gains;
    trace.constants = lyap_constants(M0, M_star, gains.mu, gains.gamma, gains.nu1, gains.nu2);
    trace.steps.reserve(K);

    const double b = trace.constants.b_conv;
    Complex y = M_star * u0 + d_hat;  // y_1
    Complex u = u0;                   // u_0
    Complex M = M0;                   // M_0
    trace.y1 = y;

    for (long k = 1; k <= K; ++k) {
        const Complex M_prev = M;
        const double denom = gains.nu1 + std::norm(M_prev);
        const Complex y_next = y - gains.mu * M_star * std::conj(M_prev) * y / denom;
        const Complex u_k = u - (gains.mu / denom) * std::conj(M_prev) * y;

        const double g = gains.gamma / (gains.nu2 + std::norm(M_prev) * std::norm(y));
        const Complex bracket =
            M_prev * std::conj(M_prev) * y + (denom / gains.mu) * (y_next - y);
        const Complex M_k = M_prev - g * bracket * std::conj(y) * M_prev;
        // Model-error contraction factor: M_k - M* = beta_M (M_{k-1} - M*).
        const double beta_M = 1.0 - g * std::norm(y) * std::norm(M_prev);

        StepRecord rec{};
        rec.k = k;
        rec.y = y;
        rec.u = u_k;
        rec.M = M_k;
        const Complex du = u_k - u;
        rec.eta = ahss_step_size((CMat(1, 1) << M_prev).finished(),
                                 (CVec(1) << du).finished(), gains.mu, gains.gamma,
                                 gains.nu1, gains.nu2);
        rec.V = lyap_V(y, M_prev - M_star, trace.constants.a, b);
        // Factored increments avoid the catastrophic cancellation of
        // V_{k+1} - V_k once |y| is far below |Mtilde|.
        rec.dV_M = (beta_M * beta_M - 1.0) * std::norm(M_prev - M_star);
        rec.dV_y = std::norm(y_next) - std::norm(y);
        rec.dV = std::log((1.0 + trace.constants.a * std::norm(y_next)) /
                          (1.0 + trace.constants.a * std::norm(y))) +
                 b * rec.dV_M;
        rec.prop1_gap = prop1_gap((CMat(1, 1) << M_prev).finished(),
                                  (CMat(1, 1) << M_k).finished(),
                                  (CMat(1, 1) << M_star).finished(),
                                  (CVec(1) << y).finished(), gains.gamma, gains.nu2);
        trace.steps.push_back(rec);

        y = y_next;
        u = u_k;
        M = M_k;
    }
    return trace;
}

}  // namespace ahss
