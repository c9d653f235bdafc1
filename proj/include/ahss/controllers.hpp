#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include "ahss/harmonic.hpp"

namespace ahss {

struct OptimalControl {
    CVec u_star;      // minimizer of the average-power cost
    CVec y_residual;  // phasor of the residual performance at u_star
    double J_min;     // residual average power
};

/// Cost-minimizing open-loop phasor command for y = M u + d.
/// l > m: least squares, nonzero residual; l == m: exact inversion;
/// l < m: minimum-norm solution. Throws if M is rank deficient.
OptimalControl optimal_control(const CMat& M_star, const CVec& d_hat);

/// Fixed-estimate controller: u <- u - rho * M_e^H y.
class HssController {
public:
    HssController(CMat M_e, double rho, CVec u0);

    void step(const CVec& y_next);

    const CMat& estimate() const { return M_e_; }
    const CVec& command() const { return u_; }
    double rho() const { return rho_; }

private:
    CMat M_e_;
    double rho_;
    CVec u_;
};

/// Stability data for the fixed-estimate loop y_{k+1} = (I - rho M_* M_e^H) y_k.
/// lambda = spec(M_e^H M_*) ∩ spec(M_* M_e^H). rho_max is empty when some
/// eigenvalue lies outside the open right half-plane (unstable for every rho).
struct GainBound {
    std::vector<std::complex<double>> lambda;
    std::optional<double> rho_max;

    bool stabilizable() const { return rho_max.has_value(); }
};

GainBound hss_gain_bound(const CMat& M_e, const CMat& M_star);

struct HssLimits {
    CVec u_inf;
    CVec y_inf;
};

/// Closed-form limits of the fixed-estimate loop, assuming the gain condition
/// holds. The wide case (l < m) depends on u0. Throws when the loop has no
/// limit (eigenvalue outside the open right half-plane).
HssLimits hss_limits(const CMat& M_e, const CMat& M_star, const CVec& d_hat, const CVec& u0);

/// Complex gradient of (1/2)||M du - dy||^2 with respect to M: [M du - dy] du^H.
CMat ahss_gradient(const CMat& M, const CVec& du, const CVec& dy);

/// Normalized estimator step size
///   gamma (nu1 + ||M||_F^2)^2 / (nu2 mu^2 + (nu1 + ||M||_F^2)^2 ||du||^2).
double ahss_step_size(const CMat& M_prev, const CVec& du, double mu, double gamma,
                      double nu1, double nu2);

struct AhssGains {
    double mu;
    double gamma;
    double nu1;
    double nu2;

    void validate() const;
};

/// mu = gamma = 0.2, nu1 = nu2 = 0.1 ||M0||_F^2.
AhssGains default_gains(const CMat& M0);

/// rho = mu / (nu1 + ||M0||_F^2), the fixed-gain counterpart of the adaptive step.
double default_rho(const CMat& M0, const AhssGains& gains);

/// Adaptive controller: rank-one model update followed by the normalized
/// control update, both driven by the newest output phasor.
class AhssController {
public:
    AhssController(CMat M0, CVec u0, AhssGains gains);

    /// Feed y_{k+1}. For k >= 1 updates the model from (du, dy), then always
    /// updates the command. Sets the collapse flag (and skips adaptation) if
    /// the estimate reaches exactly zero.
    void step(const CVec& y_next);

    const CMat& estimate() const { return M_; }
    const CVec& command() const { return u_curr_; }
    const AhssGains& gains() const { return gains_; }
    long steps_taken() const { return k_; }
    bool collapsed() const { return collapsed_; }

private:
    CMat M_;
    CVec u_prev_, u_curr_;
    CVec y_prev_;
    AhssGains gains_;
    long k_ = 0;
    bool collapsed_ = false;
};

using ToneController = std::variant<HssController, AhssController>;

/// Independent per-frequency controller copies sharing one sample window.
class ToneBank {
public:
    void add(double omega, ToneController controller);

    /// Extract one phasor per tone from the window, step each controller,
    /// return the updated command phasors.
    std::vector<Phasor> step(const Mat& samples, const Vec& sample_times);

    std::vector<Phasor> commands() const;
    std::size_t size() const { return entries_.size(); }
    const ToneController& controller(std::size_t i) const { return entries_[i].controller; }
    ToneController& controller(std::size_t i) { return entries_[i].controller; }
    double omega(std::size_t i) const { return entries_[i].omega; }

private:
    struct Entry {
        double omega;
        ToneController controller;
    };
    std::vector<Entry> entries_;
};

}  // namespace ahss
