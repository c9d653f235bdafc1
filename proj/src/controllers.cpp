#include "ahss/controllers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace ahss {

namespace {

constexpr double kRankThreshold = 1e-8;

void check_full_rank(const CMat& M) {
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= kRankThreshold * sv(0))
        throw std::invalid_argument("degenerate plant map: M is rank deficient");
}

std::vector<std::complex<double>> spectrum(const CMat& A) {
    Eigen::ComplexEigenSolver<CMat> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed to converge");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

OptimalControl optimal_control(const CMat& M_star, const CVec& d_hat) {
    if (M_star.rows() != d_hat.size())
        throw std::invalid_argument("disturbance phasor dimension must match plant outputs");
    check_full_rank(M_star);
    const long l = M_star.rows(), m = M_star.cols();

    OptimalControl out;
    if (l > m) {
        const CMat gram = M_star.adjoint() * M_star;
        out.u_star = -gram.llt().solve(M_star.adjoint() * d_hat);
        out.y_residual = M_star * out.u_star + d_hat;
    } else if (l == m) {
        out.u_star = -M_star.fullPivLu().solve(d_hat);
        out.y_residual = CVec::Zero(l);
    } else {
        const CMat gram = M_star * M_star.adjoint();
        out.u_star = -M_star.adjoint() * gram.llt().solve(d_hat);  // minimum-norm member
        out.y_residual = CVec::Zero(l);
    }
    out.J_min = avg_power(out.y_residual);
    return out;
}

HssController::HssController(CMat M_e, double rho, CVec u0)
    : M_e_(std::move(M_e)), rho_(rho), u_(std::move(u0)) {
    if (rho_ <= 0.0) throw std::invalid_argument("rho must be positive");
    if (u_.size() != M_e_.cols())
        throw std::invalid_argument("initial command dimension must match estimate columns");
}

void HssController::step(const CVec& y_next) {
    if (y_next.size() != M_e_.rows())
        throw std::invalid_argument("output phasor dimension must match estimate rows");
    u_ -= rho_ * (M_e_.adjoint() * y_next);
}

GainBound hss_gain_bound(const CMat& M_e, const CMat& M_star) {
    if (M_e.rows() != M_star.rows() || M_e.cols() != M_star.cols())
        throw std::invalid_argument("estimate and plant dimensions must agree");
    // The two products share their nonzero spectrum; the smaller one carries
    // the intersection.
    GainBound out;
    out.lambda = (M_star.rows() <= M_star.cols()) ? spectrum(M_star * M_e.adjoint())
                                                  : spectrum(M_e.adjoint() * M_star);
    double rho_max = std::numeric_limits<double>::infinity();
    for (const auto& lam : out.lambda) {
        if (lam.real() <= 0.0) return out;  // unstable for every rho
        rho_max = std::min(rho_max, 2.0 * lam.real() / std::norm(lam));
    }
    out.rho_max = rho_max;
    return out;
}

HssLimits hss_limits(const CMat& M_e, const CMat& M_star, const CVec& d_hat, const CVec& u0) {
    if (!hss_gain_bound(M_e, M_star).stabilizable())
        throw std::runtime_error("no limit: fixed-gain loop is divergent for this estimate");
    const long l = M_star.rows(), m = M_star.cols();
    HssLimits out;
    if (l > m) {
        const CMat K = (M_e.adjoint() * M_star).fullPivLu().solve(M_e.adjoint());
        out.u_inf = -K * d_hat;
        out.y_inf = d_hat - M_star * (K * d_hat);
    } else if (l == m) {
        out.u_inf = -M_star.fullPivLu().solve(d_hat);
        out.y_inf = CVec::Zero(l);
    } else {
        const CVec w = (M_star * M_e.adjoint()).fullPivLu().solve(M_star * u0 + d_hat);
        out.u_inf = u0 - M_e.adjoint() * w;
        out.y_inf = CVec::Zero(l);
    }
    return out;
}

CMat ahss_gradient(const CMat& M, const CVec& du, const CVec& dy) {
    return (M * du - dy) * du.adjoint();
}

double ahss_step_size(const CMat& M_prev, const CVec& du, double mu, double gamma,
                      double nu1, double nu2) {
    const double norm2 = nu1 + M_prev.squaredNorm();
    return gamma * norm2 * norm2 / (nu2 * mu * mu + norm2 * norm2 * du.squaredNorm());
}

void AhssGains::validate() const {
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in (0, 1]");
    // gamma == 0 is allowed: it disables adaptation and reduces the controller
    // to the fixed-estimate law.
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (!(nu1 > 0.0)) throw std::invalid_argument("nu1 must be positive");
    if (!(nu2 > 0.0)) throw std::invalid_argument("nu2 must be positive");
}

AhssGains default_gains(const CMat& M0) {
    const double scale = 0.1 * M0.squaredNorm();
    return {0.2, 0.2, scale, scale};
}

double default_rho(const CMat& M0, const AhssGains& gains) {
    return gains.mu / (gains.nu1 + M0.squaredNorm());
}

AhssController::AhssController(CMat M0, CVec u0, AhssGains gains)
    : M_(std::move(M0)), u_curr_(std::move(u0)), gains_(gains) {
    gains_.validate();
    if (M_.norm() == 0.0) throw std::invalid_argument("initial estimate must be nonzero");
    if (u_curr_.size() != M_.cols())
        throw std::invalid_argument("initial command dimension must match estimate columns");
    u_prev_ = u_curr_;
    y_prev_ = CVec::Zero(M_.rows());
}

void AhssController::step(const CVec& y_next) {
    if (y_next.size() != M_.rows())
        throw std::invalid_argument("output phasor dimension must match estimate rows");

    if (k_ >= 1) {
        const CVec du = u_curr_ - u_prev_;
        const CVec dy = y_next - y_prev_;
        const double eta = ahss_step_size(M_, du, gains_.mu, gains_.gamma, gains_.nu1, gains_.nu2);
        const CMat M_next = M_ - eta * ahss_gradient(M_, du, dy);
        if (M_next.norm() == 0.0) {
            collapsed_ = true;  // estimator collapse; hold the previous estimate
        } else {
            M_ = M_next;
        }
    }
    const CVec u_next = u_curr_ - (gains_.mu / (gains_.nu1 + M_.squaredNorm())) * (M_.adjoint() * y_next);
    u_prev_ = u_curr_;
    u_curr_ = u_next;
    y_prev_ = y_next;
    ++k_;
}

void ToneBank::add(double omega, ToneController controller) {
    for (const auto& e : entries_)
        if (e.omega == omega) throw std::invalid_argument("tone frequencies must be distinct");
    entries_.push_back({omega, std::move(controller)});
}

std::vector<Phasor> ToneBank::step(const Mat& samples, const Vec& sample_times) {
    std::vector<Phasor> out;
    out.reserve(entries_.size());
    for (auto& e : entries_) {
        const Phasor y = extract(samples, sample_times, e.omega);
        std::visit([&](auto& ctl) { ctl.step(y.value); }, e.controller);
        out.emplace_back(e.omega, std::visit([](const auto& ctl) { return ctl.command(); }, e.controller));
    }
    return out;
}

std::vector<Phasor> ToneBank::commands() const {
    std::vector<Phasor> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_)
        out.emplace_back(e.omega, std::visit([](const auto& ctl) { return ctl.command(); }, e.controller));
    return out;
}

}  // namespace ahss
