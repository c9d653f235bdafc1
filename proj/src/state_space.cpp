#include "ahss/state_space.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>
#include <sstream>

namespace ahss {

namespace {

constexpr double kStabilityMargin = 1e-9;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXcd eigenvalues(const Mat& A) {
    Eigen::EigenSolver<Mat> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed to converge");
    return solver.eigenvalues();
}

}  // namespace

StateSpaceModel::StateSpaceModel(Mat A_, Mat B_, Mat C_, Mat D_, Mat D1_, Mat D2_, Vec x0_)
    : A(std::move(A_)),
      B(std::move(B_)),
      C(std::move(C_)),
      D(std::move(D_)),
      D1(std::move(D1_)),
      D2(std::move(D2_)),
      x0(std::move(x0_)) {
    require(A.rows() == A.cols(), "A must be square");
    require(B.rows() == A.rows(), "B row count must match state dimension");
    require(C.cols() == A.rows(), "C column count must match state dimension");
    require(D.rows() == C.rows() && D.cols() == B.cols(), "D must be l x m");
    require(D1.rows() == A.rows(), "D1 row count must match state dimension");
    require(D2.rows() == C.rows() && D2.cols() == D1.cols(), "D2 must be l x p");
    require(x0.size() == A.rows(), "x0 length must match state dimension");
}

CMat transfer_at(const StateSpaceModel& model, double omega, Port port) {
    const int n = model.n();
    CMat resolvent = std::complex<double>(0.0, omega) * CMat::Identity(n, n) - model.A.cast<std::complex<double>>();
    Eigen::FullPivLU<CMat> lu(resolvent);
    if (!lu.isInvertible())
        throw std::runtime_error("resonant evaluation: j*omega is an eigenvalue of A");
    const Mat& Bp = (port == Port::Control) ? model.B : model.D1;
    const Mat& Dp = (port == Port::Control) ? model.D : model.D2;
    return model.C.cast<std::complex<double>>() * lu.solve(Bp.cast<std::complex<double>>()) +
           Dp.cast<std::complex<double>>();
}

bool is_asymptotically_stable(const StateSpaceModel& model) {
    return eigenvalues(model.A).real().maxCoeff() < -kStabilityMargin;
}

double max_eigen_magnitude(const StateSpaceModel& model) {
    return eigenvalues(model.A).cwiseAbs().maxCoeff();
}

double slowest_decay_rate(const StateSpaceModel& model) {
    return eigenvalues(model.A).real().cwiseAbs().minCoeff();
}

SimResult simulate(const StateSpaceModel& model, const SignalSource& control,
                   const SignalSource& disturbance, double t0, double t1,
                   double sample_rate, const Vec* x_start) {
    if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be positive");
    if (t1 <= t0) throw std::invalid_argument("empty time span");
    if (!is_asymptotically_stable(model))
        throw std::invalid_argument("simulate requires an asymptotically stable plant");

    const double h_out = 1.0 / sample_rate;
    // Sub-step so the fastest mode is covered by >= 10 integrator steps per period.
    const double fastest = max_eigen_magnitude(model);
    const int substeps = std::max(1, static_cast<int>(std::ceil(10.0 * fastest * h_out / (2.0 * M_PI))));
    const double h = h_out / substeps;

    const long N = std::lround((t1 - t0) * sample_rate);
    SimResult out;
    out.t.resize(N);
    out.y.resize(model.l(), N);

    Vec x = x_start ? *x_start : model.x0;
    auto deriv = [&](double t, const Vec& xs) -> Vec {
        return model.A * xs + model.B * control(t) + model.D1 * disturbance(t);
    };

    for (long k = 0; k < N; ++k) {
        const double tk = t0 + k * h_out;
        out.t(k) = tk;
        out.y.col(k) = model.C * x + model.D * control(tk) + model.D2 * disturbance(tk);
        for (int s = 0; s < substeps; ++s) {
            const double t = tk + s * h;
            const Vec k1 = deriv(t, x);
            const Vec k2 = deriv(t + 0.5 * h, x + 0.5 * h * k1);
            const Vec k3 = deriv(t + 0.5 * h, x + 0.5 * h * k2);
            const Vec k4 = deriv(t + h, x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    out.x_end = x;
    return out;
}

TonalDisturbance::TonalDisturbance(std::vector<Tone> tones_) : tones(std::move(tones_)) {
    std::set<double> seen;
    for (const auto& tone : tones) {
        if (tone.omega <= 0.0) throw std::invalid_argument("tone frequency must be positive");
        if (!seen.insert(tone.omega).second)
            throw std::invalid_argument("tone frequencies must be pairwise distinct");
        if (tone.d_c.size() != tone.d_s.size() ||
            (!tones.empty() && tone.d_c.size() != tones.front().d_c.size()))
            throw std::invalid_argument("tone coefficient dimensions must agree");
    }
}

Vec TonalDisturbance::operator()(double t) const {
    if (tones.empty()) return Vec::Zero(0);
    Vec d = Vec::Zero(tones.front().d_c.size());
    for (const auto& tone : tones)
        d += tone.d_c * std::cos(tone.omega * t) + tone.d_s * std::sin(tone.omega * t);
    return d;
}

}  // namespace ahss
