#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>

namespace ahss {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Continuous-time LTI plant
///   x' = A x + B u + D1 d
///   y  = C x + D u + D2 d
/// Dimensions are validated on construction.
struct StateSpaceModel {
    Mat A;   // n x n
    Mat B;   // n x m
    Mat C;   // l x n
    Mat D;   // l x m
    Mat D1;  // n x p
    Mat D2;  // l x p
    Vec x0;  // n

    StateSpaceModel(Mat A_, Mat B_, Mat C_, Mat D_, Mat D1_, Mat D2_, Vec x0_);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int l() const { return static_cast<int>(C.rows()); }
    int p() const { return static_cast<int>(D1.cols()); }
};

enum class Port { Control, Disturbance };

/// Frequency response at s = j*omega for the selected input port:
/// C (j*omega*I - A)^{-1} B + D  (or the D1/D2 pair).
/// Throws std::runtime_error if j*omega is (numerically) an eigenvalue of A.
CMat transfer_at(const StateSpaceModel& model, double omega, Port port = Port::Control);

/// True iff max Re spec(A) < -1e-9.
bool is_asymptotically_stable(const StateSpaceModel& model);

/// Largest eigenvalue magnitude of A; sets the fastest time scale.
double max_eigen_magnitude(const StateSpaceModel& model);

/// Slowest decay rate: min |Re lambda| over spec(A). Valid for stable A.
double slowest_decay_rate(const StateSpaceModel& model);

using SignalSource = std::function<Vec(double)>;

struct SimResult {
    Vec t;       // sample instants
    Mat y;       // l x N, one column per sample
    Vec x_end;   // state at the end of the span, for chained windows
};

/// Fixed-step RK4 simulation of the plant over [t0, t1), sampled at t_k = t0 + k/sample_rate.
/// The integrator sub-steps internally so the fastest mode of A is resolved with at
/// least 10 steps per period; sample_rate itself must resolve the input signals
/// (checked by the caller, which knows the tone frequencies).
/// Passing x_start overrides model.x0 (used to chain windows).
SimResult simulate(const StateSpaceModel& model, const SignalSource& control,
                   const SignalSource& disturbance, double t0, double t1,
                   double sample_rate, const Vec* x_start = nullptr);

/// One tone of the disturbance: d_c cos(w t) + d_s sin(w t).
struct Tone {
    double omega;
    Vec d_c;
    Vec d_s;
};

/// Multi-tone disturbance; frequencies must be positive and pairwise distinct.
struct TonalDisturbance {
    std::vector<Tone> tones;

    explicit TonalDisturbance(std::vector<Tone> tones_);
    TonalDisturbance() = default;

    Vec operator()(double t) const;
    int channels() const { return tones.empty() ? 0 : static_cast<int>(tones.front().d_c.size()); }
};

}  // namespace ahss
