#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ahss/state_space.hpp"

namespace ahss {

/// Complex amplitude of a harmonic signal at one frequency, one entry per channel.
/// Convention: v_c - j*v_s for the signal v_c cos(w t) + v_s sin(w t).
struct Phasor {
    double omega = 0.0;
    CVec value;

    Phasor() = default;
    Phasor(double omega_, CVec value_);
};

/// Phasor-domain plant at one frequency: y = M u + d.
/// M must have full rank min(l, m); checked via singular values on construction.
struct HarmonicPlantMap {
    CMat M;
    CVec d;

    HarmonicPlantMap(CMat M_, CVec d_);
};

/// Evaluate sum_i Re(p_i) cos(w_i t) - Im(p_i) sin(w_i t) at absolute time t.
Vec synthesize(std::span<const Phasor> phasors, double t);
Vec synthesize(const Phasor& phasor, double t);

/// Single-frequency DFT of a sample window at the exact frequency omega:
/// per channel, (2/N) sum_n y[n] exp(-j w t_n), with absolute sample times.
/// For y = y_c cos(w t) + y_s sin(w t) over integer cycles this returns y_c - j*y_s.
/// The window must span at least one period of omega.
Phasor extract(const Mat& samples, const Vec& sample_times, double omega);

/// y = M u + d.
Phasor hss_response(const HarmonicPlantMap& map, const Phasor& u);

/// Average power of the harmonic signal encoded by the phasor: (1/2) y* y.
double avg_power(const Phasor& y);
double avg_power(const CVec& y);

}  // namespace ahss
