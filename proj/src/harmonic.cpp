#include "ahss/harmonic.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ahss {

namespace {
constexpr double kRankThreshold = 1e-8;
}

Phasor::Phasor(double omega_, CVec value_) : omega(omega_), value(std::move(value_)) {
    if (omega <= 0.0) throw std::invalid_argument("phasor frequency must be positive");
    if (!value.allFinite()) throw std::invalid_argument("phasor entries must be finite");
}

HarmonicPlantMap::HarmonicPlantMap(CMat M_, CVec d_) : M(std::move(M_)), d(std::move(d_)) {
    if (M.rows() != d.size())
        throw std::invalid_argument("plant map output dimensions must agree");
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= kRankThreshold * sv(0))
        throw std::invalid_argument("degenerate plant map: M is rank deficient");
}

Vec synthesize(std::span<const Phasor> phasors, double t) {
    if (phasors.empty()) return Vec::Zero(0);
    Vec u = Vec::Zero(phasors.front().value.size());
    for (const auto& p : phasors) {
        if (p.value.size() != u.size())
            throw std::invalid_argument("phasor channel counts must agree");
        u += p.value.real() * std::cos(p.omega * t) - p.value.imag() * std::sin(p.omega * t);
    }
    return u;
}

Vec synthesize(const Phasor& phasor, double t) {
    return synthesize(std::span<const Phasor>(&phasor, 1), t);
}

Phasor extract(const Mat& samples, const Vec& sample_times, double omega) {
    const long N = sample_times.size();
    if (samples.cols() != N) throw std::invalid_argument("sample/time length mismatch");
    if (N < 2) throw std::invalid_argument("window too short");
    const double span = sample_times(N - 1) - sample_times(0) + (sample_times(1) - sample_times(0));
    if (span * omega < 2.0 * M_PI - 1e-9)
        throw std::invalid_argument("window must span at least one period of omega");

    CVec acc = CVec::Zero(samples.rows());
    for (long n = 0; n < N; ++n) {
        const std::complex<double> kernel = std::polar(1.0, -omega * sample_times(n));
        acc += samples.col(n).cast<std::complex<double>>() * kernel;
    }
    return Phasor(omega, (2.0 / static_cast<double>(N)) * acc);
}

Phasor hss_response(const HarmonicPlantMap& map, const Phasor& u) {
    if (u.value.size() != map.M.cols())
        throw std::invalid_argument("command dimension does not match plant map");
    return Phasor(u.omega, map.M * u.value + map.d);
}

double avg_power(const CVec& y) { return 0.5 * y.squaredNorm(); }

double avg_power(const Phasor& y) { return avg_power(y.value); }

}  // namespace ahss
