#include "ahss/duct.hpp"

#include <cmath>
#include <stdexcept>

namespace ahss {

void DuctGeometry::validate() const {
    if (length <= 0.0) throw std::invalid_argument("duct length must be positive");
    if (phase_speed <= 0.0 || air_density <= 0.0 || speaker_area <= 0.0)
        throw std::invalid_argument("physical constants must be positive");
    if (mode_count < 1) throw std::invalid_argument("at least one mode is required");
    if (static_cast<int>(damping.size()) != mode_count)
        throw std::invalid_argument("one damping ratio per mode is required");
    for (double z : damping)
        if (!(z > 0.0 && z < 1.0))
            throw std::invalid_argument("damping ratios must lie in (0, 1)");
    auto in_duct = [&](double xi) { return xi > 0.0 && xi < length; };
    if (!in_duct(xi_disturbance))
        throw std::invalid_argument("disturbance speaker must lie inside the duct");
    for (double xi : xi_speakers)
        if (!in_duct(xi)) throw std::invalid_argument("control speakers must lie inside the duct");
    for (double xi : xi_microphones)
        if (!in_duct(xi)) throw std::invalid_argument("microphones must lie inside the duct");
    if (xi_speakers.empty() || xi_microphones.empty())
        throw std::invalid_argument("at least one speaker and one microphone are required");
}

double natural_frequency(const DuctGeometry& g, int i) {
    if (i < 1 || i > g.mode_count) throw std::out_of_range("mode index out of range");
    return i * M_PI * g.phase_speed / g.length;
}

double mode_shape(const DuctGeometry& g, int i, double xi) {
    if (i < 1 || i > g.mode_count) throw std::out_of_range("mode index out of range");
    if (xi < 0.0 || xi > g.length) throw std::out_of_range("position outside the duct");
    return g.phase_speed * std::sqrt(2.0 / g.length) * std::sin(i * M_PI * xi / g.length);
}

StateSpaceModel build_duct(const DuctGeometry& g) {
    g.validate();
    const int r = g.mode_count;
    const int n = 2 * r;
    const int m = static_cast<int>(g.xi_speakers.size());
    const int l = static_cast<int>(g.xi_microphones.size());
    const double gain = g.air_density / g.speaker_area;

    Mat A = Mat::Zero(n, n);
    Mat B = Mat::Zero(n, m);
    Mat C = Mat::Zero(l, n);
    Mat D1 = Mat::Zero(n, 1);
    for (int i = 0; i < r; ++i) {
        const double wn = natural_frequency(g, i + 1);
        A(2 * i, 2 * i + 1) = 1.0;
        A(2 * i + 1, 2 * i) = -wn * wn;
        A(2 * i + 1, 2 * i + 1) = -2.0 * g.damping[i] * wn;
        for (int j = 0; j < m; ++j)
            B(2 * i + 1, j) = gain * mode_shape(g, i + 1, g.xi_speakers[j]);
        for (int j = 0; j < l; ++j)
            C(j, 2 * i + 1) = gain * mode_shape(g, i + 1, g.xi_microphones[j]);
        D1(2 * i + 1, 0) = gain * mode_shape(g, i + 1, g.xi_disturbance);
    }
    return StateSpaceModel(A, B, C, Mat::Zero(l, m), D1, Mat::Zero(l, 1), Vec::Zero(n));
}

}  // namespace ahss
