#pragma once

#include <vector>

#include "ahss/state_space.hpp"

namespace ahss {

/// Acoustic duct with speaker/microphone stations, modeled by its first r
/// damped standing-wave modes.
struct DuctGeometry {
    double length = 2.0;                       // m
    double xi_disturbance = 0.95;              // disturbance speaker position, m
    std::vector<double> xi_speakers{0.4, 1.25};  // control speaker positions, m
    std::vector<double> xi_microphones{0.3, 1.7};
    double phase_speed = 343.0;                // m/s
    double air_density = 1.21;                 // kg/m^3
    double speaker_area = 0.0025;              // m^2
    int mode_count = 5;
    std::vector<double> damping{0.2, 0.2, 0.2, 0.2, 0.2};  // per mode

    void validate() const;
};

/// Natural frequency of mode i (1-based): i pi c / L.
double natural_frequency(const DuctGeometry& g, int i);

/// Mode shape V_i(xi) = c sqrt(2/L) sin(i pi xi / L), i 1-based.
double mode_shape(const DuctGeometry& g, int i, double xi);

/// 2r-state modal model: per-mode blocks [[0, 1], [-wn^2, -2 zeta wn]] with
/// state pairs (integral of q_i, q_i); speakers drive and microphones read the
/// q_i states through the mode shapes, scaled by rho0 / A_s. x(0) = 0.
StateSpaceModel build_duct(const DuctGeometry& g);

}  // namespace ahss
