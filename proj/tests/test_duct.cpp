#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ahss/duct.hpp"

using namespace ahss;
using std::complex;

TEST_CASE("mode shapes and natural frequencies") {
    DuctGeometry g;
    // wn_i = i pi c / L
    CHECK(natural_frequency(g, 1) == doctest::Approx(M_PI * 343.0 / 2.0));
    CHECK(natural_frequency(g, 5) == doctest::Approx(5.0 * M_PI * 343.0 / 2.0));
    // V_i(xi) = c sqrt(2/L) sin(i pi xi / L)
    CHECK(mode_shape(g, 1, 1.0) == doctest::Approx(343.0));            // sin(pi/2) = 1
    CHECK(std::abs(mode_shape(g, 2, 1.0)) < 1e-10);
    CHECK(mode_shape(g, 1, 0.5) == doctest::Approx(343.0 * std::sin(M_PI / 4.0)));
    CHECK(std::abs(mode_shape(g, 3, 0.0)) < 1e-10);
    CHECK(std::abs(mode_shape(g, 3, 2.0)) < 1e-10);  // pinned at both ends
}

TEST_CASE("model dimensions and structure") {
    DuctGeometry g;
    const auto model = build_duct(g);
    CHECK(model.n() == 10);  // 2 states per mode
    CHECK(model.m() == 2);
    CHECK(model.l() == 2);
    CHECK(model.p() == 1);
    CHECK(model.D.cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.D2.cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.x0.cwiseAbs().maxCoeff() == 0.0);
    // block-diagonal A: no coupling between modes
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            if (i / 2 != j / 2) CHECK(model.A(i, j) == 0.0);
    // position states are not driven and carry no output
    for (int i = 0; i < 5; ++i) {
        CHECK(model.B.row(2 * i).cwiseAbs().maxCoeff() == 0.0);
        CHECK(model.D1.row(2 * i).cwiseAbs().maxCoeff() == 0.0);
        CHECK(model.C.col(2 * i).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("spectrum matches the damped modal eigenvalues") {
    DuctGeometry g;
    const auto model = build_duct(g);
    Eigen::EigenSolver<Mat> es(model.A);
    std::vector<complex<double>> got(es.eigenvalues().data(),
                                     es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<complex<double>> want;
    for (int i = 1; i <= g.mode_count; ++i) {
        const double wn = natural_frequency(g, i), z = g.damping[i - 1];
        want.emplace_back(-z * wn, wn * std::sqrt(1.0 - z * z));
        want.emplace_back(-z * wn, -wn * std::sqrt(1.0 - z * z));
    }
    auto by_parts = [](const complex<double>& a, const complex<double>& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(got.begin(), got.end(), by_parts);
    std::sort(want.begin(), want.end(), by_parts);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) < 1e-9 * std::abs(want[i]));
}

TEST_CASE("speaker/microphone reciprocity") {
    // Swapping a speaker and a microphone position transposes the gain.
    DuctGeometry g;
    g.xi_speakers = {0.4, 1.25};
    g.xi_microphones = {0.3, 1.7};
    DuctGeometry swapped = g;
    swapped.xi_speakers = {0.3, 1.7};
    swapped.xi_microphones = {0.4, 1.25};
    const double omega = 251.0;
    const CMat G1 = transfer_at(build_duct(g), omega, Port::Control);
    const CMat G2 = transfer_at(build_duct(swapped), omega, Port::Control);
    CHECK((G1 - G2.transpose()).norm() < 1e-10 * G1.norm());
}

TEST_CASE("collocated frequency response is positive real") {
    DuctGeometry g;
    g.xi_speakers = {0.6};
    g.xi_microphones = {0.6};
    const auto model = build_duct(g);
    for (double omega : {50.0, 251.0, 628.0, 1500.0, 2600.0})
        CHECK(transfer_at(model, omega, Port::Control)(0, 0).real() > 0.0);
}

TEST_CASE("geometry validation") {
    auto reject = [](auto mutate) {
        DuctGeometry g;
        mutate(g);
        CHECK_THROWS_AS(build_duct(g), std::invalid_argument);
    };
    reject([](DuctGeometry& g) { g.length = 0.0; });
    reject([](DuctGeometry& g) { g.mode_count = 0; });
    reject([](DuctGeometry& g) { g.damping = {0.2}; });             // wrong count
    reject([](DuctGeometry& g) { g.damping[2] = 0.0; });            // undamped mode
    reject([](DuctGeometry& g) { g.xi_speakers = {}; });
    reject([](DuctGeometry& g) { g.xi_microphones[0] = 2.5; });     // outside the duct
    reject([](DuctGeometry& g) { g.xi_disturbance = -0.1; });
    reject([](DuctGeometry& g) { g.speaker_area = 0.0; });
}
