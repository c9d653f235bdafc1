#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ahss/stability.hpp"
#include "test_helpers.hpp"

using namespace ahss;
using std::complex;

namespace {

AhssGains gains_for(const Complex& M0) {
    const double s = 0.1 * std::norm(M0);
    return {0.2, 0.2, s, s};
}

// Random M0 kept at least ~1 degree away from the anti-phase ray through M*,
// where the analysis constants blow up, and off the positive ray, where c2
// degenerates.
Complex random_admissible_M0(std::mt19937& rng, const Complex& M_star) {
    std::uniform_real_distribution<double> mag(0.3, 2.5);
    std::uniform_real_distribution<double> phase(-M_PI + 0.02, M_PI - 0.02);
    double th = phase(rng);
    if (std::abs(th) < 0.02) th += 0.04;
    return mag(rng) * std::polar(1.0, th) * M_star;
}

}  // namespace

TEST_CASE("constants for an exact initial model") {
    const Complex M_star(3.0, 4.0);  // |M*| = 5
    const auto c = lyap_constants(M_star, M_star, 0.2, 0.2, 1.0, 2.0);
    CHECK(c.a == doctest::Approx(std::pow(5.0 + 10.0, 2) / 2.0));  // (|M0|+2|M*|)^2/nu2
    CHECK(c.c2 == doctest::Approx(5.0));
    CHECK(c.b_stab == doctest::Approx(4.0 * c.a * 0.2 * 2.0 / (0.2 * 1.0 * 25.0)));
    CHECK(c.b_conv == doctest::Approx(c.a * 0.2 * 2.0 / (0.2 * 1.0 * 25.0)));
    CHECK(c.c1 == doctest::Approx(c.a * 0.2 * 1.0 * 25.0 / std::pow(1.0 + 2.0 * c.a, 2)));
}

TEST_CASE("c2 for a quadrature initial model") {
    // M0 = j M*: Mtilde0 = (j-1)M*, Im(Mtilde0 conj(M*)) = |M*|^2, so
    // c2 = |M*|^2 / (sqrt(2)|M*|) = |M*|/sqrt(2).
    const Complex M_star(2.0, -1.0);
    const auto c = lyap_constants(Complex(0, 1) * M_star, M_star, 0.2, 0.2, 0.5, 0.5);
    CHECK(c.c2 == doctest::Approx(std::abs(M_star) / std::sqrt(2.0)));
}

TEST_CASE("degenerate initial phases are rejected") {
    const Complex M_star(1.0, 2.0);
    CHECK_THROWS_AS(lyap_constants(-0.7 * M_star, M_star, 0.2, 0.2, 0.1, 0.1),
                    std::domain_error);
    CHECK_THROWS_AS(lyap_constants(3.0 * M_star, M_star, 0.2, 0.2, 0.1, 0.1),
                    std::domain_error);
    CHECK_THROWS_AS(lyap_constants(Complex(0, 0), M_star, 0.2, 0.2, 0.1, 0.1),
                    std::invalid_argument);
}

TEST_CASE("prop1 gap is zero for a perfect model") {
    // M_prev = M*: both sides vanish identically.
    const CMat M = (CMat(1, 1) << Complex(1.0, 0.5)).finished();
    const CVec y = (CVec(1) << Complex(2.0, -1.0)).finished();
    CHECK(prop1_gap(M, M, M, y, 0.2, 0.1) == doctest::Approx(0.0));
}

TEST_CASE("estimator contraction holds along random closed-loop runs") {
    std::mt19937 rng(47);
    for (int inst = 0; inst < 100; ++inst) {
        const Complex M_star = testing::random_complex(rng) + Complex(0.2, 0.2);
        const Complex d = testing::random_complex(rng, 2.0);
        const Complex M0 = random_admissible_M0(rng, M_star);
        const auto trace = siso_closed_loop_iterate(M_star, d, Complex(0, 0), M0,
                                                    gains_for(M0), 200);
        double prev_err = std::norm(M0 - M_star);
        for (const auto& rec : trace.steps) {
            CHECK(rec.prop1_gap <= 1e-12);
            const double err = std::norm(rec.M - M_star);
            CHECK(err <= prev_err + 1e-12);  // model error never grows
            prev_err = err;
        }
    }
}

TEST_CASE("Lyapunov inequalities along exact runs") {
    std::mt19937 rng(53);
    int converged = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const Complex M_star = testing::random_complex(rng) + Complex(0.3, 0.3);
        const Complex d = testing::random_complex(rng, 2.0);
        const Complex M0 = random_admissible_M0(rng, M_star);
        const auto trace =
            siso_closed_loop_iterate(M_star, d, Complex(0, 0), M0, gains_for(M0), 2000);
        const auto& c = trace.constants;
        for (const auto& rec : trace.steps) {
            CHECK(lyap_bound_margin(rec, c) <= 1e-12);        // dV <= -c1 |y|^2/(1+a|y|^2)
            CHECK(rec.dV_M <= 1e-12);                         // model error monotone
            CHECK(std::abs(rec.M) >= c.c2 - 1e-12);           // estimate stays off zero
        }
        // Telescoping: V_K - V_1 equals the sum of increments.
        double sum_dV = 0.0;
        for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) sum_dV += trace.steps[i].dV;
        CHECK(trace.steps.back().V - trace.steps.front().V ==
              doctest::Approx(sum_dV).epsilon(1e-9));
        if (std::abs(trace.steps.back().y) < 1e-6 * std::max(std::abs(trace.y1), 1.0))
            ++converged;
    }
    CHECK(converged >= 95);  // the loop converges from almost every admissible start
}

TEST_CASE("beta product telescopes the output magnitude") {
    // y_{k+1} = beta_k y_k with beta_k = 1 - mu M* conj(M_{k-1}) / (nu1 + |M_{k-1}|^2),
    // so |y_K| = |y_1| prod |beta_k|.
    std::mt19937 rng(59);
    for (int inst = 0; inst < 20; ++inst) {
        const Complex M_star = testing::random_complex(rng) + Complex(0.3, 0.3);
        const Complex d = testing::random_complex(rng, 2.0);
        const Complex M0 = random_admissible_M0(rng, M_star);
        const auto g = gains_for(M0);
        const auto trace = siso_closed_loop_iterate(M_star, d, Complex(0, 0), M0, g, 300);

        // y_K = y_1 prod_{k=1}^{K-1} beta_k, beta_k formed from M_{k-1}.
        double log_prod = 0.0;
        Complex M_prev = M0;
        for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
            const Complex beta =
                1.0 - g.mu * M_star * std::conj(M_prev) / (g.nu1 + std::norm(M_prev));
            log_prod += std::log(std::abs(beta));
            M_prev = trace.steps[i].M;
        }
        const double y_last = std::abs(trace.steps.back().y);
        const double want = std::abs(trace.y1) * std::exp(log_prod);
        if (y_last > 1e-280)  // skip once underflow erases the comparison
            CHECK(y_last == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("exact initial model decays geometrically") {
    const Complex M_star(1.0, -0.4), d(2.0, 1.0);
    const auto g = gains_for(M_star);
    const auto trace = siso_closed_loop_iterate(M_star, d, Complex(0, 0), M_star, g, 50);
    // With M_k = M* for all k the contraction factor is constant.
    const double beta = std::abs(1.0 - g.mu * std::norm(M_star) / (g.nu1 + std::norm(M_star)));
    for (std::size_t i = 1; i < trace.steps.size(); ++i) {
        CHECK(std::abs(trace.steps[i].M - M_star) < 1e-12 * std::abs(M_star));
        CHECK(std::abs(trace.steps[i].y) ==
              doctest::Approx(std::abs(trace.steps[i - 1].y) * beta).epsilon(1e-9));
    }
}

TEST_CASE("starting at the optimal command keeps the output at zero") {
    const Complex M_star(0.8, 0.3), d(1.5, -2.0);
    const Complex u_star = -d / M_star;
    const auto trace = siso_closed_loop_iterate(M_star, d, u_star, Complex(0, 1) * M_star,
                                                gains_for(M_star), 40);
    CHECK(std::abs(trace.y1) < 1e-14);
    for (const auto& rec : trace.steps) {
        CHECK(std::abs(rec.y) < 1e-13);
        CHECK(std::abs(rec.u - u_star) < 1e-13);
    }
}

TEST_CASE("stability branch constant with a small initial model error") {
    // |Mtilde0| < |M*|/2 activates the simpler b_stab bound: b_stab >= b_conv
    // requires c2 >= |M*|/2, which holds for small same-magnitude phase errors.
    const Complex M_star(2.0, 0.0);
    const Complex M0 = std::polar(1.0, 0.4) * M_star;  // |Mtilde0| ~ 0.397 |M*|
    const auto c = lyap_constants(M0, M_star, 0.2, 0.2, 0.4, 0.4);
    CHECK(std::abs(M0 - M_star) < 0.5 * std::abs(M_star));
    CHECK(c.c2 > 0.5 * std::abs(M_star));
    CHECK(c.b_stab > c.b_conv);
}

TEST_CASE("trace agrees step-by-step with the controller object") {
    // The phasor-domain recursions and AhssController implement the same loop.
    const Complex M_star(1.1, -0.7), d(0.9, 1.3);
    const Complex M0 = 1.4 * std::polar(1.0, 0.9) * M_star;
    const auto g = gains_for(M0);
    const auto trace = siso_closed_loop_iterate(M_star, d, Complex(0, 0), M0, g, 100);

    // The controller applies the model update one call later than the trace
    // records it: after feeding y_k the estimate is M_{k-1}.
    AhssController ctl((CMat(1, 1) << M0).finished(), CVec::Zero(1), g);
    Complex M_expected = M0;
    for (const auto& rec : trace.steps) {
        ctl.step((CVec(1) << Complex(M_star) * ctl.command()(0) + d).finished());
        CHECK(std::abs(ctl.command()(0) - rec.u) < 1e-12 * (1.0 + std::abs(rec.u)));
        CHECK(std::abs(ctl.estimate()(0, 0) - M_expected) <
              1e-12 * (1.0 + std::abs(M_expected)));
        M_expected = rec.M;
    }
}
