#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ivflow/smooth.hpp"

using namespace ivflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <typename F>
double central_difference(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double fd_error(double analytic, double numeric) { return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)); }

}  // namespace

TEST_CASE("sigmoid midpoint and saturated values") {
    const SigmoidSaturation s{-1.0, 1.0, 1.0, 5000.0, Orientation::decreasing};
    CHECK(s.eval(1.0) == 0.0);
    CHECK_THAT(s.eval(1.01), WithinAbs(-1.0, 1e-20));
    CHECK(s.eval(-1e6) == 1.0);
    CHECK(s.eval(1e6) == -1.0);

    // Shifted to [0, 2] so the tiny offset from the limit survives in double.
    // Reference from a 50-digit evaluation.
    const SigmoidSaturation shifted{0.0, 2.0, 1.0, 5000.0, Orientation::decreasing};
    CHECK_THAT(shifted.eval(1.01), WithinRel(3.857499695927836e-22, 1e-12));
}

TEST_CASE("sigmoid with a degenerate range is constant") {
    const SigmoidSaturation s{0.5, 0.5, 1.0, 5000.0, Orientation::decreasing};
    for (double x : {-10.0, 0.99, 1.0, 1.001, 7.0}) {
        CHECK(s.eval(x) == 0.5);
        CHECK(s.deriv(x) == 0.0);
    }
}

TEST_CASE("sigmoid derivative") {
    const SigmoidSaturation s{-1.0, 1.0, 1.0, 5000.0, Orientation::decreasing};
    CHECK_THAT(s.deriv(1.0), WithinRel(-2500.0, 1e-14));
    CHECK(s.deriv(1.0 + 746.0 / 5000.0) == 0.0);
    CHECK(s.deriv(1.0 - 746.0 / 5000.0) == 0.0);

    const SigmoidSaturation up{-1.0, 1.0, 1.0, 5000.0, Orientation::increasing};
    CHECK_THAT(up.deriv(1.0), WithinRel(2500.0, 1e-14));
    CHECK(up.eval(-1e3) == -1.0);
    CHECK(up.eval(1e3) == 1.0);
}

TEST_CASE("sigmoid derivative matches finite differences at random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
        const double lo = -2.0 + 2.0 * unit(rng);
        const double hi = lo + 0.01 + 3.0 * unit(rng);
        const double steep = k % 2 == 0 ? 5000.0 : 100.0 + 900.0 * unit(rng);
        const auto orient = k % 3 == 0 ? Orientation::increasing : Orientation::decreasing;
        const SigmoidSaturation s{lo, hi, 0.9 + 0.2 * unit(rng), steep, orient};
        // Half the points inside the transition band, half anywhere nearby.
        const double span = k % 4 < 2 ? 8.0 / steep : 0.3;
        const double x = s.x_set + span * (2.0 * unit(rng) - 1.0);
        const double fd = central_difference([&](double v) { return s.eval(v); }, x, 1e-7);
        INFO("x=" << x << " S=" << steep);
        CHECK(fd_error(s.deriv(x), fd) < 1e-5);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("sigmoid is monotone and bounded") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> around(0.95, 1.05);
    const SigmoidSaturation s{-0.3, 0.7, 1.0, 5000.0, Orientation::decreasing};
    for (int k = 0; k < 2000; ++k) {
        double x1 = around(rng);
        double x2 = around(rng);
        if (x1 > x2) std::swap(x1, x2);
        CHECK(s.eval(x1) >= s.eval(x2));
        CHECK(s.eval(x1) >= s.y_min);
        CHECK(s.eval(x1) <= s.y_max);
        if (x2 - x1 > 1e-9 && std::abs(x1 - 1.0) < 1e-3) CHECK(s.eval(x1) > s.eval(x2));
    }
    for (double x : {-1e300, -1e10, 1e10, 1e300}) {
        CHECK(s.eval(x) >= s.y_min);
        CHECK(s.eval(x) <= s.y_max);
    }
}

TEST_CASE("sigmoid at S = 5000 is within 0.4% of range outside the transition band") {
    const double threshold = std::log(249.0) / 5000.0;
    CHECK_THAT(threshold, WithinAbs(1.104e-3, 1e-6));
    const SigmoidSaturation s{-1.0, 1.0, 1.0, 5000.0, Orientation::decreasing};
    const double range = s.y_max - s.y_min;
    for (int k = 0; k <= 1000; ++k) {
        const double d = threshold + 1e-12 + 0.05 * k / 1000.0;
        CHECK(std::abs(s.eval(1.0 + d) - s.y_min) <= 0.004 * range);
        CHECK(std::abs(s.eval(1.0 - d) - s.y_max) <= 0.004 * range);
    }
    // Just inside the band the bound no longer holds.
    CHECK(std::abs(s.eval(1.0 + 0.9 * threshold) - s.y_min) > 0.004 * range);
}

TEST_CASE("participation patch coefficients") {
    const auto p = ParticipationCurve::build(1.0, -1.0, 1.0, 0.1);
    // Symbolic solution of the C1 conditions at x = 0.9 and x = 1.1.
    CHECK_THAT(p.a_max(), WithinAbs(-2.5, 1e-12));
    CHECK_THAT(p.b_max(), WithinAbs(5.5, 1e-12));
    CHECK_THAT(p.c_max(), WithinAbs(-2.025, 1e-12));
    CHECK_THAT(p.a_min(), WithinAbs(2.5, 1e-12));
    CHECK_THAT(p.b_min(), WithinAbs(5.5, 1e-12));
    CHECK_THAT(p.c_min(), WithinAbs(2.025, 1e-12));
    const auto bp = p.breakpoints();
    CHECK_THAT(bp[0], WithinAbs(-1.1, 1e-15));
    CHECK_THAT(bp[1], WithinAbs(-0.9, 1e-15));
    CHECK_THAT(bp[2], WithinAbs(0.9, 1e-15));
    CHECK_THAT(bp[3], WithinAbs(1.1, 1e-15));
}

TEST_CASE("participation build preconditions") {
    CHECK_THROWS_AS(ParticipationCurve::build(1.0, -1.0, 1.0, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(ParticipationCurve::build(0.0, -1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(ParticipationCurve::build(1.0, 1.0, -1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(ParticipationCurve::build(1.0, -1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(ParticipationCurve::build(1.0, -1.0, 1.0, 0.49));
}

TEST_CASE("participation evaluation examples") {
    const auto p = ParticipationCurve::build(0.25, -10.0, 10.0, 0.01);
    CHECK(p.eval(0.0) == 0.0);
    CHECK(p.eval(2.0) == 0.5);
    CHECK(p.eval(1e9) == 10.0);
    CHECK(p.eval(-1e9) == -10.0);
    CHECK(p.region(0.0) == 3);
    CHECK(p.region(1e9) == 5);
    CHECK(p.region(-1e9) == 1);
    CHECK(p.region(40.0) == 4);
    CHECK(p.region(-40.0) == 2);
    CHECK(ParticipationCurve::build(0.8, -3.0, 5.0).eval(0.0) == 0.0);
}

TEST_CASE("participation is continuous at the breakpoints") {
    for (const auto& p : {ParticipationCurve::build(1.0, -1.0, 1.0, 0.1), ParticipationCurve::build(0.23, -7.5, 0.6),
                          ParticipationCurve::build(0.03, -1.0, 0.17)}) {
        for (double xb : p.breakpoints()) {
            CHECK(std::abs(p.eval(xb - 1e-9) - p.eval(xb + 1e-9)) < 1e-7 * (p.y_max() - p.y_min()));
        }
    }
}

TEST_CASE("participation is exact in its linear and flat regions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double kappa = 0.01 + unit(rng);
        const double lo = -1.0 - 5.0 * unit(rng);
        const double hi = 0.1 + 5.0 * unit(rng);
        const auto p = ParticipationCurve::build(kappa, lo, hi);
        const auto bp = p.breakpoints();
        const double x_lin = bp[1] + (bp[2] - bp[1]) * unit(rng);
        if (p.region(x_lin) == 3) CHECK(p.eval(x_lin) == kappa * x_lin);
        CHECK(p.eval(bp[0] - 1.0 - unit(rng)) == lo);
        CHECK(p.eval(bp[3] + 1.0 + unit(rng)) == hi);
    }
}

TEST_CASE("participation derivative matches finite differences at random points and near breakpoints") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
        const double kappa = 0.02 + 2.0 * unit(rng);
        const double lo = -0.5 - 5.0 * unit(rng);
        const double hi = 0.2 + 5.0 * unit(rng);
        const auto p = ParticipationCurve::build(kappa, lo, hi);
        const auto bp = p.breakpoints();
        double x = 0.0;
        if (k % 3 == 0) {
            x = bp[k % 4] + (k % 2 == 0 ? 1e-6 : -1e-6);
        } else if (k % 3 == 1) {
            x = bp[k % 4] + 2.0 * p.delta() * (2.0 * unit(rng) - 1.0);
        } else {
            x = (bp[0] - 1.0) + (bp[3] - bp[0] + 2.0) * unit(rng);
        }
        const double fd = central_difference([&](double v) { return p.eval(v); }, x, 1e-8);
        INFO("x=" << x << " kappa=" << kappa);
        CHECK(fd_error(p.deriv(x), fd) < 1e-5);
        ++checked;
    }
    CHECK(checked == 1000);
}
