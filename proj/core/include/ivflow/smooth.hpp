#pragma once

// C1 building blocks for implicit device limits: a logistic saturation and a
// five-region participation curve (flat / quadratic / linear / quadratic /
// flat). Both are immutable value types with analytic derivatives.

#include <array>

namespace ivflow {

enum class Orientation {
    decreasing,  // y -> y_max as x -> -inf
    increasing,  // y -> y_min as x -> -inf
};

/// Exponent arguments beyond this magnitude are treated as saturated.
inline constexpr double kExponentClamp = 745.0;

struct SigmoidSaturation {
    double y_min = 0.0;
    double y_max = 0.0;
    double x_set = 0.0;
    double steepness = 5000.0;
    Orientation orientation = Orientation::decreasing;

    [[nodiscard]] double eval(double x) const;
    [[nodiscard]] double deriv(double x) const;
};

double sigmoid_eval(const SigmoidSaturation& s, double x);
double sigmoid_deriv(const SigmoidSaturation& s, double x);

/// Default patch half-width: 2% of the linear-region input span.
double default_patch_half_width(double kappa, double y_min, double y_max);

class ParticipationCurve {
public:
    /// Throws std::invalid_argument unless kappa > 0, y_min < y_max,
    /// delta > 0 and the two patches leave a non-empty linear stretch
    /// (4 * delta * kappa < y_max - y_min).
    static ParticipationCurve build(double kappa, double y_min, double y_max, double delta);
    static ParticipationCurve build(double kappa, double y_min, double y_max) {
        return build(kappa, y_min, y_max, default_patch_half_width(kappa, y_min, y_max));
    }

    [[nodiscard]] double eval(double x) const;
    [[nodiscard]] double deriv(double x) const;
    /// Region label 1..5 in the order flat-min, patch-min, linear, patch-max, flat-max.
    [[nodiscard]] int region(double x) const;

    [[nodiscard]] double kappa() const { return kappa_; }
    [[nodiscard]] double y_min() const { return y_min_; }
    [[nodiscard]] double y_max() const { return y_max_; }
    [[nodiscard]] double delta() const { return delta_; }
    /// Region boundaries in ascending order.
    [[nodiscard]] std::array<double, 4> breakpoints() const { return {x1_, x2_, x3_, x4_}; }

    // Patch polynomials a*x^2 + b*x + c.
    [[nodiscard]] double a_min() const { return a_min_; }
    [[nodiscard]] double b_min() const { return b_min_; }
    [[nodiscard]] double c_min() const { return c_min_; }
    [[nodiscard]] double a_max() const { return a_max_; }
    [[nodiscard]] double b_max() const { return b_max_; }
    [[nodiscard]] double c_max() const { return c_max_; }

private:
    ParticipationCurve() = default;

    double kappa_ = 1.0, y_min_ = 0.0, y_max_ = 0.0, delta_ = 0.0;
    double x1_ = 0.0, x2_ = 0.0, x3_ = 0.0, x4_ = 0.0;
    double a_min_ = 0.0, b_min_ = 0.0, c_min_ = 0.0;
    double a_max_ = 0.0, b_max_ = 0.0, c_max_ = 0.0;
};

ParticipationCurve participation_build(double kappa, double y_min, double y_max, double delta);
double participation_eval(const ParticipationCurve& p, double x);
double participation_deriv(const ParticipationCurve& p, double x);

}  // namespace ivflow
