#include "ivflow/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ivflow {

namespace {

double clamped_exponent(const SigmoidSaturation& s, double x) {
    return std::clamp(s.steepness * (x - s.x_set), -kExponentClamp, kExponentClamp);
}

}  // namespace

double SigmoidSaturation::eval(double x) const {
    const double range = y_max - y_min;
    if (range == 0.0) return y_min;
    const double z = clamped_exponent(*this, x);
    // 1 / (1 + e^z) evaluated without overflow on either tail.
    double frac;
    if (z >= 0.0) {
        const double t = std::exp(-z);
        frac = t / (1.0 + t);
    } else {
        frac = 1.0 / (1.0 + std::exp(z));
    }
    return orientation == Orientation::decreasing ? y_min + range * frac : y_max - range * frac;
}

double SigmoidSaturation::deriv(double x) const {
    const double range = y_max - y_min;
    const double raw = steepness * (x - x_set);
    if (range == 0.0 || std::abs(raw) > kExponentClamp) return 0.0;
    const double t = std::exp(-std::abs(raw));
    const double slope = steepness * range * t / ((1.0 + t) * (1.0 + t));
    return orientation == Orientation::decreasing ? -slope : slope;
}

double sigmoid_eval(const SigmoidSaturation& s, double x) { return s.eval(x); }
double sigmoid_deriv(const SigmoidSaturation& s, double x) { return s.deriv(x); }

double default_patch_half_width(double kappa, double y_min, double y_max) {
    return 0.02 * (y_max - y_min) / kappa;
}

ParticipationCurve ParticipationCurve::build(double kappa, double y_min, double y_max, double delta) {
    if (!(kappa > 0.0)) throw std::invalid_argument("participation slope must be positive");
    if (!(y_min < y_max)) throw std::invalid_argument("participation limits must satisfy y_min < y_max");
    if (!(delta > 0.0)) throw std::invalid_argument("participation patch half-width must be positive");
    if (4.0 * delta * kappa >= y_max - y_min) {
        throw std::invalid_argument("participation patches overlap: linear region would vanish");
    }
    ParticipationCurve p;
    p.kappa_ = kappa;
    p.y_min_ = y_min;
    p.y_max_ = y_max;
    p.delta_ = delta;
    p.x1_ = y_min / kappa - delta;
    p.x2_ = y_min / kappa + delta;
    p.x3_ = y_max / kappa - delta;
    p.x4_ = y_max / kappa + delta;

    // Each patch: derivative 0 at the flat side, kappa and value kappa*x at
    // the linear side.
    p.a_min_ = kappa / (4.0 * delta);
    p.b_min_ = kappa - 2.0 * p.a_min_ * p.x2_;
    p.c_min_ = kappa * p.x2_ - p.a_min_ * p.x2_ * p.x2_ - p.b_min_ * p.x2_;
    p.a_max_ = -kappa / (4.0 * delta);
    p.b_max_ = kappa - 2.0 * p.a_max_ * p.x3_;
    p.c_max_ = kappa * p.x3_ - p.a_max_ * p.x3_ * p.x3_ - p.b_max_ * p.x3_;
    return p;
}

int ParticipationCurve::region(double x) const {
    if (x <= x1_) return 1;
    if (x < x2_) return 2;
    if (x <= x3_) return 3;
    if (x < x4_) return 4;
    return 5;
}

// The patches are evaluated in vertex form, which is algebraically identical
// to the a/b/c polynomials but avoids cancellation far from the origin.
double ParticipationCurve::eval(double x) const {
    switch (region(x)) {
        case 1: return y_min_;
        case 2: return y_min_ + kappa_ * (x - x1_) * (x - x1_) / (4.0 * delta_);
        case 3: return kappa_ * x;
        case 4: return y_max_ - kappa_ * (x4_ - x) * (x4_ - x) / (4.0 * delta_);
        default: return y_max_;
    }
}

double ParticipationCurve::deriv(double x) const {
    switch (region(x)) {
        case 2: return kappa_ * (x - x1_) / (2.0 * delta_);
        case 3: return kappa_;
        case 4: return kappa_ * (x4_ - x) / (2.0 * delta_);
        default: return 0.0;
    }
}

ParticipationCurve participation_build(double kappa, double y_min, double y_max, double delta) {
    return ParticipationCurve::build(kappa, y_min, y_max, delta);
}
double participation_eval(const ParticipationCurve& p, double x) { return p.eval(x); }
double participation_deriv(const ParticipationCurve& p, double x) { return p.deriv(x); }

}  // namespace ivflow
