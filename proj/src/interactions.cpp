#include "mfgseg/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgseg {

InteractionSpec::InteractionSpec(InteractionKind kind, double gamma, double a, double b)
    : kind_(kind), gamma_(gamma), a_(a), b_(b) {
    if (!(gamma > 0.0)) throw std::invalid_argument("InteractionSpec: gamma must be positive");
    if (kind_ == InteractionKind::RationalPerturbed) {
        if (a < 0.0) throw std::invalid_argument("InteractionSpec: a must be nonnegative");
        if (!(b > 0.0)) throw std::invalid_argument("InteractionSpec: b must be positive");
    }
    if (!(eval(1, 1.0) > 0.0)) throw std::invalid_argument("InteractionSpec: g'(1) must be positive");
}

InteractionSpec InteractionSpec::linear(double gamma) {
    return InteractionSpec(InteractionKind::Linear, gamma, 0.0, 1.0);
}

InteractionSpec InteractionSpec::rational_perturbed(double gamma, double a, double b) {
    return InteractionSpec(InteractionKind::RationalPerturbed, gamma, a, b);
}

double InteractionSpec::eval(int order, double s) const {
    if (s < 0.0) throw std::domain_error("InteractionSpec::eval: negative argument");
    if (order < 0 || order > 3) throw std::invalid_argument("InteractionSpec::eval: order must be 0..3");
    switch (order) {
        case 0: return gamma_ * s + h_part(0, s);
        case 1: return gamma_ + h_part(1, s);
        default: break;
    }
    if (kind_ == InteractionKind::Linear) return 0.0;
    const double q = 1.0 + b_ * s;
    // h(s) = a s^2/(1+bs): h'' = 2a/(1+bs)^3, h''' = -6ab/(1+bs)^4.
    if (order == 2) return 2.0 * a_ / (q * q * q);
    return -6.0 * a_ * b_ / (q * q * q * q);
}

double InteractionSpec::h_part(int order, double s) const {
    if (s < 0.0) throw std::domain_error("InteractionSpec::h_part: negative argument");
    if (order < 0 || order > 1) throw std::invalid_argument("InteractionSpec::h_part: order must be 0..1");
    if (kind_ == InteractionKind::Linear) return 0.0;
    const double q = 1.0 + b_ * s;
    if (order == 0) return a_ * s * s / q;
    return a_ * s * (2.0 + b_ * s) / (q * q);
}

AuditReport InteractionSpec::audit(double s_max) const {
    if (!(s_max > 1.0)) throw std::invalid_argument("InteractionSpec::audit: s_max must exceed 1");
    constexpr int kSamples = 10000;
    AuditReport report;
    report.monotone = true;
    double prev_g = 0.0;  // g(0) = 0
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 1; i <= kSamples; ++i) {
        const double s = s_max * static_cast<double>(i) / kSamples;
        const double g = eval(0, s);
        if (!(g > prev_g)) {
            report.monotone = false;
            report.violations.push_back(s);
        }
        prev_g = g;
        const double ratio = g / s;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    report.c_lower = lo;
    report.c_upper = hi;
    report.c_g = (lo > 0.0) ? std::max(hi, 1.0 / lo) : std::numeric_limits<double>::infinity();
    return report;
}

std::string InteractionSpec::kind_name() const {
    return kind_ == InteractionKind::Linear ? "linear" : "rational_perturbed";
}

InteractionPair::InteractionPair(InteractionSpec first, InteractionSpec second)
    : g1(std::move(first)), g2(std::move(second)) {
    for (const InteractionSpec* spec : {&g1, &g2}) {
        if (!spec->audit(10.0).pass())
            throw std::invalid_argument("InteractionPair: " + spec->kind_name() + " member fails the audit");
    }
}

double InteractionPair::audited_c_g(double s_max) const {
    return std::max(g1.audit(s_max).c_g, g2.audit(s_max).c_g);
}

}  // namespace mfgseg
