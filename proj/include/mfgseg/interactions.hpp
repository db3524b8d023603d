#pragma once

#include <string>
#include <vector>

namespace mfgseg {

enum class InteractionKind { Linear, RationalPerturbed };

struct AuditReport {
    double c_lower = 0.0;  // min of g(s)/s over the sample
    double c_upper = 0.0;  // max of g(s)/s over the sample
    double c_g = 0.0;      // tightest single constant, max(c_upper, 1/c_lower)
    bool monotone = false;
    std::vector<double> violations;  // sample points where strict increase fails

    bool pass() const { return monotone && c_lower > 0.0 && violations.empty(); }
};

/// Coupling function with closed-form derivatives up to third order.
///
///   Linear:            g(s) = gamma s
///   RationalPerturbed: g(s) = gamma s + a s^2 / (1 + b s)
///
/// Both satisfy g(0) = 0, g'(0) = gamma, and the low-density split
/// g = gamma s + h with h(0) = h'(0) = 0.
class InteractionSpec {
  public:
    static InteractionSpec linear(double gamma);
    static InteractionSpec rational_perturbed(double gamma, double a, double b);

    InteractionKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double a() const { return a_; }
    double b() const { return b_; }

    /// g and its derivatives: order 0..3. Rejects s < 0.
    double eval(int order, double s) const;

    /// h = g - gamma s and h' = g' - gamma (order 0..1). Rejects s < 0.
    double h_part(int order, double s) const;

    /// Samples g on a 1e4-point grid of (0, s_max]; reports the g(s)/s range
    /// and any strict-monotonicity violations.
    AuditReport audit(double s_max) const;

    std::string kind_name() const;

  private:
    InteractionSpec(InteractionKind kind, double gamma, double a, double b);

    InteractionKind kind_;
    double gamma_;
    double a_;
    double b_;
};

/// The pair (g1, g2). Construction audits both members.
struct InteractionPair {
    InteractionSpec g1;
    InteractionSpec g2;

    InteractionPair(InteractionSpec first, InteractionSpec second);

    /// Single constant serving C_g^{-1} s <= g_i(s) <= C_g s for both members
    /// on (0, s_max].
    double audited_c_g(double s_max) const;
};

}  // namespace mfgseg
