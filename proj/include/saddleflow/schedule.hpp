#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace saddleflow {

/// A time-varying coefficient together with its exact derivative.
struct ValueDeriv {
    double value;
    double deriv;
};

using TimeFn = std::function<ValueDeriv(double)>;

/// c * t^p with exact derivative.
inline TimeFn power_fn(double c, double p) {
    return [c, p](double t) -> ValueDeriv {
        if (p == 0.0) return {c, 0.0};
        return {c * std::pow(t, p), c * p * std::pow(t, p - 1.0)};
    };
}

inline TimeFn zero_fn() {
    return [](double) -> ValueDeriv { return {0.0, 0.0}; };
}

/// The five time-varying coefficients of the dynamics plus the extrapolation
/// constant theta. All functions must be C^1 on [t0, inf); derivatives are
/// exact, not finite differences.
struct Schedule {
    double theta = 0.0;
    double t0 = 1.0;
    TimeFn alpha;    // viscous damping
    TimeFn beta;     // time scaling, beta(t) > 0
    TimeFn gamma;    // Hessian-driven damping; identically zero for ablations
    TimeFn epsilon;  // Tikhonov parameter; nonincreasing, >= 0
};

enum class CondStatus { pass, fail, not_applicable };

struct ConditionViolation {
    std::string condition;
    double t;
    double magnitude;
};

/// Grid-based admissibility report for one schedule. Condition 2 is an
/// equality in the analysis, so it is checked with a relative tolerance;
/// the inequalities use an absolute slack. When gamma vanishes identically
/// on the grid, the conditions that divide by gamma are reported as
/// not-applicable instead of failing.
struct ValidationReport {
    std::vector<double> grid;
    CondStatus cond1 = CondStatus::pass;  // 0 <= gamma + t*dgamma < t*beta
    CondStatus cond2 = CondStatus::pass;  // alpha identity
    CondStatus cond3 = CondStatus::pass;  // dbeta/beta <= (1-2theta)/(theta t)
    CondStatus cond4 = CondStatus::pass;  // alpha + t*dalpha <= (t beta - gamma - t dgamma) eps
    CondStatus quotient = CondStatus::pass;  // bounded below by a positive constant
    CondStatus eps_monotone = CondStatus::pass;
    double witnessed_d = std::numeric_limits<double>::quiet_NaN();
    std::optional<ConditionViolation> worst_violation;

    bool cond1_ok() const { return cond1 != CondStatus::fail; }
    bool cond2_ok() const { return cond2 != CondStatus::fail; }
    bool cond3_ok() const { return cond3 != CondStatus::fail; }
    bool cond4_ok() const { return cond4 != CondStatus::fail; }
    bool quotient_ok() const { return quotient != CondStatus::fail; }
    bool all_ok() const {
        return cond1_ok() && cond2_ok() && cond3_ok() && cond4_ok() && quotient_ok() &&
               eps_monotone != CondStatus::fail;
    }
};

/// Power-law schedule family alpha(t) = a/t, beta(t) = t^b, gamma(t) = g t^(b+1)
/// with theta = 1 / ((a - b - 3)(1 - g b - 2 g)). The admissible region is
/// a > 2b + 5, b >= 0, 0 < g <= (1/(b+2)) (1 - (b+2)/(a-b-3)). The Tikhonov
/// coefficient is caller-supplied; its integral condition is not checked here.
inline Schedule case1_schedule(double alpha_c, double beta_exp, double gamma_c, TimeFn epsilon_fn,
                               double t0 = 1.0) {
    if (!(beta_exp >= 0.0)) {
        throw std::invalid_argument("case1_schedule: requires beta_exp >= 0, got " +
                                    std::to_string(beta_exp));
    }
    if (!(alpha_c > 2.0 * beta_exp + 5.0)) {
        throw std::invalid_argument("case1_schedule: requires alpha_c > 2*beta_exp + 5 = " +
                                    std::to_string(2.0 * beta_exp + 5.0) + ", got " +
                                    std::to_string(alpha_c));
    }
    const double gamma_bound =
        (1.0 / (beta_exp + 2.0)) * (1.0 - (beta_exp + 2.0) / (alpha_c - beta_exp - 3.0));
    if (!(gamma_c > 0.0) || gamma_c > gamma_bound) {
        throw std::invalid_argument("case1_schedule: requires 0 < gamma_c <= " +
                                    std::to_string(gamma_bound) + ", got " +
                                    std::to_string(gamma_c));
    }
    if (!(t0 >= 1.0)) {
        throw std::invalid_argument("case1_schedule: requires t0 >= 1, got " + std::to_string(t0));
    }
    if (!epsilon_fn) throw std::invalid_argument("case1_schedule: epsilon function required");

    Schedule s;
    s.theta = 1.0 / ((alpha_c - beta_exp - 3.0) * (1.0 - gamma_c * beta_exp - 2.0 * gamma_c));
    s.t0 = t0;
    s.alpha = power_fn(alpha_c, -1.0);
    s.beta = power_fn(1.0, beta_exp);
    s.gamma = power_fn(gamma_c, beta_exp + 1.0);
    s.epsilon = std::move(epsilon_fn);
    return s;
}

/// Second schedule family, with alpha(t) = (2+2g)/(g t) + ((b+1)t^(b+2)-2)/(t^(b+3)+2t),
/// gamma(t) = g/t + (g/2) t^(b+1), beta(t) = t^b, theta = g/(2-2g-gb), and the
/// pinned Tikhonov coefficient eps(t) = 4(b+2)^2 / ((2-2g-gb) t^(b+3)).
inline Schedule case2_schedule(double gamma_c, double beta_exp, double t0 = 1.0) {
    if (!(beta_exp >= 0.0)) {
        throw std::invalid_argument("case2_schedule: requires beta_exp >= 0, got " +
                                    std::to_string(beta_exp));
    }
    const double gamma_bound = 1.0 / (beta_exp + 2.0);
    if (!(gamma_c > 0.0) || gamma_c > gamma_bound) {
        throw std::invalid_argument("case2_schedule: requires 0 < gamma_c <= " +
                                    std::to_string(gamma_bound) + ", got " +
                                    std::to_string(gamma_c));
    }
    if (!(t0 >= 1.0)) {
        throw std::invalid_argument("case2_schedule: requires t0 >= 1, got " + std::to_string(t0));
    }

    const double b = beta_exp;
    const double g = gamma_c;
    const double denom = 2.0 - 2.0 * g - g * b;

    Schedule s;
    s.theta = g / denom;
    s.t0 = t0;
    s.beta = power_fn(1.0, b);
    const double a_const = (2.0 + 2.0 * g) / g;
    s.alpha = [a_const, b](double t) -> ValueDeriv {
        const double p = (b + 1.0) * std::pow(t, b + 2.0) - 2.0;
        const double q = std::pow(t, b + 3.0) + 2.0 * t;
        const double dp = (b + 1.0) * (b + 2.0) * std::pow(t, b + 1.0);
        const double dq = (b + 3.0) * std::pow(t, b + 2.0) + 2.0;
        const double value = a_const / t + p / q;
        const double deriv = -a_const / (t * t) + (dp * q - p * dq) / (q * q);
        return {value, deriv};
    };
    s.gamma = [g, b](double t) -> ValueDeriv {
        const double value = g / t + 0.5 * g * std::pow(t, b + 1.0);
        const double deriv = -g / (t * t) + 0.5 * g * (b + 1.0) * std::pow(t, b);
        return {value, deriv};
    };
    const double e_const = 4.0 * (b + 2.0) * (b + 2.0) / denom;
    s.epsilon = [e_const, b](double t) -> ValueDeriv {
        const double value = e_const * std::pow(t, -(b + 3.0));
        const double deriv = -e_const * (b + 3.0) * std::pow(t, -(b + 4.0));
        return {value, deriv};
    };
    return s;
}

/// Wraps user-supplied coefficient functions without admissibility checks;
/// validation is a separate call.
inline Schedule custom_schedule(double theta, TimeFn alpha_fn, TimeFn beta_fn, TimeFn gamma_fn,
                                TimeFn epsilon_fn, double t0) {
    if (!(theta > 0.0)) {
        throw std::invalid_argument("custom_schedule: requires theta > 0, got " +
                                    std::to_string(theta));
    }
    if (!(t0 > 0.0)) {
        throw std::invalid_argument("custom_schedule: requires t0 > 0, got " + std::to_string(t0));
    }
    if (!alpha_fn || !beta_fn || !gamma_fn || !epsilon_fn) {
        throw std::invalid_argument("custom_schedule: all coefficient functions required");
    }
    Schedule s;
    s.theta = theta;
    s.t0 = t0;
    s.alpha = std::move(alpha_fn);
    s.beta = std::move(beta_fn);
    s.gamma = std::move(gamma_fn);
    s.epsilon = std::move(epsilon_fn);
    return s;
}

/// Copy of a schedule with gamma and/or epsilon forced identically to zero.
/// theta is kept from the source schedule so ablated variants stay comparable
/// to the full system.
inline Schedule ablation_variant(const Schedule& s, bool drop_hessian, bool drop_tikhonov) {
    Schedule out = s;
    if (drop_hessian) out.gamma = zero_fn();
    if (drop_tikhonov) out.epsilon = zero_fn();
    return out;
}

/// Checks conditions 1-4 and the boundedness quotient on every grid point.
/// The witnessed D is the infimum of the quotient over the grid.
inline ValidationReport validate(const Schedule& s, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("validate: grid must be nonempty");
    for (double t : grid) {
        if (t < s.t0) {
            throw std::invalid_argument("validate: grid point " + std::to_string(t) +
                                        " below t0 = " + std::to_string(s.t0));
        }
    }

    constexpr double slack = 1e-9;      // absolute, for the inequality conditions
    constexpr double rel_tol = 1e-9;    // relative, for the equality condition 2

    bool gamma_all_zero = true;
    for (double t : grid) {
        if (s.gamma(t).value != 0.0) {
            gamma_all_zero = false;
            break;
        }
    }

    ValidationReport rep;
    rep.grid = grid;

    double worst_mag = 0.0;
    auto record_fail = [&](CondStatus& status, const char* name, double t, double violation) {
        status = CondStatus::fail;
        if (violation > worst_mag) {
            worst_mag = violation;
            rep.worst_violation = ConditionViolation{name, t, violation};
        }
    };

    if (gamma_all_zero) {
        rep.cond2 = CondStatus::not_applicable;
        rep.quotient = CondStatus::not_applicable;
    }

    double d_inf = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const ValueDeriv av = s.alpha(t);
        const ValueDeriv bv = s.beta(t);
        const ValueDeriv gv = s.gamma(t);
        const ValueDeriv ev = s.epsilon(t);

        const double gdot_term = gv.value + t * gv.deriv;  // gamma + t*dgamma
        const double tbeta = t * bv.value;
        const double gap_margin = tbeta - gdot_term;

        if (gdot_term < -slack) record_fail(rep.cond1, "condition1", t, -gdot_term);
        if (gap_margin < -slack) record_fail(rep.cond1, "condition1", t, -gap_margin);

        if (!gamma_all_zero) {
            if (gv.value == 0.0) {
                record_fail(rep.cond2, "condition2", t, std::numeric_limits<double>::infinity());
            } else {
                const double rhs2 =
                    bv.value / (s.theta * gap_margin) + gv.deriv / gv.value + 2.0 / t;
                const double diff = std::abs(av.value - rhs2);
                const double tol2 = rel_tol * std::max(std::abs(av.value), 1e-12);
                if (diff > tol2) record_fail(rep.cond2, "condition2", t, diff);
            }
        }

        const double lhs3 = bv.deriv / bv.value;
        const double rhs3 = (1.0 - 2.0 * s.theta) / (s.theta * t);
        if (lhs3 - rhs3 > slack) record_fail(rep.cond3, "condition3", t, lhs3 - rhs3);

        const double lhs4 = av.value + t * av.deriv;
        const double rhs4 = gap_margin * ev.value;
        if (lhs4 - rhs4 > slack) record_fail(rep.cond4, "condition4", t, lhs4 - rhs4);

        if (!gamma_all_zero && gv.value != 0.0) {
            const double q = tbeta * gdot_term / (gv.value * gap_margin);
            if (q < d_inf) d_inf = q;
        }

        if (ev.value < -slack) record_fail(rep.eps_monotone, "epsilon-nonnegative", t, -ev.value);
        if (ev.deriv > slack) record_fail(rep.eps_monotone, "epsilon-nonincreasing", t, ev.deriv);
    }

    if (!gamma_all_zero) {
        rep.witnessed_d = d_inf;
        if (!(d_inf > 0.0) || !std::isfinite(d_inf)) {
            record_fail(rep.quotient, "boundedness-quotient", grid.front(), d_inf > 0.0 ? 0.0 : -d_inf);
        }
    }
    return rep;
}

}  // namespace saddleflow
