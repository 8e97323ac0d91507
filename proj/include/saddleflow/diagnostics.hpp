#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "saddleflow/problem.hpp"
#include "saddleflow/schedule.hpp"
#include "saddleflow/types.hpp"

namespace saddleflow {

/// A timestamped state as emitted by an experiment run.
struct TrajectorySample {
    double t;
    SystemState state;
    double accepted_step;
};

/// Everything the convergence analysis bounds, evaluated at one sample.
/// energy_e / energy_ebar are absent (not zero) when the schedule has
/// gamma = 0, because the Lyapunov weights divide by gamma.
struct DiagnosticsRecord {
    double t = 0.0;
    double gap = 0.0;         // L(x, y*) - L(x*, y)
    double grad_f_res = 0.0;  // ||grad f(x) - grad f(x*)||
    double grad_g_res = 0.0;  // ||grad g(y) - grad g(y*)||
    double delta = 0.0;       // squared extrapolated augmented-gradient norms
    double res_x = 0.0;       // ||vx + gamma grad_x L_t(x, y + theta t vy)||
    double res_y = 0.0;       // ||vy - gamma grad_y L_t(x + theta t vx, y)||
    std::optional<double> energy_e;
    std::optional<double> energy_ebar;
    double norm_z = 0.0;
    double dist_to_saddle = 0.0;
    double speed_sq = 0.0;  // ||vx||^2 + ||vy||^2, consumed by the integral estimates
};

/// Running trapezoidal integrals of the five integral-estimate integrands,
/// each with its most recent increment. The velocity integrand divides by
/// gamma, so it is frozen (marked inapplicable) on gamma = 0 schedules.
struct IntegralAccumulators {
    double gap_total = 0.0, gap_last = 0.0;          // t ((1-2theta)beta - theta t dbeta) gap
    double grad_f_total = 0.0, grad_f_last = 0.0;    // same weight, ||grad f residual||^2
    double grad_g_total = 0.0, grad_g_last = 0.0;
    double speed_total = 0.0, speed_last = 0.0;      // t (gamma + t dgamma)/gamma * speed_sq
    bool speed_applicable = true;
    double delta_total = 0.0, delta_last = 0.0;      // t gamma (t beta - gamma - t dgamma) Delta
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
};

struct OscillationReport {
    long local_maxima_count = 0;
    double total_variation_log = 0.0;  // TV of log10(value) over the samples
    double largest_rebound = 0.0;      // max rise of log10(value) from the running minimum
};

namespace detail {

inline void require_saddle(const SaddleProblem& p, const Vec& x_star, const Vec& y_star,
                           double tol, const char* op) {
    const auto [rx, ry] = optimality_residuals(p, x_star, y_star);
    if (rx > tol || ry > tol) {
        throw std::invalid_argument(std::string(op) + ": saddle optimality residuals (" +
                                    std::to_string(rx) + ", " + std::to_string(ry) +
                                    ") exceed " + std::to_string(tol));
    }
}

}  // namespace detail

/// Lyapunov energy E(t) of the fast-epsilon analysis. Requires gamma(t) > 0
/// and t beta - gamma - t dgamma > 0; otherwise the energy is undefined and
/// nullopt is returned.
inline std::optional<double> energy_e(const SaddleProblem& p, const Schedule& s,
                                      const TrajectorySample& sample,
                                      const std::pair<Vec, Vec>& saddle) {
    const double t = sample.t;
    const ValueDeriv gv = s.gamma(t);
    const double tbeta = t * s.beta(t).value;
    const double denom = tbeta - gv.value - t * gv.deriv;
    if (!(gv.value > 0.0) || !(denom > 0.0)) return std::nullopt;

    const double theta = s.theta;
    const double eps = s.epsilon(t).value;
    const SystemState& st = sample.state;
    const auto& [x_star, y_star] = saddle;

    const double eta = tbeta / (theta * denom);
    const double n_t = tbeta * (gv.value + t * gv.deriv) / (theta * gv.value * denom);

    const double gap = lagrangian(p, st.x, y_star) - lagrangian(p, x_star, st.y);
    const double e1 =
        t * tbeta * (gap + 0.5 * eps * (st.x.squaredNorm() + st.y.squaredNorm()));

    const Vec gx = grad_x_aug(p, st.x, st.y + theta * t * st.vy, eps);
    const Vec gy = grad_y_aug(p, st.x + theta * t * st.vx, st.y, eps);
    const double e2 = 0.5 * (eta * (st.x - x_star) + t * (st.vx + gv.value * gx)).squaredNorm() +
                      0.5 * n_t * (st.x - x_star).squaredNorm();
    const double e3 = 0.5 * (eta * (st.y - y_star) + t * (st.vy - gv.value * gy)).squaredNorm() +
                      0.5 * n_t * (st.y - y_star).squaredNorm();
    return e1 + e2 + e3;
}

/// Rescaled Lyapunov energy Ebar(t) of the slow-epsilon analysis; the weights
/// are eta/t and n/t^2 relative to E(t) and the leading block carries beta
/// instead of t^2 beta.
inline std::optional<double> energy_ebar(const SaddleProblem& p, const Schedule& s,
                                         const TrajectorySample& sample,
                                         const std::pair<Vec, Vec>& saddle) {
    const double t = sample.t;
    const ValueDeriv gv = s.gamma(t);
    const double beta = s.beta(t).value;
    const double tbeta = t * beta;
    const double denom = tbeta - gv.value - t * gv.deriv;
    if (!(gv.value > 0.0) || !(denom > 0.0)) return std::nullopt;

    const double theta = s.theta;
    const double eps = s.epsilon(t).value;
    const SystemState& st = sample.state;
    const auto& [x_star, y_star] = saddle;

    const double eta_bar = beta / (theta * denom);
    const double n_bar = beta * (gv.value + t * gv.deriv) / (theta * t * gv.value * denom);

    const double gap = lagrangian(p, st.x, y_star) - lagrangian(p, x_star, st.y);
    const double e1 = beta * (gap + 0.5 * eps * (st.x.squaredNorm() + st.y.squaredNorm()));

    const Vec gx = grad_x_aug(p, st.x, st.y + theta * t * st.vy, eps);
    const Vec gy = grad_y_aug(p, st.x + theta * t * st.vx, st.y, eps);
    const double e2 = 0.5 * (eta_bar * (st.x - x_star) + st.vx + gv.value * gx).squaredNorm() +
                      0.5 * n_bar * (st.x - x_star).squaredNorm();
    const double e3 = 0.5 * (eta_bar * (st.y - y_star) + st.vy - gv.value * gy).squaredNorm() +
                      0.5 * n_bar * (st.y - y_star).squaredNorm();
    return e1 + e2 + e3;
}

/// Fills a full diagnostics record for one sample against a reference saddle.
/// The residual norms use the extrapolated arguments, matching the pointwise
/// estimates they are compared to.
inline DiagnosticsRecord record(const SaddleProblem& p, const Schedule& s,
                                const TrajectorySample& sample,
                                const std::pair<Vec, Vec>& saddle) {
    const auto& [x_star, y_star] = saddle;
    detail::require_saddle(p, x_star, y_star, 1e-8, "record");

    const double t = sample.t;
    const double theta = s.theta;
    const double gamma = s.gamma(t).value;
    const double eps = s.epsilon(t).value;
    const SystemState& st = sample.state;

    DiagnosticsRecord r;
    r.t = t;
    r.gap = lagrangian(p, st.x, y_star) - lagrangian(p, x_star, st.y);
    r.grad_f_res = (p.f_grad(st.x) - p.f_grad(x_star)).norm();
    r.grad_g_res = (p.g_grad(st.y) - p.g_grad(y_star)).norm();

    const Vec gx = grad_x_aug(p, st.x, st.y + theta * t * st.vy, eps);
    const Vec gy = grad_y_aug(p, st.x + theta * t * st.vx, st.y, eps);
    r.delta = gx.squaredNorm() + gy.squaredNorm();
    r.res_x = (st.vx + gamma * gx).norm();
    r.res_y = (st.vy - gamma * gy).norm();

    r.energy_e = energy_e(p, s, sample, saddle);
    r.energy_ebar = energy_ebar(p, s, sample, saddle);

    r.norm_z = std::sqrt(st.x.squaredNorm() + st.y.squaredNorm());
    r.dist_to_saddle =
        std::sqrt((st.x - x_star).squaredNorm() + (st.y - y_star).squaredNorm());
    r.speed_sq = st.vx.squaredNorm() + st.vy.squaredNorm();
    return r;
}

namespace detail {

struct IntegrandValues {
    double gap;
    double grad_f;
    double grad_g;
    double speed;
    bool speed_ok;
    double delta;
};

inline IntegrandValues integrands_at(const DiagnosticsRecord& rec, const Schedule& s) {
    const double t = rec.t;
    const ValueDeriv bv = s.beta(t);
    const ValueDeriv gv = s.gamma(t);
    const double theta = s.theta;

    IntegrandValues iv{};
    const double beta_weight = t * ((1.0 - 2.0 * theta) * bv.value - theta * t * bv.deriv);
    iv.gap = beta_weight * rec.gap;
    iv.grad_f = beta_weight * rec.grad_f_res * rec.grad_f_res;
    iv.grad_g = beta_weight * rec.grad_g_res * rec.grad_g_res;
    iv.speed_ok = gv.value != 0.0;
    iv.speed = iv.speed_ok ? t * (gv.value + t * gv.deriv) / gv.value * rec.speed_sq : 0.0;
    iv.delta = t * gv.value * (t * bv.value - gv.value - t * gv.deriv) * rec.delta;
    return iv;
}

}  // namespace detail

/// Trapezoidal update of all five integral estimates between two consecutive
/// records.
inline IntegralAccumulators accumulate(IntegralAccumulators acc, const DiagnosticsRecord& prev,
                                       const DiagnosticsRecord& cur, const Schedule& s) {
    if (!(cur.t > prev.t)) {
        throw std::invalid_argument("accumulate: sample times must be strictly increasing");
    }
    const auto a = detail::integrands_at(prev, s);
    const auto b = detail::integrands_at(cur, s);
    const double half_dt = 0.5 * (cur.t - prev.t);

    acc.gap_last = half_dt * (a.gap + b.gap);
    acc.gap_total += acc.gap_last;
    acc.grad_f_last = half_dt * (a.grad_f + b.grad_f);
    acc.grad_f_total += acc.grad_f_last;
    acc.grad_g_last = half_dt * (a.grad_g + b.grad_g);
    acc.grad_g_total += acc.grad_g_last;
    if (!a.speed_ok || !b.speed_ok) {
        acc.speed_applicable = false;
    } else if (acc.speed_applicable) {
        acc.speed_last = half_dt * (a.speed + b.speed);
        acc.speed_total += acc.speed_last;
    }
    acc.delta_last = half_dt * (a.delta + b.delta);
    acc.delta_total += acc.delta_last;
    return acc;
}

/// Least-squares power-law fit of a positive series over a time window:
/// a line through (log10 t, log10 value). The slope is the fitted exponent.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& samples, double t_lo,
                        double t_hi) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [t, v] : samples) {
        if (t < t_lo || t > t_hi) continue;
        if (!(v > 0.0)) {
            throw std::invalid_argument("fit_rate: nonpositive value at t = " + std::to_string(t) +
                                        "; floor the series first");
        }
        pts.emplace_back(std::log10(t), std::log10(v));
    }
    if (pts.size() < 8) {
        throw std::invalid_argument("fit_rate: window holds " + std::to_string(pts.size()) +
                                    " samples, need at least 8");
    }

    const double n = static_cast<double>(pts.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }

    RateFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return fit;
}

/// Counts noise-filtered local maxima and measures the log-domain total
/// variation and the largest rebound of a positive series. A maximum counts
/// only when it exceeds the later neighbor by a relative 1e-3, which keeps
/// round-off wiggle near convergence out of the count.
inline OscillationReport oscillation_metrics(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 3) {
        throw std::invalid_argument("oscillation_metrics: need at least 3 samples");
    }
    for (const auto& [t, v] : samples) {
        if (!(v > 0.0)) {
            throw std::invalid_argument("oscillation_metrics: nonpositive value at t = " +
                                        std::to_string(t));
        }
    }

    OscillationReport rep;
    constexpr double rel_threshold = 1e-3;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double v = samples[i].second;
        const double before = samples[i - 1].second;
        const double after = samples[i + 1].second;
        if (v > before && v > after && (v - after) > rel_threshold * after) {
            ++rep.local_maxima_count;
        }
    }

    double trough = samples.front().second;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double v = samples[i].second;
        rep.total_variation_log += std::abs(std::log10(v) - std::log10(samples[i - 1].second));
        if (v < trough) {
            trough = v;
        } else {
            rep.largest_rebound = std::max(rep.largest_rebound, std::log10(v / trough));
        }
    }
    return rep;
}

/// Slack of the strong convexity/concavity inequalities of the augmented
/// Lagrangian at one sample: both components are nonnegative up to round-off
/// whenever (x*, y*) is a saddle point.
inline std::pair<double, double> check_prop1(const SaddleProblem& p, const Schedule& s,
                                             const TrajectorySample& sample,
                                             const std::pair<Vec, Vec>& saddle) {
    const auto& [x_star, y_star] = saddle;
    detail::require_saddle(p, x_star, y_star, 1e-8, "check_prop1");
    const double eps = s.epsilon(sample.t).value;
    const SystemState& st = sample.state;

    const double l_star = lagrangian(p, x_star, y_star);

    const double lhs_x = grad_x_aug(p, st.x, y_star, eps).dot(x_star - st.x);
    const double rhs_x =
        l_star - lagrangian(p, st.x, y_star) +
        0.5 * eps *
            (x_star.squaredNorm() - st.x.squaredNorm() - (st.x - x_star).squaredNorm());
    const double slack_x = rhs_x - lhs_x;

    const double lhs_y = grad_y_aug(p, x_star, st.y, eps).dot(y_star - st.y);
    const double rhs_y =
        l_star - lagrangian(p, x_star, st.y) +
        0.5 * eps *
            (st.y.squaredNorm() - y_star.squaredNorm() + (st.y - y_star).squaredNorm());
    const double slack_y = lhs_y - rhs_y;

    return {slack_x, slack_y};
}

}  // namespace saddleflow
