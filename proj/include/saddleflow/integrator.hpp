#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "saddleflow/errors.hpp"
#include "saddleflow/types.hpp"

namespace saddleflow {

struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-3;
    double h_max = 0.5;
    long max_steps = 10'000'000;
    int sample_count = 200;  // observation times in [t0, t_end]

    void check() const {
        if (!(rtol >= 1e-14)) throw std::invalid_argument("IntegratorConfig: rtol must be >= 1e-14");
        if (!(atol >= 1e-16)) throw std::invalid_argument("IntegratorConfig: atol must be >= 1e-16");
        if (!(h_init > 0.0) || h_init > h_max) {
            throw std::invalid_argument("IntegratorConfig: requires 0 < h_init <= h_max");
        }
        if (max_steps <= 0) throw std::invalid_argument("IntegratorConfig: max_steps must be positive");
        if (sample_count < 2) throw std::invalid_argument("IntegratorConfig: sample_count must be >= 2");
    }
};

struct RawSample {
    double t;
    Vec state;
    double accepted_step;  // step size at emission; 0 for the initial sample
};

using OdeRhs = std::function<Vec(double, const Vec&)>;
using RawObserver = std::function<void(const RawSample&)>;

/// Observation times for a run: log-spaced when t0 > 0 (all experiment runs;
/// matches the log-log reporting), linearly spaced otherwise. Endpoints are
/// exact.
inline std::vector<double> observation_grid(double t0, double t_end, int count) {
    if (!(t_end > t0)) throw std::invalid_argument("observation_grid: requires t_end > t0");
    if (count < 2) throw std::invalid_argument("observation_grid: requires count >= 2");
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (t0 > 0.0) {
        const double l0 = std::log(t0), l1 = std::log(t_end);
        for (int i = 0; i < count; ++i) {
            grid[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (count - 1));
        }
    } else {
        for (int i = 0; i < count; ++i) {
            grid[static_cast<std::size_t>(i)] = t0 + (t_end - t0) * i / (count - 1);
        }
    }
    grid.front() = t0;
    grid.back() = t_end;
    return grid;
}

/// Adaptive Dormand-Prince 5(4) integration with proportional step control.
///
/// Per-step error is the RMS of component-wise errors scaled by
/// atol + rtol * |state|; a step is accepted when that norm is <= 1 and the
/// next step is h * min(5, max(0.2, 0.9 * err^(-1/5))). Steps are clipped to
/// land exactly on the observation grid; there is no dense output, which
/// keeps reruns bit-identical.
inline std::vector<RawSample> integrate(const OdeRhs& f, double t0, double t_end, const Vec& y0,
                                        const IntegratorConfig& cfg,
                                        const RawObserver& observer = nullptr) {
    cfg.check();
    if (!(t_end > t0)) throw std::invalid_argument("integrate: requires t_end > t0");
    if (!y0.allFinite()) throw std::invalid_argument("integrate: initial state must be finite");

    // Dormand-Prince 5(4) tableau.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - bhat, the 5th/4th order difference used for the error estimate.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::vector<double> grid = observation_grid(t0, t_end, cfg.sample_count);

    std::vector<RawSample> samples;
    samples.reserve(grid.size());
    samples.push_back({t0, y0, 0.0});
    if (observer) observer(samples.back());

    double t = t0;
    Vec y = y0;
    double h = std::min(cfg.h_init, cfg.h_max);
    long steps = 0;
    std::size_t obs_idx = 1;

    Vec k1, k2, k3, k4, k5, k6, k7, y_new, err_vec;
    while (obs_idx < grid.size()) {
        if (++steps > cfg.max_steps) {
            throw DivergenceError("integrate: max_steps exceeded at t = " + std::to_string(t), t,
                                  y);
        }
        h = std::min(h, cfg.h_max);
        const double target = grid[obs_idx];
        const double h_ctrl = h;
        bool clipped = false;
        if (t + h >= target) {
            h = target - t;
            clipped = true;
        }

        k1 = f(t, y);
        k2 = f(t + c2 * h, y + h * (a21 * k1));
        k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = f(t + h, y_new);
        err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        if (!y_new.allFinite() || !err_vec.allFinite()) {
            if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
                throw BlowUpError("integrate: state not finite at t = " + std::to_string(t + h),
                                  t + h);
            }
            h *= 0.2;
            continue;
        }

        double sum_sq = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            const double e = err_vec(i) / scale;
            sum_sq += e * e;
        }
        const double err = std::sqrt(sum_sq / static_cast<double>(y.size()));
        const double factor =
            err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));

        if (err <= 1.0) {
            t = clipped ? target : t + h;
            y.swap(y_new);
            if (clipped) {
                samples.push_back({t, y, h});
                if (observer) observer(samples.back());
                ++obs_idx;
                // Resume the controller's step; the clipped step says nothing
                // about the error at full length.
                h = std::max(h * factor, h_ctrl);
            } else {
                h *= factor;
            }
        } else {
            h *= factor;
        }
    }
    return samples;
}

}  // namespace saddleflow
