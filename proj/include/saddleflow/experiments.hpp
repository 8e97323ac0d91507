#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "saddleflow/diagnostics.hpp"
#include "saddleflow/dynamics.hpp"
#include "saddleflow/integrator.hpp"
#include "saddleflow/problem.hpp"
#include "saddleflow/rng.hpp"
#include "saddleflow/schedule.hpp"

namespace saddleflow {

/// Which terms of the dynamics a run keeps. The ablations match the
/// comparison systems of the experiments: dropping the Hessian-driven
/// damping, the Tikhonov term, or both (the plain extrapolated system).
enum class Variant { full, no_hessian, no_tikhonov, neither };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_hessian: return "no_hessian";
        case Variant::no_tikhonov: return "no_tikhonov";
        case Variant::neither: return "neither";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& name) {
    if (name == "full") return Variant::full;
    if (name == "no_hessian") return Variant::no_hessian;
    if (name == "no_tikhonov") return Variant::no_tikhonov;
    if (name == "neither") return Variant::neither;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

inline Schedule apply_variant(const Schedule& s, Variant v) {
    switch (v) {
        case Variant::full: return s;
        case Variant::no_hessian: return ablation_variant(s, true, false);
        case Variant::no_tikhonov: return ablation_variant(s, false, true);
        case Variant::neither: return ablation_variant(s, true, true);
    }
    throw std::invalid_argument("unknown variant");
}

/// A fully specified, reproducible experiment: problem, full-system schedule,
/// initial state, time window, requested variants, and integrator settings.
struct ExperimentSpec {
    ProblemFamily family = ProblemFamily::bilinear_quadratic;
    SaddleProblem problem;
    std::optional<BilinearQuadraticParams> bilinear_params;
    std::optional<L2RegularizedParams> l2_params;
    Schedule schedule;  // full variant; ablations are derived
    double t0 = 1.0;
    double t_end = 30.0;
    SystemState initial;
    std::vector<Variant> variants{Variant::full};
    IntegratorConfig integrator;
};

/// Result of one variant of a run. On divergence the samples collected so
/// far are kept and the error message records where integration stopped.
struct VariantRun {
    Variant variant = Variant::full;
    bool diverged = false;
    std::string error;
    std::vector<TrajectorySample> samples;
    std::vector<DiagnosticsRecord> records;
    IntegralAccumulators accumulators;
    std::optional<RateFit> gap_fit;  // fitted over the last three quarters of the window
    std::optional<OscillationReport> gap_oscillation;
    std::optional<std::vector<double>> phi_error;  // objective error, l2 family only
};

/// All variants of one spec, computed on a shared observation grid against
/// the same reference saddle.
struct ComparisonResult {
    std::pair<Vec, Vec> saddle;
    ValidationReport validation;  // of the full-system schedule
    std::vector<VariantRun> variants;
};

/// Gap values floored for log-domain reporting; round-off noise near
/// convergence otherwise produces nonpositive gaps.
constexpr double kGapFloor = 1e-14;

inline std::vector<std::pair<double, double>> floored_gap_series(const VariantRun& run) {
    std::vector<std::pair<double, double>> out;
    out.reserve(run.records.size());
    for (const auto& r : run.records) out.emplace_back(r.t, std::max(r.gap, kGapFloor));
    return out;
}

/// Exact distance to the solution set {a.x = 0, c.y = 0} of the quadratic
/// min-max family, a = (m, n), c = (j, k).
inline double bilinear_solution_set_distance(const BilinearQuadraticParams& params, const Vec& x,
                                             const Vec& y) {
    Vec a(2), c(2);
    a << params.m_c, params.n_c;
    c << params.j_c, params.k_c;
    const double ax = a.dot(x);
    const double cy = c.dot(y);
    return std::sqrt(ax * ax / a.squaredNorm() + cy * cy / c.squaredNorm());
}

enum class Example1Case { a, b };  // (m,n,j,k) = (1,6,4,10) or (1,10,15,1)

/// Quadratic min-max experiment: alpha = 19, beta(t) = t,
/// gamma(t) = gamma_c t^2, eps(t) = 2/t^2, t0 = 1, started from
/// x = y = (1, 1.5) with unit velocities.
inline ExperimentSpec preset_example1(double gamma_c, double t_end,
                                      Example1Case which = Example1Case::a) {
    if (!(gamma_c > 0.0) || gamma_c > 4.0 / 15.0) {
        throw std::invalid_argument("preset_example1: requires gamma in (0, 4/15], got " +
                                    std::to_string(gamma_c));
    }
    ExperimentSpec spec;
    spec.family = ProblemFamily::bilinear_quadratic;
    spec.bilinear_params = which == Example1Case::a ? BilinearQuadraticParams{1.0, 6.0, 4.0, 10.0}
                                                    : BilinearQuadraticParams{1.0, 10.0, 15.0, 1.0};
    spec.problem = make_bilinear_quadratic(*spec.bilinear_params);
    spec.schedule = case1_schedule(19.0, 1.0, gamma_c, power_fn(2.0, -2.0), 1.0);
    spec.t0 = 1.0;
    spec.t_end = t_end;
    spec.initial.x = Vec(2);
    spec.initial.x << 1.0, 1.5;
    spec.initial.y = spec.initial.x;
    spec.initial.vx = Vec::Ones(2);
    spec.initial.vy = Vec::Ones(2);
    return spec;
}

/// l2-regularized experiment: omega = 1, K and b standard Gaussian from a
/// seeded deterministic stream, schedule case 1 with alpha = 19, beta = 1,
/// gamma = 1/6, eps(t) = 1/t^8. The initial state is the all-ones vector in
/// every block.
inline ExperimentSpec preset_example2(Eigen::Index n, Eigen::Index m, std::uint64_t seed,
                                      double t_end) {
    if (n < 1 || m < 1) throw std::invalid_argument("preset_example2: requires n, m >= 1");
    SplitMix64 rng(seed);
    L2RegularizedParams params;
    params.k_matrix = rng.gaussian_matrix(m, n);
    params.b = rng.gaussian_vector(m);
    params.omega = 1.0;

    ExperimentSpec spec;
    spec.family = ProblemFamily::l2_regularized;
    spec.l2_params = params;
    spec.problem = make_l2_regularized(params);
    spec.schedule = case1_schedule(19.0, 1.0, 1.0 / 6.0, power_fn(1.0, -8.0), 1.0);
    spec.t0 = 1.0;
    spec.t_end = t_end;
    spec.initial.x = Vec::Ones(n);
    spec.initial.y = Vec::Ones(m);
    spec.initial.vx = Vec::Ones(n);
    spec.initial.vy = Vec::Ones(m);
    return spec;
}

namespace detail {

inline std::vector<double> integer_grid(double t0, double t_end) {
    std::vector<double> grid;
    for (double t = std::ceil(t0); t <= t_end; t += 1.0) grid.push_back(t);
    if (grid.empty()) grid.push_back(t0);
    return grid;
}

inline int variant_thread_limit(std::size_t n_variants) {
    if (const char* env = std::getenv("SADDLE_FLOW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(std::min<long>(v, static_cast<long>(n_variants)));
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min<std::size_t>(hw == 0 ? 1 : hw, n_variants));
}

inline void run_one_variant(const ExperimentSpec& spec, Variant v,
                            const std::pair<Vec, Vec>& saddle, VariantRun& out) {
    out.variant = v;
    const Schedule sched = apply_variant(spec.schedule, v);
    const SaddleProblem& p = spec.problem;
    // The dense primal factorization is redundant work whenever m < n.
    CouplingCache cache(p, p.m < p.n ? CouplingSolve::woodbury : CouplingSolve::dense);

    const OdeRhs ode = [&p, &sched, &cache](double t, const Vec& flat) -> Vec {
        const SystemState st = SystemState::unpack(flat, p.n, p.m);
        const StateDerivative d = rhs(p, sched, t, st, cache);
        Vec packed(flat.size());
        packed << d.dx, d.dy, d.ax, d.ay;
        return packed;
    };

    const RawObserver collect = [&](const RawSample& raw) {
        out.samples.push_back(
            {raw.t, SystemState::unpack(raw.state, p.n, p.m), raw.accepted_step});
    };

    try {
        integrate(ode, spec.t0, spec.t_end, spec.initial.pack(), spec.integrator, collect);
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.error = e.what();
    } catch (const BlowUpError& e) {
        out.diverged = true;
        out.error = e.what();
    }

    out.records.reserve(out.samples.size());
    for (const auto& sample : out.samples) {
        out.records.push_back(record(p, sched, sample, saddle));
        if (out.records.size() >= 2) {
            out.accumulators = accumulate(out.accumulators, out.records[out.records.size() - 2],
                                          out.records.back(), sched);
        }
    }

    if (spec.family == ProblemFamily::l2_regularized && spec.l2_params) {
        const double phi_star = objective_phi(*spec.l2_params, saddle.first);
        std::vector<double> phi;
        phi.reserve(out.samples.size());
        for (const auto& sample : out.samples) {
            phi.push_back(objective_phi(*spec.l2_params, sample.state.x) - phi_star);
        }
        out.phi_error = std::move(phi);
    }

    if (out.records.size() >= 3) {
        const auto gap_series = floored_gap_series(out);
        out.gap_oscillation = oscillation_metrics(gap_series);
        const double fit_lo = spec.t0 + 0.25 * (spec.t_end - spec.t0);
        try {
            out.gap_fit = fit_rate(gap_series, fit_lo, spec.t_end);
        } catch (const std::invalid_argument&) {
            out.gap_fit = std::nullopt;  // too few samples in the window
        }
    }
}

}  // namespace detail

/// Runs every requested variant of a spec on a shared observation grid and
/// assembles the comparison. The full-system schedule must be admissible;
/// per-variant divergence is reported in the result, not thrown, so the
/// remaining variants still run.
inline ComparisonResult run(const ExperimentSpec& spec) {
    if (!(spec.t_end > spec.t0) || !(spec.t0 >= 1.0)) {
        throw std::invalid_argument("run: requires t_end > t0 >= 1");
    }
    if (spec.variants.empty()) throw std::invalid_argument("run: no variants requested");
    if (!spec.initial.all_finite()) throw std::invalid_argument("run: initial state not finite");

    ComparisonResult result;
    result.validation = validate(spec.schedule, detail::integer_grid(spec.t0, spec.t_end));
    if (!result.validation.all_ok()) {
        std::string cond = result.validation.worst_violation
                               ? result.validation.worst_violation->condition
                               : "unknown";
        throw std::invalid_argument("run: full-system schedule fails validation (" + cond + ")");
    }
    result.saddle = reference_saddle(spec.problem, spec.family);
    result.variants.resize(spec.variants.size());

    const int limit = detail::variant_thread_limit(spec.variants.size());
    if (limit <= 1 || spec.variants.size() == 1) {
        for (std::size_t i = 0; i < spec.variants.size(); ++i) {
            detail::run_one_variant(spec, spec.variants[i], result.saddle, result.variants[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t i = next.fetch_add(1); i < spec.variants.size();
                 i = next.fetch_add(1)) {
                detail::run_one_variant(spec, spec.variants[i], result.saddle,
                                        result.variants[i]);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(limit));
        for (int i = 0; i < limit; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return result;
}

}  // namespace saddleflow
