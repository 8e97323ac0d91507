#include <doctest.h>

#include <cmath>
#include <vector>

#include "saddleflow/diagnostics.hpp"
#include "test_util.hpp"

using namespace saddleflow;
using testutil::random_vec;

namespace {

SaddleProblem example1_problem() {
    return make_bilinear_quadratic({1.0, 6.0, 4.0, 10.0});
}

Schedule example1_schedule(double gamma_c) {
    return case1_schedule(19.0, 1.0, gamma_c, power_fn(2.0, -2.0));
}

std::pair<Vec, Vec> origin_saddle() {
    return {Vec::Zero(2), Vec::Zero(2)};
}

SystemState zero_state() {
    SystemState st;
    st.x = Vec::Zero(2);
    st.y = Vec::Zero(2);
    st.vx = Vec::Zero(2);
    st.vy = Vec::Zero(2);
    return st;
}

DiagnosticsRecord synthetic_record(double t, double gap, double speed_sq = 0.0,
                                   double delta = 0.0) {
    DiagnosticsRecord r;
    r.t = t;
    r.gap = gap;
    r.speed_sq = speed_sq;
    r.delta = delta;
    return r;
}

}  // namespace

TEST_CASE("record at the stationary saddle") {
    const SaddleProblem p = example1_problem();
    const Schedule s = ablation_variant(example1_schedule(2.0 / 15.0), false, true);
    const TrajectorySample sample{2.0, zero_state(), 0.1};
    const DiagnosticsRecord r = record(p, s, sample, origin_saddle());
    CHECK(r.gap == 0.0);
    CHECK(r.delta == 0.0);
    CHECK(r.res_x == 0.0);
    CHECK(r.res_y == 0.0);
    CHECK(r.norm_z == 0.0);
    CHECK(r.dist_to_saddle == 0.0);
}

TEST_CASE("record at the experiment initial point") {
    const SaddleProblem p = example1_problem();
    const Schedule s = example1_schedule(2.0 / 15.0);
    SystemState st;
    st.x = Vec(2);
    st.x << 1.0, 1.5;
    st.y = st.x;
    st.vx = Vec::Ones(2);
    st.vy = Vec::Ones(2);
    const DiagnosticsRecord r = record(p, s, {1.0, st, 0.0}, origin_saddle());
    // With the saddle at the origin the couplings vanish, so
    // gap = f(x) + g(y) = 100 + 361.
    CHECK(r.gap == doctest::Approx(461.0).epsilon(1e-14));
    CHECK(r.norm_z == doctest::Approx(std::sqrt(6.5)).epsilon(1e-14));
    CHECK(r.speed_sq == doctest::Approx(4.0));
}

TEST_CASE("record rejects a non-saddle reference") {
    const SaddleProblem p = example1_problem();
    const Schedule s = example1_schedule(2.0 / 15.0);
    Vec bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(record(p, s, {1.0, zero_state(), 0.0}, {bad, Vec::Zero(2)}),
                    std::invalid_argument);
}

TEST_CASE("lyapunov weights are constant on power-law schedules") {
    // eta = t beta / (theta (t beta - gamma - t dgamma)); for beta_exp = 1,
    // gamma = 1/6 it equals 1/(theta (1 - 3 gamma)) = 15 at every t.
    const Schedule s = example1_schedule(1.0 / 6.0);
    CHECK(s.theta == doctest::Approx(2.0 / 15.0));
    double eta_ref = 0.0;
    for (double t = 1.0; t <= 60.0; t += 3.7) {
        const ValueDeriv bv = s.beta(t), gv = s.gamma(t);
        const double denom = t * bv.value - gv.value - t * gv.deriv;
        const double eta = t * bv.value / (s.theta * denom);
        const double eta_bar = bv.value / (s.theta * denom);
        if (t == 1.0) eta_ref = eta;
        CHECK(eta == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(eta == doctest::Approx(eta_ref).epsilon(1e-12));
        CHECK(eta_bar == doctest::Approx(eta / t).epsilon(1e-12));
    }
}

TEST_CASE("energies vanish at the origin saddle with zero velocity") {
    const SaddleProblem p = example1_problem();
    const Schedule s = example1_schedule(1.0 / 6.0);
    const TrajectorySample sample{3.0, zero_state(), 0.1};
    const auto e = energy_e(p, s, sample, origin_saddle());
    REQUIRE(e.has_value());
    CHECK(*e == 0.0);
    const auto ebar = energy_ebar(p, s, sample, origin_saddle());
    REQUIRE(ebar.has_value());
    CHECK(*ebar == 0.0);
}

TEST_CASE("energy dominates the weighted gap") {
    const SaddleProblem p = example1_problem();
    const Schedule s = example1_schedule(2.0 / 15.0);
    SplitMix64 rng(51);
    for (int i = 0; i < 30; ++i) {
        SystemState st;
        st.x = random_vec(rng, 2);
        st.y = random_vec(rng, 2);
        st.vx = random_vec(rng, 2);
        st.vy = random_vec(rng, 2);
        const double t = rng.next_uniform(1.0, 30.0);
        const TrajectorySample sample{t, st, 0.1};
        const DiagnosticsRecord r = record(p, s, sample, origin_saddle());
        REQUIRE(r.energy_e.has_value());
        REQUIRE(r.energy_ebar.has_value());
        const double beta = s.beta(t).value;
        CHECK(*r.energy_e >= t * t * beta * r.gap - 1e-9);
        CHECK(*r.energy_ebar >= beta * r.gap - 1e-9);
    }
}

TEST_CASE("energies are not applicable on gamma = 0 schedules") {
    const SaddleProblem p = example1_problem();
    const Schedule s = ablation_variant(example1_schedule(2.0 / 15.0), true, false);
    const TrajectorySample sample{2.0, zero_state(), 0.1};
    CHECK_FALSE(energy_e(p, s, sample, origin_saddle()).has_value());
    CHECK_FALSE(energy_ebar(p, s, sample, origin_saddle()).has_value());
    const DiagnosticsRecord r = record(p, s, sample, origin_saddle());
    CHECK_FALSE(r.energy_e.has_value());
}

TEST_CASE("trapezoidal accumulation is exact on constant integrands") {
    // theta = 1/4 and beta = 1 make the gap weight t/2, so gap(t) = 2/t
    // gives a constant integrand 1.
    const Schedule s = custom_schedule(0.25, power_fn(1.0, -1.0), power_fn(1.0, 0.0),
                                       power_fn(1.0, 0.0), power_fn(1.0, -2.0), 1.0);
    IntegralAccumulators acc;
    acc = accumulate(acc, synthetic_record(1.0, 2.0), synthetic_record(2.0, 1.0), s);
    CHECK(acc.gap_total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(acc.gap_last == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("trapezoidal accumulation is exact on linear integrands") {
    // Constant gap = 2 makes the integrand t; the single-step trapezoid over
    // [1, 3] equals the exact integral 4.
    const Schedule s = custom_schedule(0.25, power_fn(1.0, -1.0), power_fn(1.0, 0.0),
                                       power_fn(1.0, 0.0), power_fn(1.0, -2.0), 1.0);
    IntegralAccumulators acc;
    acc = accumulate(acc, synthetic_record(1.0, 2.0), synthetic_record(3.0, 2.0), s);
    CHECK(acc.gap_total == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("accumulation requires increasing times and tracks applicability") {
    const Schedule s = example1_schedule(2.0 / 15.0);
    IntegralAccumulators acc;
    CHECK_THROWS_AS(accumulate(acc, synthetic_record(2.0, 1.0), synthetic_record(2.0, 1.0), s),
                    std::invalid_argument);

    const Schedule ablated = ablation_variant(s, true, false);
    acc = accumulate(acc, synthetic_record(1.0, 1.0, 1.0, 1.0),
                     synthetic_record(2.0, 1.0, 1.0, 1.0), ablated);
    CHECK_FALSE(acc.speed_applicable);
    CHECK(acc.delta_total == 0.0);  // integrand carries a factor gamma
    CHECK(acc.gap_total > 0.0);
}

TEST_CASE("accumulators are nondecreasing on a validated schedule") {
    const Schedule s = example1_schedule(2.0 / 15.0);
    SplitMix64 rng(53);
    IntegralAccumulators acc;
    DiagnosticsRecord prev = synthetic_record(1.0, 5.0, 2.0, 1.0);
    for (int i = 1; i <= 40; ++i) {
        const double t = 1.0 + 0.5 * i;
        DiagnosticsRecord cur =
            synthetic_record(t, rng.next_uniform(0.0, 5.0), rng.next_uniform(0.0, 2.0),
                             rng.next_uniform(0.0, 1.0));
        const IntegralAccumulators next = accumulate(acc, prev, cur, s);
        CHECK(next.gap_total >= acc.gap_total);
        CHECK(next.grad_f_total >= acc.grad_f_total);
        CHECK(next.speed_total >= acc.speed_total);
        CHECK(next.delta_total >= acc.delta_total);
        acc = next;
        prev = cur;
    }
}

TEST_CASE("rate fit recovers exact power laws") {
    std::vector<std::pair<double, double>> series;
    for (double t = 10.0; t <= 30.0; t += 0.5) series.emplace_back(t, std::pow(t, -3.0));
    const RateFit fit = fit_rate(series, 10.0, 30.0);
    CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::pair<double, double>> constant;
    for (double t = 1.0; t <= 20.0; t += 1.0) constant.emplace_back(t, 5.0);
    CHECK(fit_rate(constant, 1.0, 20.0).slope == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rate fit tolerates bounded multiplicative oscillation") {
    std::vector<std::pair<double, double>> series;
    for (double t = 10.0; t <= 100.0; t += 0.25) {
        series.emplace_back(t, std::pow(t, -3.0) * (2.0 + std::sin(t)));
    }
    const RateFit fit = fit_rate(series, 10.0, 100.0);
    CHECK(std::abs(fit.slope + 3.0) <= 0.15);

    // Independent least-squares oracle over the same points.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (const auto& [t, v] : series) {
        const double x = std::log10(t), y = std::log10(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1.0;
    }
    const double slope_oracle = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(fit.slope == doctest::Approx(slope_oracle).epsilon(1e-10));
}

TEST_CASE("rate fit argument errors") {
    std::vector<std::pair<double, double>> few = {{1, 1}, {2, 1}, {3, 1}};
    CHECK_THROWS_AS(fit_rate(few, 1.0, 3.0), std::invalid_argument);
    std::vector<std::pair<double, double>> bad;
    for (double t = 1.0; t <= 10.0; t += 1.0) bad.emplace_back(t, t == 5.0 ? 0.0 : 1.0);
    CHECK_THROWS_AS(fit_rate(bad, 1.0, 10.0), std::invalid_argument);
}

TEST_CASE("oscillation metrics on monotone and single-bump series") {
    std::vector<std::pair<double, double>> dec;
    for (double t = 1.0; t <= 10.0; t += 1.0) dec.emplace_back(t, 100.0 / (t * t));
    const OscillationReport mono = oscillation_metrics(dec);
    CHECK(mono.local_maxima_count == 0);
    CHECK(mono.total_variation_log ==
          doctest::Approx(std::log10(dec.front().second / dec.back().second)).epsilon(1e-12));
    CHECK(mono.largest_rebound == 0.0);

    const OscillationReport bump =
        oscillation_metrics({{1.0, 1.0}, {2.0, 2.0}, {3.0, 1.0}});
    CHECK(bump.local_maxima_count == 1);
    CHECK(bump.largest_rebound == doctest::Approx(std::log10(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(oscillation_metrics({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(oscillation_metrics({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("oscillation maxima count matches a critical-point oracle") {
    // v(t) = (2 + sin t)/t has local maxima where t cos t = 2 + sin t with a
    // sign change from + to -; count them on (1, 20pi) by dense scanning.
    const auto v = [](double t) { return (2.0 + std::sin(t)) / t; };
    const auto g = [](double t) { return t * std::cos(t) - 2.0 - std::sin(t); };

    long oracle = 0;
    const double t_end = 20.0 * M_PI;
    double prev = g(1.0);
    for (double t = 1.0; t <= t_end; t += 1e-4) {
        const double cur = g(t);
        if (prev > 0.0 && cur <= 0.0) ++oracle;
        prev = cur;
    }
    CHECK(oracle == 9);

    // Dense enough to resolve every period, but not so dense that the
    // relative noise threshold hides the smooth peaks.
    const auto count_at = [&](int n) {
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= n; ++i) {
            const double t = 1.0 + (t_end - 1.0) * i / n;
            series.emplace_back(t, v(t));
        }
        return oscillation_metrics(series).local_maxima_count;
    };
    CHECK(count_at(200) == oracle);
    // Sampled counts may drop by one when a peak straddles two samples.
    for (int n = 200; n <= 300; n += 20) {
        const long count = count_at(n);
        CHECK(count >= oracle - 1);
        CHECK(count <= oracle);
    }
}

TEST_CASE("strong convexity slack check") {
    const SaddleProblem p = example1_problem();
    const Schedule s = example1_schedule(2.0 / 15.0);  // eps(1) = 2
    const auto saddle = origin_saddle();
    SplitMix64 rng(57);

    SystemState st = zero_state();
    CHECK(check_prop1(p, s, {1.0, st, 0.0}, saddle).first == 0.0);

    const Schedule no_eps = ablation_variant(s, false, true);
    for (int i = 0; i < 30; ++i) {
        st.x = random_vec(rng, 2, -3.0, 3.0);
        st.y = random_vec(rng, 2, -3.0, 3.0);
        const auto [sx0, sy0] = check_prop1(p, no_eps, {2.0, st, 0.0}, saddle);
        CHECK(sx0 >= -1e-9);
        CHECK(sy0 >= -1e-9);
        const auto [sx2, sy2] = check_prop1(p, s, {1.0, st, 0.0}, saddle);
        CHECK(sx2 >= -1e-9);
        CHECK(sy2 >= -1e-9);
    }

    // Secant oracle: eps-strong convexity of L_t(., y*) along the segment
    // from x to x*.
    const double eps = 2.0;
    for (int i = 0; i < 10; ++i) {
        const Vec x = random_vec(rng, 2, -3.0, 3.0);
        const Vec x_star = saddle.first;
        for (double tau = 0.1; tau < 1.0; tau += 0.2) {
            const Vec mid = (1.0 - tau) * x + tau * x_star;
            const double lhs = augmented_lagrangian(p, mid, saddle.second, eps);
            const double rhs = (1.0 - tau) * augmented_lagrangian(p, x, saddle.second, eps) +
                               tau * augmented_lagrangian(p, x_star, saddle.second, eps) -
                               0.5 * eps * tau * (1.0 - tau) * (x - x_star).squaredNorm();
            CHECK(lhs <= rhs + 1e-10);
        }
    }
}
