#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "saddleflow/experiments.hpp"
#include "saddleflow/schedule.hpp"

namespace saddleflow {

inline const char* cond_status_name(CondStatus s) {
    switch (s) {
        case CondStatus::pass: return "pass";
        case CondStatus::fail: return "fail";
        case CondStatus::not_applicable: return "not_applicable";
    }
    return "?";
}

inline nlohmann::json to_json(const ValidationReport& rep) {
    nlohmann::json j;
    j["grid"] = {{"size", rep.grid.size()},
                 {"t_min", rep.grid.empty() ? 0.0 : rep.grid.front()},
                 {"t_max", rep.grid.empty() ? 0.0 : rep.grid.back()}};
    j["conditions"] = {{"condition1", cond_status_name(rep.cond1)},
                       {"condition2", cond_status_name(rep.cond2)},
                       {"condition3", cond_status_name(rep.cond3)},
                       {"condition4", cond_status_name(rep.cond4)},
                       {"boundedness_quotient", cond_status_name(rep.quotient)},
                       {"epsilon_monotone", cond_status_name(rep.eps_monotone)}};
    if (std::isfinite(rep.witnessed_d)) {
        j["witnessed_d"] = rep.witnessed_d;
    } else {
        j["witnessed_d"] = nullptr;
    }
    if (rep.worst_violation) {
        j["worst_violation"] = {{"condition", rep.worst_violation->condition},
                                {"t", rep.worst_violation->t},
                                {"magnitude", rep.worst_violation->magnitude}};
    } else {
        j["worst_violation"] = nullptr;
    }
    j["all_ok"] = rep.all_ok();
    return j;
}

inline nlohmann::json to_json(const RateFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r_squared", fit.r_squared},
            {"window", {fit.t_lo, fit.t_hi}}};
}

inline nlohmann::json to_json(const OscillationReport& rep) {
    return {{"local_maxima_count", rep.local_maxima_count},
            {"total_variation_log", rep.total_variation_log},
            {"largest_rebound", rep.largest_rebound}};
}

inline nlohmann::json to_json(const IntegralAccumulators& acc) {
    nlohmann::json j;
    j["gap"] = {{"total", acc.gap_total}, {"last_increment", acc.gap_last}};
    j["grad_f"] = {{"total", acc.grad_f_total}, {"last_increment", acc.grad_f_last}};
    j["grad_g"] = {{"total", acc.grad_g_total}, {"last_increment", acc.grad_g_last}};
    if (acc.speed_applicable) {
        j["speed"] = {{"total", acc.speed_total}, {"last_increment", acc.speed_last}};
    } else {
        j["speed"] = nullptr;
    }
    j["delta"] = {{"total", acc.delta_total}, {"last_increment", acc.delta_last}};
    return j;
}

inline nlohmann::json variant_summary_json(const VariantRun& run) {
    nlohmann::json j;
    j["variant"] = variant_name(run.variant);
    j["diverged"] = run.diverged;
    if (run.diverged) j["error"] = run.error;
    j["samples"] = run.records.size();
    if (!run.records.empty()) {
        const auto& last = run.records.back();
        j["final"] = {{"t", last.t},
                      {"gap", last.gap},
                      {"norm_z", last.norm_z},
                      {"dist_to_saddle", last.dist_to_saddle}};
        if (run.phi_error && !run.phi_error->empty()) {
            j["final"]["phi_error"] = run.phi_error->back();
        }
    }
    j["gap_rate_fit"] = run.gap_fit ? to_json(*run.gap_fit) : nlohmann::json(nullptr);
    j["gap_oscillation"] =
        run.gap_oscillation ? to_json(*run.gap_oscillation) : nlohmann::json(nullptr);
    j["accumulators"] = to_json(run.accumulators);
    return j;
}

/// Complete machine-readable summary of a run: validation of the
/// full-system schedule plus per-variant fits, oscillation metrics,
/// accumulator totals, and final values.
inline nlohmann::json comparison_summary_json(const ComparisonResult& result) {
    nlohmann::json j;
    j["validation"] = to_json(result.validation);
    j["variants"] = nlohmann::json::array();
    for (const auto& run : result.variants) j["variants"].push_back(variant_summary_json(run));
    return j;
}

}  // namespace saddleflow
