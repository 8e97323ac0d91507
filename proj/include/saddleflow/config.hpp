#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "saddleflow/experiments.hpp"

namespace saddleflow {

/// Raised for any config problem; the message names the offending key.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parsed run configuration. Parsing is strict: unknown keys are errors, so
/// a config cannot silently carry settings that are never applied.
struct RunConfig {
    std::string family;  // "bilinear_quadratic" | "l2_regularized"
    std::optional<BilinearQuadraticParams> bilinear;
    Eigen::Index l2_n = 0, l2_m = 0;
    double l2_omega = 1.0;
    std::uint64_t seed = 0;

    std::string schedule_case;  // "case1" | "case2"
    double alpha_c = 0.0;
    double beta_exp = 0.0;
    double gamma_c = 0.0;
    double eps_coefficient = 0.0;  // case1: eps(t) = coefficient * t^exponent
    double eps_exponent = 0.0;

    double t0 = 1.0;
    double t_end = 0.0;
    IntegratorConfig integrator;
    std::vector<Variant> variants{Variant::full};

    std::string out_csv;
    std::string out_json;
    std::optional<std::string> out_svg;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + ": missing key '" + key + "'");
    return *it;
}

inline double as_finite_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path + ": must be finite");
    return d;
}

inline double number_or(const json& obj, const std::string& path, const char* key, double dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    return as_finite_number(*it, path + "." + key);
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
    using detail::as_finite_number;
    using detail::check_keys;
    using detail::number_or;
    using detail::require;

    check_keys(root, "config",
               {"problem", "schedule", "time", "integrator", "variants", "output"});
    RunConfig cfg;

    const auto& problem = require(root, "config", "problem");
    check_keys(problem, "problem", {"family", "params", "seed"});
    cfg.family = require(problem, "problem", "family").get<std::string>();
    if (cfg.family == "bilinear_quadratic") {
        const auto& params = require(problem, "problem", "params");
        check_keys(params, "problem.params", {"m", "n", "j", "k"});
        cfg.bilinear = BilinearQuadraticParams{
            as_finite_number(require(params, "problem.params", "m"), "problem.params.m"),
            as_finite_number(require(params, "problem.params", "n"), "problem.params.n"),
            as_finite_number(require(params, "problem.params", "j"), "problem.params.j"),
            as_finite_number(require(params, "problem.params", "k"), "problem.params.k")};
        if (problem.contains("seed")) {
            throw ConfigError("problem.seed: only valid for the l2_regularized family");
        }
    } else if (cfg.family == "l2_regularized") {
        const auto& params = require(problem, "problem", "params");
        check_keys(params, "problem.params", {"n", "m", "omega"});
        const double n = as_finite_number(require(params, "problem.params", "n"),
                                          "problem.params.n");
        const double m = as_finite_number(require(params, "problem.params", "m"),
                                          "problem.params.m");
        if (n < 1 || m < 1 || n != std::floor(n) || m != std::floor(m)) {
            throw ConfigError("problem.params: n and m must be positive integers");
        }
        cfg.l2_n = static_cast<Eigen::Index>(n);
        cfg.l2_m = static_cast<Eigen::Index>(m);
        cfg.l2_omega = number_or(params, "problem.params", "omega", 1.0);
        if (!(cfg.l2_omega > 0.0)) throw ConfigError("problem.params.omega: must be > 0");
        const auto& seed = require(problem, "problem", "seed");
        if (!seed.is_number_integer() ||
            (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
            throw ConfigError("problem.seed: expected a nonnegative integer");
        }
        cfg.seed = seed.get<std::uint64_t>();
    } else {
        throw ConfigError("problem.family: unknown family '" + cfg.family + "'");
    }

    const auto& schedule = require(root, "config", "schedule");
    cfg.schedule_case = require(schedule, "schedule", "case").get<std::string>();
    if (cfg.schedule_case == "case1") {
        check_keys(schedule, "schedule", {"case", "alpha", "beta_exp", "gamma", "epsilon"});
        cfg.alpha_c = as_finite_number(require(schedule, "schedule", "alpha"), "schedule.alpha");
        cfg.beta_exp =
            as_finite_number(require(schedule, "schedule", "beta_exp"), "schedule.beta_exp");
        cfg.gamma_c = as_finite_number(require(schedule, "schedule", "gamma"), "schedule.gamma");
        const auto& eps = require(schedule, "schedule", "epsilon");
        check_keys(eps, "schedule.epsilon", {"kind", "coefficient", "exponent"});
        const std::string kind = require(eps, "schedule.epsilon", "kind").get<std::string>();
        if (kind != "power") {
            throw ConfigError("schedule.epsilon.kind: unknown kind '" + kind + "'");
        }
        cfg.eps_coefficient = as_finite_number(require(eps, "schedule.epsilon", "coefficient"),
                                               "schedule.epsilon.coefficient");
        cfg.eps_exponent = as_finite_number(require(eps, "schedule.epsilon", "exponent"),
                                            "schedule.epsilon.exponent");
        if (cfg.eps_coefficient < 0.0) {
            throw ConfigError("schedule.epsilon.coefficient: must be >= 0");
        }
        if (cfg.eps_coefficient > 0.0 && cfg.eps_exponent > 0.0) {
            throw ConfigError("schedule.epsilon.exponent: must be <= 0 (nonincreasing epsilon)");
        }
    } else if (cfg.schedule_case == "case2") {
        // alpha and epsilon are pinned by the family; their presence is a mistake.
        check_keys(schedule, "schedule", {"case", "beta_exp", "gamma"});
        cfg.beta_exp =
            as_finite_number(require(schedule, "schedule", "beta_exp"), "schedule.beta_exp");
        cfg.gamma_c = as_finite_number(require(schedule, "schedule", "gamma"), "schedule.gamma");
    } else {
        throw ConfigError("schedule.case: unknown case '" + cfg.schedule_case + "'");
    }

    const auto& time = require(root, "config", "time");
    check_keys(time, "time", {"t0", "t_end"});
    cfg.t0 = as_finite_number(require(time, "time", "t0"), "time.t0");
    cfg.t_end = as_finite_number(require(time, "time", "t_end"), "time.t_end");
    if (!(cfg.t_end > cfg.t0)) throw ConfigError("time.t_end: must exceed time.t0");

    if (root.contains("integrator")) {
        const auto& integ = root["integrator"];
        check_keys(integ, "integrator", {"rtol", "atol", "samples", "max_steps"});
        cfg.integrator.rtol = number_or(integ, "integrator", "rtol", cfg.integrator.rtol);
        cfg.integrator.atol = number_or(integ, "integrator", "atol", cfg.integrator.atol);
        const double samples = number_or(integ, "integrator", "samples",
                                         static_cast<double>(cfg.integrator.sample_count));
        if (samples < 2 || samples != std::floor(samples)) {
            throw ConfigError("integrator.samples: must be an integer >= 2");
        }
        cfg.integrator.sample_count = static_cast<int>(samples);
        const double max_steps = number_or(integ, "integrator", "max_steps",
                                           static_cast<double>(cfg.integrator.max_steps));
        if (max_steps < 1 || max_steps != std::floor(max_steps)) {
            throw ConfigError("integrator.max_steps: must be a positive integer");
        }
        cfg.integrator.max_steps = static_cast<long>(max_steps);
        try {
            cfg.integrator.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("integrator: ") + e.what());
        }
    }

    if (root.contains("variants")) {
        const auto& variants = root["variants"];
        if (!variants.is_array() || variants.empty()) {
            throw ConfigError("variants: expected a nonempty array");
        }
        cfg.variants.clear();
        for (const auto& v : variants) {
            try {
                cfg.variants.push_back(variant_from_name(v.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("variants: ") + e.what());
            }
        }
    }

    const auto& output = require(root, "config", "output");
    check_keys(output, "output", {"csv", "json", "svg"});
    cfg.out_csv = require(output, "output", "csv").get<std::string>();
    cfg.out_json = require(output, "output", "json").get<std::string>();
    if (output.contains("svg")) cfg.out_svg = output["svg"].get<std::string>();

    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        return parse_run_config(root);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
}

/// Builds the (full-variant) schedule a config describes. Throws
/// std::invalid_argument naming the violated bound when the constants are
/// inadmissible, so callers can report rejection as a validation outcome.
inline Schedule build_schedule(const RunConfig& cfg) {
    if (cfg.schedule_case == "case1") {
        return case1_schedule(cfg.alpha_c, cfg.beta_exp, cfg.gamma_c,
                              power_fn(cfg.eps_coefficient, cfg.eps_exponent), cfg.t0);
    }
    return case2_schedule(cfg.gamma_c, cfg.beta_exp, cfg.t0);
}

/// Instantiates the experiment a config describes. Schedule construction
/// errors surface as ConfigError so the CLI can report them with the key.
inline ExperimentSpec build_spec(const RunConfig& cfg) {
    ExperimentSpec spec;
    try {
        if (cfg.bilinear) {
            spec.family = ProblemFamily::bilinear_quadratic;
            spec.bilinear_params = cfg.bilinear;
            spec.problem = make_bilinear_quadratic(*cfg.bilinear);
            spec.initial.x = Vec(2);
            spec.initial.x << 1.0, 1.5;
            spec.initial.y = spec.initial.x;
            spec.initial.vx = Vec::Ones(2);
            spec.initial.vy = Vec::Ones(2);
        } else {
            SplitMix64 rng(cfg.seed);
            L2RegularizedParams params;
            params.k_matrix = rng.gaussian_matrix(cfg.l2_m, cfg.l2_n);
            params.b = rng.gaussian_vector(cfg.l2_m);
            params.omega = cfg.l2_omega;
            spec.family = ProblemFamily::l2_regularized;
            spec.l2_params = params;
            spec.problem = make_l2_regularized(params);
            spec.initial.x = Vec::Ones(cfg.l2_n);
            spec.initial.y = Vec::Ones(cfg.l2_m);
            spec.initial.vx = Vec::Ones(cfg.l2_n);
            spec.initial.vy = Vec::Ones(cfg.l2_m);
        }

        spec.schedule = build_schedule(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }

    spec.t0 = cfg.t0;
    spec.t_end = cfg.t_end;
    spec.integrator = cfg.integrator;
    spec.variants = cfg.variants;
    return spec;
}

}  // namespace saddleflow
