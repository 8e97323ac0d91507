// saddle-flow: config-driven runner for the primal-dual saddle point
// dynamics. Subcommands: run, validate, repro, rates.
//
// Exit codes: 0 success; 1 validation failed; 2 bad config or arguments;
// 3 a variant diverged (partial outputs written and flagged); 4 IO error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saddleflow/config.hpp"
#include "saddleflow/csv.hpp"
#include "saddleflow/experiments.hpp"
#include "saddleflow/report.hpp"
#include "saddleflow/svg.hpp"

namespace fs = std::filesystem;
using namespace saddleflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

fs::path resolve_output(const std::string& path, const std::string& out_dir) {
    fs::path p(path);
    if (!out_dir.empty() && p.is_relative()) p = fs::path(out_dir) / p;
    return p;
}

void ensure_parent_dir(const fs::path& p) {
    const fs::path dir = p.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
}

fs::path variant_csv_path(const fs::path& base, Variant v) {
    fs::path p = base;
    const std::string stem = p.stem().string();
    const std::string ext = p.extension().string();
    p.replace_filename(stem + "_" + variant_name(v) + ext);
    return p;
}

void write_text_file(const fs::path& path, const std::string& contents) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

std::vector<SvgSeries> gap_series(const ComparisonResult& result) {
    std::vector<SvgSeries> series;
    for (const auto& run : result.variants) {
        series.push_back({variant_name(run.variant), floored_gap_series(run)});
    }
    return series;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override, std::optional<int> samples_override) {
    RunConfig cfg;
    ExperimentSpec spec;
    try {
        cfg = load_run_config(config_path);
        if (seed_override) {
            if (cfg.family != "l2_regularized") {
                throw ConfigError("--seed: only valid for the l2_regularized family");
            }
            cfg.seed = *seed_override;
        }
        if (samples_override) {
            if (*samples_override < 2) throw ConfigError("--samples: must be >= 2");
            cfg.integrator.sample_count = *samples_override;
        }
        spec = build_spec(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    ComparisonResult result;
    try {
        result = run(spec);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    try {
        nlohmann::json summary = comparison_summary_json(result);
        summary["config_path"] = config_path;
        summary["outputs"] = nlohmann::json::array();
        for (const auto& vrun : result.variants) {
            const fs::path csv_path =
                variant_csv_path(resolve_output(cfg.out_csv, out_dir), vrun.variant);
            write_text_file(csv_path, variant_csv_string(vrun));
            summary["outputs"].push_back(csv_path.string());
        }
        if (cfg.out_svg) {
            std::ostringstream svg;
            write_log_log_chart(svg, "primal-dual gap", "t", "gap", gap_series(result));
            const fs::path svg_path = resolve_output(*cfg.out_svg, out_dir);
            write_text_file(svg_path, svg.str());
            summary["outputs"].push_back(svg_path.string());
        }
        const fs::path json_path = resolve_output(cfg.out_json, out_dir);
        write_text_file(json_path, summary.dump(2) + "\n");
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    }

    for (const auto& vrun : result.variants) {
        if (vrun.diverged) {
            std::cerr << "variant " << variant_name(vrun.variant)
                      << " diverged: " << vrun.error << "\n";
            return kExitDiverged;
        }
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    Schedule schedule;
    try {
        schedule = build_schedule(cfg);
    } catch (const std::invalid_argument& e) {
        // Constructor rejection is a validation outcome, not a malformed config.
        nlohmann::json out = {{"constructible", false}, {"reason", e.what()}};
        std::cout << out.dump(2) << "\n";
        return kExitValidationFailed;
    }

    const auto grid = detail::integer_grid(cfg.t0, cfg.t_end);
    nlohmann::json out = nlohmann::json::array();
    bool all_ok = true;
    for (Variant v : cfg.variants) {
        const ValidationReport rep = validate(apply_variant(schedule, v), grid);
        nlohmann::json entry = to_json(rep);
        entry["variant"] = variant_name(v);
        entry["constructible"] = true;
        out.push_back(entry);
        all_ok = all_ok && rep.all_ok();
    }
    std::cout << out.dump(2) << "\n";
    return all_ok ? kExitOk : kExitValidationFailed;
}

struct ReproJob {
    std::string name;         // file prefix for this run's CSVs
    ExperimentSpec spec;
    std::string chart;        // chart file stem; jobs sharing a stem share a chart
    std::string chart_title;
    std::string curve_prefix; // label prefix for this job's curves
    enum class Curve { gap, norm_z, phi_error } curve = Curve::gap;
};

std::vector<SvgSeries> curves_for(const ComparisonResult& result, ReproJob::Curve kind,
                                  const std::string& label_prefix) {
    std::vector<SvgSeries> series;
    for (const auto& vrun : result.variants) {
        SvgSeries s;
        s.label = label_prefix + variant_name(vrun.variant);
        switch (kind) {
            case ReproJob::Curve::gap:
                s.points = floored_gap_series(vrun);
                break;
            case ReproJob::Curve::norm_z:
                for (const auto& r : vrun.records) {
                    s.points.emplace_back(r.t, std::max(r.norm_z, kGapFloor));
                }
                break;
            case ReproJob::Curve::phi_error:
                if (vrun.phi_error) {
                    for (std::size_t i = 0; i < vrun.records.size(); ++i) {
                        s.points.emplace_back(vrun.records[i].t,
                                              std::max((*vrun.phi_error)[i], kGapFloor));
                    }
                }
                break;
        }
        series.push_back(std::move(s));
    }
    return series;
}

int cmd_repro(const std::string& figure, const std::string& out_dir, std::uint64_t seed,
              int samples) {
    const std::vector<double> gammas = {2.0 / 15.0, 3.0 / 20.0, 1.0 / 6.0};
    const std::vector<std::pair<std::string, Example1Case>> cases = {
        {"caseA", Example1Case::a}, {"caseB", Example1Case::b}};

    const auto gamma_tag = [](double g) {
        std::string tag = fmt3(g);
        for (char& ch : tag) {
            if (ch == '.') ch = 'p';
        }
        return tag;
    };

    std::vector<ReproJob> jobs;
    if (figure == "fig1") {
        // Six gap curves per parameter case: three gamma values, each with
        // and without Hessian damping.
        for (const auto& [cname, c] : cases) {
            for (double g : gammas) {
                ReproJob job;
                job.spec = preset_example1(g, 30.0, c);
                job.spec.variants = {Variant::full, Variant::no_hessian};
                job.name = "fig1_" + cname + "_gamma_" + gamma_tag(g);
                job.chart = "fig1_" + cname;
                job.chart_title = "gap, " + cname;
                job.curve_prefix = "g=" + fmt3(g) + " ";
                jobs.push_back(std::move(job));
            }
        }
    } else if (figure == "fig2") {
        // Trajectory norm under the three term combinations.
        ReproJob job;
        job.spec = preset_example1(2.0 / 15.0, 80.0, Example1Case::a);
        job.spec.variants = {Variant::full, Variant::no_tikhonov, Variant::neither};
        job.name = "fig2_caseA";
        job.chart = "fig2_caseA";
        job.chart_title = "||z(t)||, caseA, gamma=2/15";
        job.curve = ReproJob::Curve::norm_z;
        jobs.push_back(std::move(job));
    } else if (figure == "fig3_ablations") {
        // This system against the plain extrapolated system.
        for (const auto& [cname, c] : cases) {
            ReproJob job;
            job.spec = preset_example1(2.0 / 15.0, 30.0, c);
            job.spec.variants = {Variant::full, Variant::neither};
            job.name = "fig3_" + cname;
            job.chart = "fig3_" + cname;
            job.chart_title = "gap, " + cname + ", full vs neither";
            jobs.push_back(std::move(job));
        }
    } else if (figure == "fig5") {
        const std::vector<std::pair<int, int>> dims = {{10, 3}, {50, 20}, {100, 50}, {200, 100}};
        for (const auto& [n, m] : dims) {
            ReproJob job;
            job.spec = preset_example2(n, m, seed, 85.0);
            job.spec.variants = {Variant::full, Variant::no_hessian, Variant::neither};
            job.name = "fig5_n" + std::to_string(n) + "_m" + std::to_string(m);
            job.chart = job.name;
            job.chart_title =
                "objective error, n=" + std::to_string(n) + ", m=" + std::to_string(m);
            job.curve = ReproJob::Curve::phi_error;
            jobs.push_back(std::move(job));
        }
    } else {
        std::cerr << "unknown figure '" << figure
                  << "' (expected fig1|fig2|fig3_ablations|fig5)\n";
        return kExitBadConfig;
    }

    bool any_diverged = false;
    nlohmann::json summary;
    std::vector<std::string> chart_order;
    std::map<std::string, std::pair<std::string, std::vector<SvgSeries>>> charts;
    try {
        for (auto& job : jobs) {
            job.spec.integrator.sample_count = samples;
            const ComparisonResult result = run(job.spec);
            for (const auto& vrun : result.variants) {
                const fs::path csv_path =
                    fs::path(out_dir) / (job.name + "_" + variant_name(vrun.variant) + ".csv");
                write_text_file(csv_path, variant_csv_string(vrun));
                any_diverged = any_diverged || vrun.diverged;
            }
            if (charts.find(job.chart) == charts.end()) {
                chart_order.push_back(job.chart);
                charts[job.chart].first = job.chart_title;
            }
            auto curves = curves_for(result, job.curve, job.curve_prefix);
            auto& bucket = charts[job.chart].second;
            bucket.insert(bucket.end(), std::make_move_iterator(curves.begin()),
                          std::make_move_iterator(curves.end()));
            summary[job.name] = comparison_summary_json(result);
            std::cout << job.name << " done\n";
        }
        for (const auto& stem : chart_order) {
            const auto& [title, series] = charts[stem];
            std::ostringstream svg;
            write_log_log_chart(svg, title, "t", figure == "fig2" ? "||z||" : "value", series);
            write_text_file(fs::path(out_dir) / (stem + ".svg"), svg.str());
        }
        write_text_file(fs::path(out_dir) / (figure + "_summary.json"), summary.dump(2) + "\n");
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_rates(const std::string& csv_path, const std::string& column, double t_lo, double t_hi) {
    std::ifstream in(csv_path);
    if (!in) {
        std::cerr << "io error: cannot open '" << csv_path << "'\n";
        return kExitIo;
    }
    try {
        auto series = read_csv_column(in, column);
        for (auto& [t, v] : series) v = std::max(v, kGapFloor);
        const RateFit fit = fit_rate(series, t_lo, t_hi);
        nlohmann::json out = to_json(fit);
        out["column"] = column;
        out["csv"] = csv_path;
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"primal-dual saddle point dynamics runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir, figure, csv_path, column = "gap";
    std::uint64_t seed = 42;
    bool seed_given = false;
    int samples = 0;
    double t_lo = 0.0, t_hi = 0.0;

    CLI::App* run_cmd = app.add_subcommand("run", "run the experiment described by a config");
    run_cmd->add_option("--config", config_path, "config file path")->required();
    run_cmd->add_option("--out", out_dir, "directory for relative output paths");
    run_cmd->add_option("--seed", seed, "override problem.seed")->each([&](const std::string&) {
        seed_given = true;
    });
    run_cmd->add_option("--samples", samples, "override integrator.samples");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check schedule admissibility for a config");
    validate_cmd->add_option("--config", config_path, "config file path")->required();

    CLI::App* repro_cmd = app.add_subcommand("repro", "run a preset experiment sweep");
    repro_cmd->add_option("figure", figure, "fig1|fig2|fig3_ablations|fig5")->required();
    repro_cmd->add_option("--out", out_dir, "output directory")->required();
    repro_cmd->add_option("--seed", seed, "data seed for fig5");
    repro_cmd->add_option("--samples", samples, "observation samples per run");

    CLI::App* rates_cmd = app.add_subcommand("rates", "fit a power law to a CSV column");
    rates_cmd->add_option("--csv", csv_path, "CSV produced by 'run'")->required();
    rates_cmd->add_option("--column", column, "column to fit (default: gap)");
    rates_cmd->add_option("--t-lo", t_lo, "window lower bound")->required();
    rates_cmd->add_option("--t-hi", t_hi, "window upper bound")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    if (run_cmd->parsed()) {
        return cmd_run(config_path, out_dir,
                       seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt,
                       samples > 0 ? std::optional<int>(samples) : std::nullopt);
    }
    if (validate_cmd->parsed()) return cmd_validate(config_path);
    if (repro_cmd->parsed()) return cmd_repro(figure, out_dir, seed, samples > 0 ? samples : 1000);
    if (rates_cmd->parsed()) return cmd_rates(csv_path, column, t_lo, t_hi);
    return kExitBadConfig;
}
