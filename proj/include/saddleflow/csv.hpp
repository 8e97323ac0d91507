#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saddleflow/experiments.hpp"

namespace saddleflow {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader =
    "t,gap,grad_f_res,grad_g_res,delta,res_x,res_y,energy_e,energy_ebar,norm_z,dist_to_saddle,"
    "step";

/// One row per observation time, columns in the fixed schema order.
inline void write_variant_csv(std::ostream& os, const VariantRun& run) {
    os << kCsvHeader << "\n";
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("nan");
    };
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        const DiagnosticsRecord& r = run.records[i];
        os << format_double(r.t) << ',' << format_double(r.gap) << ','
           << format_double(r.grad_f_res) << ',' << format_double(r.grad_g_res) << ','
           << format_double(r.delta) << ',' << format_double(r.res_x) << ','
           << format_double(r.res_y) << ',' << opt(r.energy_e) << ',' << opt(r.energy_ebar) << ','
           << format_double(r.norm_z) << ',' << format_double(r.dist_to_saddle) << ','
           << format_double(run.samples[i].accepted_step) << "\n";
    }
}

inline std::string variant_csv_string(const VariantRun& run) {
    std::ostringstream os;
    write_variant_csv(os, run);
    return os.str();
}

/// Reads one named column (plus t) back from a CSV in the schema above.
inline std::vector<std::pair<double, double>> read_csv_column(std::istream& is,
                                                              const std::string& column) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv_column: empty file");

    std::vector<std::string> names;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) names.push_back(cell);
    }
    std::size_t t_idx = names.size(), col_idx = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "t") t_idx = i;
        if (names[i] == column) col_idx = i;
    }
    if (t_idx == names.size()) throw std::runtime_error("read_csv_column: no 't' column");
    if (col_idx == names.size()) {
        throw std::runtime_error("read_csv_column: no '" + column + "' column");
    }

    std::vector<std::pair<double, double>> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        double t = 0.0, v = 0.0;
        for (std::size_t i = 0; std::getline(row, cell, ','); ++i) {
            if (i == t_idx) t = std::stod(cell);
            if (i == col_idx) v = std::stod(cell);
        }
        out.emplace_back(t, v);
    }
    return out;
}

}  // namespace saddleflow
