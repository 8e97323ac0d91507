#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace saddleflow {

/// One labelled curve of a chart. Points must be positive in both
/// coordinates; the caller floors values before plotting.
struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal log-log line chart. Charts are a reading convenience; the CSV
/// files are the record.
inline void write_log_log_chart(std::ostream& os, const std::string& title,
                                const std::string& x_label, const std::string& y_label,
                                const std::vector<SvgSeries>& series) {
    constexpr int width = 760, height = 520;
    constexpr int ml = 70, mr = 170, mt = 40, mb = 55;
    constexpr int plot_w = width - ml - mr, plot_h = height - mt - mb;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!(x_min < x_max)) { x_min = 0.1; x_max = 10.0; }
    if (!(y_min < y_max)) { y_min = 0.1; y_max = 10.0; }

    const double lx0 = std::log10(x_min), lx1 = std::log10(x_max);
    const double ly0 = std::log10(y_min), ly1 = std::log10(y_max);
    const auto px = [&](double x) { return ml + (std::log10(x) - lx0) / (lx1 - lx0) * plot_w; };
    const auto py = [&](double y) {
        return mt + plot_h - (std::log10(y) - ly0) / (ly1 - ly0) * plot_h;
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // Frame and decade gridlines.
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\""
       << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
        const double x = px(std::pow(10.0, e));
        os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
           << mt + plot_h << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << mt + plot_h + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
           << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
        const double y = py(std::pow(10.0, e));
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + plot_w << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
           << "</text>\n";
    }
    os << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 14
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + plot_h / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << mt + plot_h / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\" points=\"";
        for (const auto& [x, y] : series[i].points) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            os << px(x) << ',' << py(y) << ' ';
        }
        os << "\"/>\n";
        const int ly = mt + 16 + static_cast<int>(i) * 18;
        os << "<line x1=\"" << ml + plot_w + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
           << ml + plot_w + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + plot_w + 40 << "\" y=\"" << ly
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[i].label << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace saddleflow
