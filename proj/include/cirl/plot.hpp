#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cirl/io.hpp"

namespace cirl {

/// One polyline on a chart.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

inline const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

namespace detail {

struct Extent {
    double lo = 0.0, hi = 1.0;
};

inline Extent extent(const std::vector<Series>& series, bool y_axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series)
        for (double v : (y_axis ? s.y : s.x)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) return {0.0, 1.0};
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

} // namespace detail

/// Renders a single-axes line chart as an SVG document. Pure function of its
/// inputs, so identical data yields identical bytes.
inline std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel,
                                  int width = 640, int height = 400) {
    const int ml = 64, mr = 16, mt = 32, mb = 48;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto ex = detail::extent(series, false);
    const auto ey = detail::extent(series, true);
    const auto px = [&](double v) { return ml + (v - ex.lo) / (ex.hi - ex.lo) * pw; };
    const auto py = [&](double v) { return mt + ph - (v - ey.lo) / (ey.hi - ey.lo) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";

    // axes box and ticks
    s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << fmt_num(pw) << "\" height=\""
      << fmt_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = ex.lo + (ex.hi - ex.lo) * i / 4.0;
        const double fy = ey.lo + (ey.hi - ey.lo) * i / 4.0;
        s << "<text x=\"" << fmt_num(px(fx)) << "\" y=\"" << height - mb + 16
          << "\" text-anchor=\"middle\">" << fmt_num(fx) << "</text>\n";
        s << "<text x=\"" << ml - 6 << "\" y=\"" << fmt_num(py(fy) + 4)
          << "\" text-anchor=\"end\">" << fmt_num(fy) << "</text>\n";
        s << "<line x1=\"" << ml << "\" x2=\"" << width - mr << "\" y1=\"" << fmt_num(py(fy))
          << "\" y2=\"" << fmt_num(py(fy)) << "\" stroke=\"#dddddd\"/>\n";
    }
    s << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
    s << "<text x=\"14\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << height / 2 << ")\">" << ylabel << "</text>\n";

    for (const auto& sr : series) {
        s << "<polyline fill=\"none\" stroke=\"" << sr.color << "\""
          << (sr.dashed ? " stroke-dasharray=\"5,4\"" : "") << " stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            s << fmt_num(px(sr.x[i])) << ',' << fmt_num(py(sr.y[i])) << ' ';
        s << "\"/>\n";
    }
    // legend
    int ly = mt + 14;
    for (const auto& sr : series) {
        s << "<line x1=\"" << ml + 8 << "\" x2=\"" << ml + 32 << "\" y1=\"" << ly << "\" y2=\""
          << ly << "\" stroke=\"" << sr.color << "\""
          << (sr.dashed ? " stroke-dasharray=\"5,4\"" : "") << " stroke-width=\"1.5\"/>\n";
        s << "<text x=\"" << ml + 38 << "\" y=\"" << ly + 4 << "\">" << sr.label << "</text>\n";
        ly += 16;
    }
    s << "</svg>\n";
    return s.str();
}

/// States + setpoints + actions from one or more trajectory CSVs, stacked as
/// four panels in one SVG.
inline std::string plot_trajectories(const std::vector<std::pair<std::string, CsvTable>>& runs) {
    std::vector<Series> cb, vol, tc, fin;
    int idx = 0;
    for (const auto& [label, t] : runs) {
        const auto x = t.column("time_min");
        const char* color = kPalette[idx % 8];
        cb.push_back({label, x, t.column("c_b"), color, false});
        vol.push_back({label, x, t.column("vol"), color, false});
        tc.push_back({label, x, t.column("t_c"), color, false});
        fin.push_back({label, x, t.column("f_in"), color, false});
        ++idx;
    }
    if (!runs.empty()) {
        const auto& t = runs.front().second;
        cb.push_back({"setpoint", t.column("time_min"), t.column("cb_sp"), "#000000", true});
        vol.push_back({"setpoint", t.column("time_min"), t.column("v_sp"), "#000000", true});
    }
    std::ostringstream s;
    const int w = 640, h = 300;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << 4 * h
      << "\">\n";
    const std::string panels[] = {
        svg_line_chart(cb, "Concentration of B", "time (min)", "C_B (mol/m^3)", w, h),
        svg_line_chart(vol, "Volume", "time (min)", "V (m^3)", w, h),
        svg_line_chart(tc, "Coolant temperature", "time (min)", "T_c (K)", w, h),
        svg_line_chart(fin, "Inlet flow", "time (min)", "F_in (m^3/min)", w, h)};
    for (int i = 0; i < 4; ++i)
        s << "<g transform=\"translate(0," << i * h << ")\">" << panels[i] << "</g>\n";
    s << "</svg>\n";
    return s.str();
}

/// Six gain trajectories from gain CSVs, two panels (one per loop).
inline std::string plot_gains(const std::vector<std::pair<std::string, CsvTable>>& runs) {
    std::vector<Series> cb_loop, v_loop;
    int idx = 0;
    for (const auto& [label, t] : runs) {
        const auto x = t.column("step");
        cb_loop.push_back({label + " Kp", x, t.column("kp_cb"), kPalette[idx % 8], false});
        cb_loop.push_back({label + " tau_i", x, t.column("ti_cb"), kPalette[(idx + 1) % 8], true});
        cb_loop.push_back({label + " tau_d", x, t.column("td_cb"), kPalette[(idx + 2) % 8], true});
        v_loop.push_back({label + " Kp", x, t.column("kp_v"), kPalette[idx % 8], false});
        v_loop.push_back({label + " tau_i", x, t.column("ti_v"), kPalette[(idx + 1) % 8], true});
        v_loop.push_back({label + " tau_d", x, t.column("td_v"), kPalette[(idx + 2) % 8], true});
        idx += 3;
    }
    std::ostringstream s;
    const int w = 640, h = 320;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << 2 * h
      << "\">\n";
    s << "<g>" << svg_line_chart(cb_loop, "C_B loop gains", "step", "gain", w, h) << "</g>\n";
    s << "<g transform=\"translate(0," << h << ")\">"
      << svg_line_chart(v_loop, "V loop gains", "step", "gain", w, h) << "</g>\n";
    s << "</svg>\n";
    return s.str();
}

/// Best-fitness learning curves, one series per CSV.
inline std::string plot_learning_curves(const std::vector<std::pair<std::string, CsvTable>>& runs) {
    std::vector<Series> series;
    int idx = 0;
    for (const auto& [label, t] : runs) {
        series.push_back({label, t.column("iteration"), t.column("best_fitness"),
                          kPalette[idx % 8], false});
        ++idx;
    }
    return svg_line_chart(series, "Learning curves", "iteration", "best fitness");
}

} // namespace cirl
