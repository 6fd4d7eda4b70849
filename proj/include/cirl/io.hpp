#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cirl/errors.hpp"
#include "cirl/env.hpp"
#include "cirl/optimize.hpp"

namespace cirl {

/// Shortest round-trip decimal rendering; stable across runs.
inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline const char* kTrajectoryHeader =
    "step,time_min,c_a,c_b,c_c,temp,vol,cb_meas,t_meas,v_meas,cb_sp,v_sp,t_c,f_in,reward";

inline std::string trajectory_csv(const EpisodeTrace& trace) {
    std::ostringstream out;
    out << kTrajectoryHeader << '\n';
    for (const auto& r : trace.steps) {
        out << r.step << ',' << fmt_num((r.step + 1) * kControlDt) << ',' << fmt_num(r.state.c_a)
            << ',' << fmt_num(r.state.c_b) << ',' << fmt_num(r.state.c_c) << ','
            << fmt_num(r.state.temp) << ',' << fmt_num(r.state.vol) << ',' << fmt_num(r.meas.c_b)
            << ',' << fmt_num(r.meas.temp) << ',' << fmt_num(r.meas.vol) << ','
            << fmt_num(r.sp.c_b) << ',' << fmt_num(r.sp.vol) << ',' << fmt_num(r.u.t_c) << ','
            << fmt_num(r.u.f_in) << ',' << fmt_num(r.reward) << '\n';
    }
    return out.str();
}

inline const char* kGainHeader = "step,kp_cb,ti_cb,td_cb,kp_v,ti_v,td_v";

inline std::string gain_trajectory_csv(const EpisodeTrace& trace) {
    std::ostringstream out;
    out << kGainHeader << '\n';
    for (const auto& r : trace.steps) {
        if (!r.has_gains) continue;
        out << r.step << ',' << fmt_num(r.gains.cb.k_p) << ',' << fmt_num(r.gains.cb.tau_i) << ','
            << fmt_num(r.gains.cb.tau_d) << ',' << fmt_num(r.gains.vol.k_p) << ','
            << fmt_num(r.gains.vol.tau_i) << ',' << fmt_num(r.gains.vol.tau_d) << '\n';
    }
    return out.str();
}

inline const char* kCurveHeader = "iteration,best_fitness,mean_fitness,min_fitness,wall_time_s";

inline std::string learning_curve_csv(const std::vector<IterationStats>& history) {
    std::ostringstream out;
    out << kCurveHeader << '\n';
    for (const auto& s : history)
        out << s.iteration << ',' << fmt_num(s.best_fitness) << ',' << fmt_num(s.mean_fitness)
            << ',' << fmt_num(s.min_fitness) << ',' << fmt_num(s.wall_time_s) << '\n';
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Minimal CSV table: header row plus numeric columns.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        throw DataError("csv: missing column '" + name + "'");
    }

    std::vector<double> column(const std::string& name) const {
        const int idx = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(idx)]);
        return out;
    }
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError("csv: non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() != t.columns.size()) throw DataError("csv: ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace cirl
