#pragma once

#include "gridsyn/closed_loop.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gridsyn {

inline constexpr const char* kVersion = "0.3.0";

// Plant log: one row per fast sample with states, inputs, outputs and unit
// powers. Power columns stay empty for rows without a matching entry.
void write_log_csv(std::ostream& out, const RunResult& r);

// Controller log: per fast sample the applied inputs, iterations and
// per-agent objectives, statuses and slacks; slow-layer columns are filled
// on slow samples and left empty otherwise.
void write_control_csv(std::ostream& out, const RunResult& r);

// Evaluation indices as JSON. Holds no timing, so equal runs give equal text.
void write_report_json(std::ostream& out, const RunResult& r);

// 64-bit FNV-1a of a text, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// Run manifest: config hash, seed, controller and tool versions. `config_text`
// is the canonical text of every input file the run read.
void write_manifest(std::ostream& out, const std::string& config_text, const RunResult& r);

// Writes plot_power.svg, plot_temperature.svg, plot_units.svg and
// plot_storage.svg into `dir`.
void write_plots(const std::string& dir, const RunResult& r);

struct CompareRow {
    double capacity = 0;
    std::string controller;
    EvalReport report;
    bool failed = false;
    std::string failure;
};

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);
// E_glb against capacity per controller.
void write_compare_plot(const std::string& path, const std::vector<CompareRow>& rows);

// Minimal line chart; used by the plot writers.
struct Series {
    std::string name;
    std::vector<double> x, y;
    std::string color;
    bool dashed = false;
};
void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

}  // namespace gridsyn
