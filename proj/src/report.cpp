#include "gridsyn/report.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace gridsyn {

namespace {

std::string num(double v) { return format_double(v); }

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    return f;
}

}  // namespace

void write_log_csv(std::ostream& out, const RunResult& r) {
    out << "time";
    for (auto s : kInputSymbols) out << ',' << s;
    for (auto s : kOutputSymbols) out << ',' << s;
    for (auto s : kStateSymbols) out << ',' << s;
    for (auto s : kDistSymbols) out << ',' << s;
    out << ",y_eb,xi,target,band_lo,band_hi,P_pv,P_fc,P_mt,P_ba,P_cp,P_pmp,P_d\n";
    for (size_t k = 0; k < r.log.rows.size(); ++k) {
        const LogRow& row = r.log.rows[k];
        out << num(row.t);
        for (int i = 0; i < kNu; ++i) out << ',' << num(row.u(i));
        for (int i = 0; i < kNy; ++i) out << ',' << num(row.y(i));
        for (int i = 0; i < kNx; ++i) out << ',' << num(row.x(i));
        for (int i = 0; i < kNw; ++i) out << ',' << num(row.w(i));
        out << ',' << num(row.y_eb) << ',' << num(row.xi) << ',' << num((1 + row.xi) * row.y_eb) << ','
            << num(row.band_lo) << ',' << num(row.band_hi);
        if (k < r.powers.size()) {
            const UnitPowers& p = r.powers[k];
            for (double v : {p.P_pv, p.P_fc, p.P_mt, p.P_ba, p.P_cp, p.P_pmp, p.P_d}) out << ',' << num(v);
        } else {
            out << ",,,,,,,";
        }
        out << '\n';
    }
}

void write_control_csv(std::ostream& out, const RunResult& r) {
    size_t agents = 0;
    for (const ControlRecord& c : r.control) agents = std::max(agents, c.agent_objectives.size());
    out << "time";
    for (auto s : kInputSymbols) out << ',' << s;
    out << ",iterations,holds,sqp_iterations";
    for (size_t j = 1; j <= agents; ++j) out << ",J_" << j << ",status_" << j << ",slack_" << j;
    out << ",slow_ran,slow_held,slow_status,J1s,J2s,J3s,J4s,slow_objective,y_sp";
    for (auto s : kInputSymbols) out << ",ref_" << s;
    out << '\n';
    for (const ControlRecord& c : r.control) {
        out << num(c.t);
        for (int i = 0; i < kNu; ++i) out << ',' << num(c.u(i));
        out << ',' << c.iterations << ',' << c.holds << ',' << c.nlp_iterations;
        for (size_t j = 0; j < agents; ++j) {
            if (j < c.agent_objectives.size())
                out << ',' << num(c.agent_objectives[j]) << ',' << to_string(c.agent_status[j]) << ','
                    << num(c.agent_slack[j]);
            else
                out << ",,,";
        }
        out << ',' << (c.slow_ran ? 1 : 0) << ',' << (c.slow_held ? 1 : 0);
        if (c.slow_ran && !c.slow.u.empty()) {
            out << ',' << to_string(c.slow.status);
            for (double J : c.slow.J) out << ',' << num(J);
            out << ',' << num(c.slow.objective) << ',' << num(c.slow.y_sp.front());
            for (int i = 0; i < kNu; ++i) out << ',' << num(c.slow.u.front()(i));
        } else {
            out << ",,,,,,,";
            for (int i = 0; i < kNu; ++i) out << ',';
        }
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const RunResult& r) {
    nlohmann::ordered_json j;
    j["controller"] = r.controller;
    j["seed"] = r.scenario.seed;
    j["capacity"] = r.scenario.capacity;
    j["start"] = r.scenario.start;
    j["duration"] = r.scenario.duration;
    j["failed"] = r.failed;
    if (r.failed) j["failure"] = r.failure;
    const EvalReport& e = r.report;
    j["samples"] = e.samples;
    j["E_p"] = e.E_p;
    j["E_t"] = e.E_t;
    j["E_e"] = e.E_e;
    j["E_glb"] = e.E_glb;
    j["profit"] = e.profit;
    j["dC_es"] = e.dC_es;
    j["beta"] = {e.beta1, e.beta2, e.beta3};
    j["mean_iterations"] = e.mean_iterations;
    j["max_iterations"] = e.max_iterations;
    int holds = 0, slow_holds = 0;
    for (const LogRow& row : r.log.rows) holds += row.holds;
    for (bool h : r.log.slow_holds) slow_holds += h ? 1 : 0;
    j["agent_holds"] = holds;
    j["slow_holds"] = slow_holds;
    out << j.dump(2) << '\n';
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(std::ostream& out, const std::string& config_text, const RunResult& r) {
    nlohmann::ordered_json j;
    j["tool"] = "gridsyn";
    j["version"] = kVersion;
    j["config_hash"] = fnv1a_hex(config_text);
    j["seed"] = r.scenario.seed;
    j["controller"] = r.controller;
    j["capacity"] = r.scenario.capacity;
    j["compiler"] = __VERSION__;
    j["cxx_standard"] = static_cast<long>(__cplusplus);
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    j["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    j["config"] = config_text;
    out << j.dump(2) << '\n';
}

// ---- plots -------------------------------------------------------------------

namespace {

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<')
            o += "&lt;";
        else if (c == '>')
            o += "&gt;";
        else if (c == '&')
            o += "&amp;";
        else
            o += c;
    }
    return o;
}

// Round tick spacing covering [lo, hi] with about five steps.
double tick_step(double lo, double hi) {
    const double span = std::max(hi - lo, 1e-12);
    const double raw = span / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10 * mag;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

}  // namespace

void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series) {
    const double W = 720, H = 400, L = 70, R = 150, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const Series& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 - y0 < 1e-9 * std::max(1.0, std::abs(y0))) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title)
        << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const double xs = tick_step(x0, x1), ys = tick_step(y0, y1);
    for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs)
        out << "<line x1=\"" << px(v) << "\" y1=\"" << H - B << "\" x2=\"" << px(v) << "\" y2=\"" << H - B + 5
            << "\" stroke=\"#444\"/><text x=\"" << px(v) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
            << fmt(v) << "</text>\n";
    for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys)
        out << "<line x1=\"" << L << "\" y1=\"" << py(v) << "\" x2=\"" << W - R << "\" y2=\"" << py(v)
            << "\" stroke=\"#ddd\"/><text x=\"" << L - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
            << fmt(v) << "</text>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << esc(x_label)
        << "</text>\n";
    out << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << esc(y_label) << "</text>\n";
    for (size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        const double ly = T + 14 + 18 * static_cast<double>(k);
        out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
            << "/><text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << esc(s.name) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_plots(const std::string& dir, const RunResult& r) {
    const auto& rows = r.log.rows;
    std::vector<double> t;
    for (const LogRow& row : rows) t.push_back((row.t + r.log.dt) / 3600.0);
    auto column = [&](auto f) {
        std::vector<double> v;
        for (size_t k = 0; k < rows.size(); ++k) v.push_back(f(k));
        return v;
    };
    const std::string tl = "time of day (h)";
    {
        auto f = open_out(dir + "/plot_power.svg");
        write_svg_chart(f, "Supplied power and instruction", tl, "kW",
                        {{"y1", t, column([&](size_t k) { return rows[k].y(sy::P_sl); }), "#1f77b4"},
                         {"(1+xi) y_eb", t, column([&](size_t k) { return (1 + rows[k].xi) * rows[k].y_eb; }),
                          "#d62728", true}});
    }
    {
        auto f = open_out(dir + "/plot_temperature.svg");
        write_svg_chart(f, "Building temperature", tl, "degC",
                        {{"t_br", t, column([&](size_t k) { return rows[k].y(sy::t_br); }), "#2ca02c"},
                         {"band low", t, column([&](size_t k) { return rows[k].band_lo; }), "#7f7f7f", true},
                         {"band high", t, column([&](size_t k) { return rows[k].band_hi; }), "#7f7f7f", true}});
    }
    {
        auto f = open_out(dir + "/plot_units.svg");
        const auto& pw = r.powers;
        write_svg_chart(f, "Unit powers", tl, "kW",
                        {{"PV", t, column([&](size_t k) { return pw[k].P_pv; }), "#ff7f0e"},
                         {"FC", t, column([&](size_t k) { return pw[k].P_fc; }), "#9467bd"},
                         {"MT", t, column([&](size_t k) { return pw[k].P_mt; }), "#8c564b"},
                         {"battery", t, column([&](size_t k) { return pw[k].P_ba; }), "#e377c2"},
                         {"compressor", t, column([&](size_t k) { return pw[k].P_cp; }), "#17becf"},
                         {"pumps", t, column([&](size_t k) { return pw[k].P_pmp; }), "#bcbd22"},
                         {"load", t, column([&](size_t k) { return pw[k].P_d; }), "#7f7f7f", true}});
    }
    {
        auto f = open_out(dir + "/plot_storage.svg");
        write_svg_chart(
            f, "Storage states", tl, "fraction",
            {{"battery SOC", t, column([&](size_t k) { return rows[k].x(sx::C_soc); }), "#1f77b4"},
             {"SOC plan", t, column([&](size_t k) { return r.schedule.soc_ref(rows[k].t + r.log.dt); }), "#1f77b4",
              true},
             {"cold storage SOT", t, column([&](size_t k) { return rows[k].x(sx::C_sot); }), "#d62728"},
             {"SOT plan", t, column([&](size_t k) { return r.schedule.sot_ref(rows[k].t + r.log.dt); }), "#d62728",
              true}});
    }
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
    out << "capacity,controller,E_p,E_t,E_e,E_glb,profit,dC_es,mean_iterations,max_iterations,status\n";
    for (const CompareRow& c : rows) {
        out << num(c.capacity) << ',' << c.controller << ',';
        if (c.failed) {
            out << ",,,,,,,," << '"' << c.failure << '"' << '\n';
            continue;
        }
        const EvalReport& e = c.report;
        out << num(e.E_p) << ',' << num(e.E_t) << ',' << num(e.E_e) << ',' << num(e.E_glb) << ',' << num(e.profit)
            << ',' << num(e.dC_es) << ',' << num(e.mean_iterations) << ',' << e.max_iterations << ",ok\n";
    }
}

void write_compare_plot(const std::string& path, const std::vector<CompareRow>& rows) {
    std::map<std::string, Series> by;
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    for (const CompareRow& c : rows) {
        if (c.failed) continue;
        Series& s = by[c.controller];
        s.name = c.controller;
        s.x.push_back(c.capacity * 100);
        s.y.push_back(c.report.E_glb);
    }
    std::vector<Series> series;
    for (auto& [name, s] : by) {
        s.color = colors[series.size() % 5];
        series.push_back(s);
    }
    auto f = open_out(path);
    write_svg_chart(f, "Global index against regulation capacity", "capacity (%)", "E_glb", series);
}

}  // namespace gridsyn
