// Acceptance suite: one PASS/FAIL line per criterion, run against the shipped
// configuration. Exits non-zero when any criterion fails.

#include "gridsyn/closed_loop.hpp"
#include "gridsyn/decomp.hpp"
#include "gridsyn/empc.hpp"
#include "gridsyn/integrator.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/netgraph.hpp"
#include "gridsyn/nlp.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/plant.hpp"
#include "gridsyn/scenario.hpp"
#include "support/oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gridsyn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && s > budget_s) {
        o.pass = false;
        o.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const std::string config_dir = GRIDSYN_CONFIG_DIR;

struct Setup {
    KvFile params_kv, scenario_kv;
    PlantParams plant;
    DecompConfig decomp;
    ScenarioConfig scenario;
    EmpcConfig empc;
};

const Setup& setup() {
    static const Setup s = [] {
        Setup s;
        s.params_kv = KvFile::load(config_dir + "/ies.params", kParamsHeader);
        s.plant = params_from_kv(s.params_kv);
        s.decomp = decomp_config_from_kv(s.params_kv);
        s.scenario_kv = KvFile::load(config_dir + "/desk.scenario", kScenarioHeader);
        s.scenario = scenario_from_kv(s.scenario_kv);
        s.empc = empc_config_from_kv(s.scenario_kv);
        return s;
    }();
    return s;
}

const Decomposition& plant_decomposition() {
    static const Decomposition d = decompose(setup().plant, setup().decomp);
    return d;
}

RunResult run(const std::string& controller, double capacity, const std::function<void(ScenarioConfig&)>& edit = {}) {
    ScenarioConfig sc = setup().scenario;
    sc.controller = controller;
    sc.capacity = capacity;
    if (edit) edit(sc);
    return run_closed_loop(setup().plant, sc, setup().empc, plant_decomposition());
}

AdjacencyMatrix graph(const Eigen::MatrixXi& a) {
    AdjacencyMatrix g;
    g.a = a;
    g.nodes = generic_nodes(static_cast<int>(a.rows()));
    return g;
}

bool has_isolated(const Eigen::MatrixXi& a) {
    for (int i = 0; i < a.rows(); ++i)
        if (a.row(i).sum() + a.col(i).sum() == 0) return true;
    return false;
}

std::string join(const std::set<std::string>& s) {
    std::string out;
    for (const auto& e : s) out += (out.empty() ? "" : ",") + e;
    return "{" + out + "}";
}

// Fast members of each detected community, compared with the reference sets.
bool fast_membership_matches(const Decomposition& d) {
    static const std::vector<std::set<std::string>> want = {
        {"x1", "x2", "x3", "x4", "x5", "x16", "x18"},
        {"x6", "x7", "x8", "x9", "x15", "x22"},
        {"x10", "x11", "x12", "x13", "x14"},
    };
    if (!d.split || d.partition.communities != 3) return false;
    std::set<int> slow(d.split->slow_states.begin(), d.split->slow_states.end());
    std::vector<std::set<std::string>> got(3);
    for (int i = 0; i < kNx; ++i) {
        const int c = d.partition.tags[i];
        if (c >= 0 && c < 3 && !slow.count(i)) got[c].insert(d.a_f.nodes[i].label);
    }
    for (const auto& w : want)
        if (std::find(got.begin(), got.end(), w) == got.end()) return false;
    return true;
}

// ---- closed-loop runs shared by several criteria ---------------------------

const RunResult& desk_p1_zero() {
    static const RunResult r = run("p1", 0.0);
    return r;
}

const std::vector<RunResult>& desk_quarter() {
    static const std::vector<RunResult> r = [] {
        std::vector<RunResult> v;
        for (const char* id : {"p1", "p2", "p3", "p4"}) v.push_back(run(id, 0.25));
        return v;
    }();
    return r;
}

double rosen(const Eigen::Vector2d& x) { return (1 - x(0)) * (1 - x(0)) + 100 * std::pow(x(1) - x(0) * x(0), 2); }

}  // namespace

int main() {
    std::printf("gridsyn acceptance, config from %s\n", config_dir.c_str());

    // ---- decomposition -----------------------------------------------------
    criterion("decomposition: scale ratio", 1.0, [] {
        const Decomposition d = decompose(setup().plant, setup().decomp);
        if (!d.split) return Outcome{false, "no vertical split: " + d.split_note};
        const double eps = d.split->epsilon;
        const bool ok = fmt("%.3g", eps) == "0.00206";
        return Outcome{ok, "epsilon " + fmt("%.6g", eps) + " = " + fmt("%.6g", d.split->tau_f_rep) + "/" +
                               fmt("%.6g", d.split->tau_s_rep)};
    });

    criterion("decomposition: vertical sets", 1.0, [] {
        const Decomposition d = decompose(setup().plant, setup().decomp);
        if (!d.split) return Outcome{false, "no vertical split"};
        std::set<std::string> xs, us, ys;
        for (int i : d.split->slow_states) xs.insert(d.a_f.nodes[i].label);
        for (int i : d.split->slow_inputs) us.insert("u" + std::to_string(i + 1));
        for (int i : d.split->slow_outputs) ys.insert("y" + std::to_string(i + 1));
        const bool ok = xs == std::set<std::string>{"x17", "x19", "x20", "x21", "x23"} &&
                        us == std::set<std::string>{"u3", "u5", "u6"} && ys == std::set<std::string>{"y2"};
        return Outcome{ok, "slow " + join(xs) + " u_s " + join(us) + " y_s " + join(ys)};
    });

    criterion("decomposition: fast communities", 30.0, [] {
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            DecompConfig c = setup().decomp;
            c.detection.n_c_upper = 3;
            c.detection.seed = seed;
            if (fast_membership_matches(decompose(setup().plant, c))) ++hits;
        }
        return Outcome{hits >= 45, std::to_string(hits) + " of 50 seeds reproduce the reference membership"};
    });

    // ---- community detection -----------------------------------------------
    criterion("detection vs brute force", 60.0, [] {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> density(0.2, 0.6);
        std::uniform_int_distribution<int> size(3, 8);
        DetectionSettings s;
        s.n_c_upper = 8;
        s.n_l_lower = 30;
        int graphs = 0, agree = 0;
        double worst = 0;
        while (graphs < 50) {
            const Eigen::MatrixXi a = oracle::random_digraph(size(rng), density(rng), rng);
            if (has_isolated(a)) continue;
            s.seed = static_cast<std::uint64_t>(graphs + 1);
            const double gap = std::abs(detect_communities(graph(a), s).modularity - oracle::best_modularity(a));
            worst = std::max(worst, gap);
            if (gap <= 1e-9) ++agree;
            ++graphs;
        }
        return Outcome{agree == graphs,
                       std::to_string(agree) + "/" + std::to_string(graphs) + " graphs, worst gap " + fmt("%.2e", worst)};
    });

    criterion("modularity identities", 0, [] {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> density(0.2, 0.6);
        std::uniform_int_distribution<int> size(3, 12);
        double worst_one = 0, worst_single = 0;
        for (int g = 0; g < 20;) {
            const Eigen::MatrixXi a = oracle::random_digraph(size(rng), density(rng), rng);
            const int n = static_cast<int>(a.rows());
            if (a.sum() == 0) continue;
            ++g;
            worst_one = std::max(worst_one, std::abs(modularity(a, std::vector<int>(n, 0))));
            std::vector<int> single(n);
            for (int i = 0; i < n; ++i) single[i] = i;
            const double m = a.sum();
            double expect = 0;
            for (int i = 0; i < n; ++i) expect -= a.row(i).sum() * a.col(i).sum() / (m * m);
            worst_single = std::max(worst_single, std::abs(modularity(a, single) - expect));
        }
        return Outcome{worst_one == 0.0 && worst_single <= 1e-12,
                       "one community " + fmt("%.1e", worst_one) + ", singletons " + fmt("%.1e", worst_single)};
    });

    // ---- plant -------------------------------------------------------------
    criterion("plant invariants", 0, [] {
        const PlantParams& p = setup().plant;
        const OperatingPoint op = reference_equilibrium(p);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> jitter(-0.1, 0.1);
        StateVec x = op.x;
        double worst_balance = 0, worst_mix = 0;
        for (int k = 0; k < 3600; ++k) {
            InputVec u = op.u;
            for (int i = 0; i < kNu - 1; ++i) u(i) *= 1 + jitter(rng);
            u(su::P_bar) = 20 * jitter(rng);
            x = step(x, u, op.z, op.w, 1.0, p);
            const UnitPowers pw = unit_powers(x, u, op.z, op.w, p);
            const double y1 = outputs(x, u, op.z, op.w, p)(sy::P_sl);
            const double supply = pw.P_pv + pw.P_fc + pw.P_mt + pw.P_ba;
            const double balance = y1 + pw.P_cp + pw.P_pmp + pw.P_d - supply;
            const double scale = std::max({1.0, std::abs(y1), pw.P_pv + pw.P_fc + pw.P_mt + std::abs(pw.P_ba)});
            worst_balance = std::max(worst_balance, std::abs(balance) / scale);
            const NetworkFlows n = water_network(u, op.z, x, p);
            const double rhs = u(su::G_ab) * n.t_ab + u(su::G_ec) * n.t_ec + n.G_st * n.t_cp;
            worst_mix = std::max(worst_mix, std::abs(n.G_sl * n.t_sl - rhs) / std::max(1.0, std::abs(rhs)));
        }

        auto f = [](const Eigen::Matrix<double, 1, 1>& v) { return Eigen::Matrix<double, 1, 1>(-v); };
        const Eigen::Matrix<double, 1, 1> x0(1.0);
        double prev = 0, slope = 1e9;
        for (int n : {5, 10, 20, 40}) {
            const double err = std::abs(rk4_integrate(f, x0, 1.0 / n, n)(0) - std::exp(-1.0));
            if (prev > 0) slope = std::min(slope, std::log2(prev / err));
            prev = err;
        }
        return Outcome{worst_balance <= 1e-9 && worst_mix <= 1e-9 && slope >= 3.9,
                       "balance " + fmt("%.1e", worst_balance) + ", mixing " + fmt("%.1e", worst_mix) +
                           " over 3600 steps, order slope " + fmt("%.3f", slope)};
    });

    // ---- closed loop -------------------------------------------------------
    criterion("closed loop: comfort and tracking", 600.0, [] {
        const RunResult& r = desk_p1_zero();
        if (r.failed) return Outcome{false, "run failed: " + r.failure};
        const auto& rows = r.log.rows;
        int inside = 0;
        for (const LogRow& row : rows) {
            const double t = row.y(sy::t_br);
            if (t >= row.band_lo && t <= row.band_hi) ++inside;
        }
        const double share = static_cast<double>(inside) / rows.size();
        const double tail_start = r.log.t0 + r.log.duration - 600;
        double dev = 0, ref = 0;
        int n = 0;
        for (const LogRow& row : rows)
            if (row.t >= tail_start) {
                dev += std::abs(row.y(sy::P_sl) - row.y_eb);
                ref += std::abs(row.y_eb);
                ++n;
            }
        const double rel = n > 0 && ref > 0 ? dev / ref : 1e9;
        return Outcome{share >= 0.95 && rel <= 0.05, fmt("%.1f%%", 100 * share) + " of samples in band, final 10 min " +
                                                         "tracking error " + fmt("%.2f%%", 100 * rel) + " of y_eb"};
    });

    criterion("closed loop: regulation step", 0, [] {
        const double step_at = 300;
        const RunResult r = run("p1", 0.25, [&](ScenarioConfig& sc) {
            sc.duration = 900;
            sc.constant_conditions = true;
            sc.xi_step_time = step_at;
            sc.xi_step_value = 0.25;
        });
        if (r.failed) return Outcome{false, "run failed: " + r.failure};
        double reached = -1, worst_after = 0;
        for (const LogRow& row : r.log.rows) {
            const double t_end = row.t + r.log.dt - r.log.t0;
            if (t_end <= step_at) continue;
            const double rel = std::abs(row.y(sy::P_sl) - 1.25 * row.y_eb) / std::abs(row.y_eb);
            if (reached < 0 && rel < 0.05) reached = t_end - step_at;
            if (reached >= 0) worst_after = std::max(worst_after, rel);
        }
        if (reached < 0) return Outcome{false, "never within 5% of the stepped target"};
        return Outcome{reached <= 120, "within 5% after " + fmt("%.0f s", reached) + ", worst afterwards " +
                                           fmt("%.2f%%", 100 * worst_after)};
    });

    criterion("closed loop: controller ordering", 0, [] {
        const auto& r = desk_quarter();
        std::string detail;
        for (const RunResult& x : r) {
            detail += x.controller + " " + fmt("%.2f", x.report.E_glb) + (x.failed ? " (failed)" : "") + "  ";
            if (x.failed) return Outcome{false, detail};
        }
        const double p1 = r[0].report.E_glb, p2 = r[1].report.E_glb;
        const double p34 = std::max(r[2].report.E_glb, r[3].report.E_glb);
        return Outcome{p1 < p2 && p2 < p34, "E_glb " + detail};
    });

    criterion("closed loop: fast iterations", 0, [] {
        const RunResult& r = desk_quarter()[0];
        const double mean = r.report.mean_iterations;
        const int worst = r.report.max_iterations;
        return Outcome{mean >= 1.5 && mean <= 4.0 && worst <= setup().empc.fast.c_max,
                       "mean " + fmt("%.3f", mean) + ", max " + std::to_string(worst)};
    });

    // ---- solver ------------------------------------------------------------
    criterion("NLP solver", 0, [] {
        NlpSettings st;
        st.max_iter = 200;

        NlpProblem rb;
        rb.n = 2;
        rb.objective = [](const Eigen::VectorXd& x) { return rosen(x.head<2>()); };
        rb.A_lin = Eigen::RowVector2d(1, 1);
        rb.b_lin = Eigen::VectorXd::Constant(1, 1.0);
        rb.lb = Eigen::Vector2d::Constant(-2);
        rb.ub = Eigen::Vector2d::Constant(2);
        rb.x0 = Eigen::Vector2d(-1, 1);

        NlpProblem circle;
        circle.n = 2;
        circle.objective = [](const Eigen::VectorXd& x) { return x(0) + x(1); };
        circle.eq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x.squaredNorm() - 2); };
        circle.ineq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, -x(1) - 0.5); };
        circle.lb = Eigen::Vector2d::Constant(-5);
        circle.ub = Eigen::Vector2d::Constant(5);
        circle.x0 = Eigen::Vector2d(-1, 1);

        NlpProblem bound;
        bound.n = 1;
        bound.objective = [](const Eigen::VectorXd& x) { return (x(0) - 3) * (x(0) - 3); };
        bound.lb = Eigen::VectorXd::Constant(1, 0.0);
        bound.ub = Eigen::VectorXd::Constant(1, 2.0);
        bound.x0 = Eigen::VectorXd::Constant(1, 1.0);

        bool ok = true;
        std::string detail = "KKT";
        for (const NlpProblem* p : {&rb, &circle, &bound}) {
            const NlpSolution s = solve(*p, st);
            ok = ok && s.status == NlpStatus::Converged && s.kkt_residual <= 1e-6;
            detail += " " + fmt("%.1e", s.kkt_residual);
        }
        const NlpSolution s = solve(rb, st);
        const Eigen::Vector2d grid = oracle::grid_minimise(
            rosen, [](const Eigen::Vector2d& x) { return x.sum() <= 1.0 && x.cwiseAbs().maxCoeff() <= 2.0; }, -2, 2,
            400);
        const double gap = (s.x - grid).cwiseAbs().maxCoeff();
        ok = ok && gap <= 1e-5;
        return Outcome{ok, detail + ", Rosenbrock vs grid " + fmt("%.1e", gap)};
    });

    // ---- determinism -------------------------------------------------------
    criterion("determinism", 0, [] {
        auto once = [] { return run("p1", 0.25, [](ScenarioConfig& sc) { sc.duration = 600; }); };
        const RunResult a = once(), b = once();
        auto same = [](const EvalReport& x, const EvalReport& y) {
            return x.E_p == y.E_p && x.E_t == y.E_t && x.E_e == y.E_e && x.E_glb == y.E_glb && x.profit == y.profit &&
                   x.dC_es == y.dC_es && x.samples == y.samples && x.mean_iterations == y.mean_iterations &&
                   x.max_iterations == y.max_iterations;
        };
        const bool ok = !a.failed && same(a.report, b.report);
        return Outcome{ok, "E_glb " + fmt("%.17g", a.report.E_glb) + " vs " + fmt("%.17g", b.report.E_glb)};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
