// gridsyn command line: decompose, simulate, compare.

#include "gridsyn/closed_loop.hpp"
#include "gridsyn/decomp.hpp"
#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/report.hpp"
#include "gridsyn/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace gridsyn;

namespace {

constexpr int kExitConfig = 2, kExitModel = 3, kExitSolver = 4, kExitIo = 5;

struct Options {
    std::string params, scenario, out = "out", controller;
    std::optional<std::uint64_t> seed;
    std::optional<double> capacity;
    std::vector<double> capacities;
    std::vector<std::string> controllers{"p1", "p2", "p3", "p4"};
    bool emit_plots = false, emit_adjacency = false;
};

// Everything one run reads, after command-line overrides.
struct Inputs {
    KvFile params_kv;
    KvFile scenario_kv;
    PlantParams plant;
    DecompConfig decomp;
    ScenarioConfig scenario;
    EmpcConfig empc;

    std::string canonical() const {
        std::ostringstream s;
        params_kv.write(s);
        scenario_kv.write(s);
        return s.str();
    }
};

Inputs load_inputs(const Options& o, bool need_scenario) {
    Inputs in;
    if (!o.params.empty()) {
        if (!fs::exists(o.params)) throw IoError("params file not found: " + o.params);
        in.params_kv = KvFile::load(o.params, kParamsHeader);
        in.plant = params_from_kv(in.params_kv);
    } else {
        params_to_kv(in.plant, in.params_kv);
    }
    in.decomp = decomp_config_from_kv(in.params_kv);
    if (!need_scenario) return in;
    if (!o.scenario.empty()) {
        if (!fs::exists(o.scenario)) throw IoError("scenario file not found: " + o.scenario);
        in.scenario_kv = KvFile::load(o.scenario, kScenarioHeader);
    } else {
        in.scenario_kv.set_header(kScenarioHeader);
    }
    in.scenario = scenario_from_kv(in.scenario_kv);
    in.empc = empc_config_from_kv(in.scenario_kv);
    if (o.seed) in.scenario.seed = *o.seed;
    if (!o.controller.empty()) in.scenario.controller = o.controller;
    if (o.capacity) in.scenario.capacity = *o.capacity;
    if (in.scenario.capacity < 0 || in.scenario.capacity > 1) throw ConfigError("capacity must lie in [0, 1]");
    // Canonical form so the manifest hash covers overrides and defaults alike.
    KvFile canon;
    scenario_to_kv(in.scenario, canon);
    empc_config_to_kv(in.empc, canon);
    in.scenario_kv = canon;
    return in;
}

std::ofstream create(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    return f;
}

void prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

int cmd_decompose(const Options& o) {
    Inputs in = load_inputs(o, false);
    prepare_out(o.out);
    Decomposition d = decompose(in.plant, in.decomp);
    {
        auto f = create(fs::path(o.out) / "decomposition.json");
        write_decomposition_report(f, d, in.decomp);
    }
    {
        auto f = create(fs::path(o.out) / "partition.txt");
        write_partition(f, d.a_f, d.partition);
    }
    if (o.emit_adjacency) {
        auto f = create(fs::path(o.out) / "adjacency.edges");
        write_edge_list(f, d.a_e);
        auto g = create(fs::path(o.out) / "fast_adjacency.edges");
        write_edge_list(g, d.a_f);
    }
    if (d.split)
        std::cout << "epsilon " << format_double(d.split->epsilon) << ", " << d.split->slow_states.size()
                  << " slow states, " << d.split->fast_states.size() << " fast states\n";
    else
        std::cout << d.split_note << '\n';
    std::cout << d.partition.communities << " communities, modularity " << format_double(d.partition.modularity)
              << '\n';
    if (!d.subsystem_note.empty()) std::cout << d.subsystem_note << '\n';
    return 0;
}

int cmd_simulate(const Options& o) {
    Inputs in = load_inputs(o, true);
    prepare_out(o.out);
    const fs::path out(o.out);
    Decomposition d = decompose(in.plant, in.decomp);

    // Rows are kept as they arrive so a thrown solver error still leaves a log.
    RunResult partial;
    partial.controller = in.scenario.controller;
    partial.scenario = in.scenario;
    RunResult r;
    try {
        r = run_closed_loop(in.plant, in.scenario, in.empc, d,
                            [&](const LogRow& row) { partial.log.rows.push_back(row); });
    } catch (...) {
        auto f = create(out / "log.csv");
        write_log_csv(f, partial);
        throw;
    }
    {
        auto f = create(out / "log.csv");
        write_log_csv(f, r);
    }
    {
        auto f = create(out / "control.csv");
        write_control_csv(f, r);
    }
    {
        auto f = create(out / "report.json");
        write_report_json(f, r);
    }
    {
        auto f = create(out / "manifest.json");
        write_manifest(f, in.canonical(), r);
    }
    if (o.emit_plots) write_plots(out.string(), r);
    if (r.failed) {
        std::cerr << "gridsyn: run stopped early: " << r.failure << '\n';
        return kExitModel;
    }
    const EvalReport& e = r.report;
    std::cout << r.controller << ": E_p " << format_double(e.E_p) << ", E_t " << format_double(e.E_t) << ", E_e "
              << format_double(e.E_e) << ", E_glb " << format_double(e.E_glb) << ", mean iterations "
              << format_double(e.mean_iterations) << '\n';
    return 0;
}

int cmd_compare(const Options& o) {
    Inputs in = load_inputs(o, true);
    prepare_out(o.out);
    const fs::path out(o.out);
    std::vector<CompareRow> rows;
    if (!o.capacities.empty()) {
        Decomposition d = decompose(in.plant, in.decomp);
        for (double cap : o.capacities) {
            for (const std::string& id : o.controllers) {
                CompareRow row;
                row.capacity = cap;
                row.controller = id;
                ScenarioConfig sc = in.scenario;
                sc.capacity = cap;
                sc.controller = id;
                try {
                    RunResult r = run_closed_loop(in.plant, sc, in.empc, d);
                    row.failed = r.failed;
                    row.failure = r.failure;
                    row.report = r.report;
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io) throw;
                    row.failed = true;
                    row.failure = e.what();
                }
                std::cout << format_double(cap) << ' ' << id << ": "
                          << (row.failed ? "failed: " + row.failure : "E_glb " + format_double(row.report.E_glb))
                          << '\n';
                rows.push_back(row);
            }
        }
    }
    {
        auto f = create(out / "compare.csv");
        write_compare_csv(f, rows);
    }
    if (o.emit_plots) write_compare_plot((out / "compare.svg").string(), rows);
    return 0;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Model: return kExitModel;
        case ErrorKind::Solver: return kExitSolver;
        case ErrorKind::Io: return kExitIo;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridsyn: decomposition and distributed economic MPC for an integrated energy system"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--params", o.params, "plant parameter file (built-in defaults when omitted)");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
    };
    auto run_flags = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "scenario file (built-in defaults when omitted)");
        sub->add_option("--seed", o.seed, "override the scenario seed");
        sub->add_flag("--emit-plots", o.emit_plots, "write SVG plots next to the logs");
    };

    CLI::App* dec = app.add_subcommand("decompose", "time-scale and community decomposition");
    common(dec);
    dec->add_flag("--emit-adjacency", o.emit_adjacency, "write the adjacency edge lists");

    CLI::App* sim = app.add_subcommand("simulate", "closed-loop run of one controller");
    common(sim);
    run_flags(sim);
    sim->add_option("--controller", o.controller, "controller id")->check(CLI::IsMember({"p1", "p2", "p3", "p4"}));
    sim->add_option("--capacity", o.capacity, "regulation capacity factor in [0, 1]");

    CLI::App* cmp = app.add_subcommand("compare", "capacity sweep over the controllers");
    common(cmp);
    run_flags(cmp);
    CLI::Option* caps =
        cmp->add_option("--capacity", o.capacities, "capacities to sweep (default 0 0.1 0.2 0.3); no value for none")
            ->expected(0, CLI::detail::expected_max_vector_size);
    cmp->add_option("--controllers", o.controllers, "controllers to run")
        ->delimiter(',')
        ->check(CLI::IsMember({"p1", "p2", "p3", "p4"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        if (caps->count() == 0) {
            o.capacities = {0, 0.1, 0.2, 0.3};
        } else {
            // A bare --capacity arrives as one empty token.
            const auto& given = caps->results();
            if (std::all_of(given.begin(), given.end(), [](const std::string& v) { return v.empty(); }))
                o.capacities.clear();
        }
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*dec) return cmd_decompose(o);
        if (*sim) return cmd_simulate(o);
        return cmd_compare(o);
    } catch (const Error& e) {
        std::cerr << "gridsyn: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "gridsyn: " << e.what() << '\n';
        return kExitIo;
    }
}
