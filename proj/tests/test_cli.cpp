#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsyn/decomp.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/netgraph.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/scenario.hpp"

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace gridsyn;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* p = std::getenv("GRIDSYN_CLI");
    REQUIRE_MESSAGE(p != nullptr, "GRIDSYN_CLI must point at the gridsyn binary");
    return p;
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("gridsyn_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing " << p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path write_scenario(const fs::path& dir, const std::string& body) {
    const fs::path f = dir / "run.scenario";
    std::ofstream(f) << kScenarioHeader << '\n' << body;
    return f;
}

const std::string shipped_params = std::string(GRIDSYN_CONFIG_DIR) + "/ies.params";

// compare.csv as controller -> capacity -> column map.
std::map<std::string, std::map<double, std::map<std::string, std::string>>> read_compare(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> head;
    {
        std::istringstream h(line);
        for (std::string c; std::getline(h, c, ',');) head.push_back(c);
    }
    std::map<std::string, std::map<double, std::map<std::string, std::string>>> out;
    while (std::getline(in, line)) {
        std::istringstream r(line);
        std::map<std::string, std::string> row;
        size_t k = 0;
        for (std::string c; std::getline(r, c, ',') && k < head.size(); ++k) row[head[k]] = c;
        out[row["controller"]][std::stod(row["capacity"])] = row;
    }
    return out;
}

}  // namespace

TEST_CASE("decompose the shipped plant") {
    const fs::path out = scratch("decompose");
    REQUIRE(run("decompose --params " + shipped_params + " --emit-adjacency --out " + out.string()) == 0);
    const nlohmann::json j = read_json(out / "decomposition.json");
    REQUIRE(j["vertical"].is_object());
    CHECK(j["vertical"]["epsilon"].get<double>() == doctest::Approx(0.00206).epsilon(0.5e-3 / 2.06));
    CHECK(j["horizontal"]["communities"].size() == 3);
    CHECK(j["subsystems"].size() == 3);
    CHECK(fs::exists(out / "partition.txt"));

    SUBCASE("emitted adjacency reads back") {
        std::ifstream e(out / "adjacency.edges");
        const AdjacencyMatrix a = read_edge_list(e, ies_nodes());
        const Decomposition d = decompose(load_params(shipped_params), DecompConfig{});
        CHECK(a.a == d.a_e.a);
    }
}

TEST_CASE("single-scale plant decomposes horizontally only") {
    const fs::path out = scratch("flat");
    KvFile kv = KvFile::load(shipped_params, kParamsHeader);
    kv.set("tau_table", std::vector<double>(kNx, 10.0));
    kv.save((out / "flat.params").string());
    REQUIRE(run("decompose --params " + (out / "flat.params").string() + " --out " + out.string()) == 0);
    const nlohmann::json j = read_json(out / "decomposition.json");
    CHECK(j["vertical"].is_null());
    CHECK(j["vertical_note"].get<std::string>().find("NoScaleGap") != std::string::npos);
    CHECK(j["horizontal"]["communities"].size() >= 1);
}

TEST_CASE("simulate with an unconstrained comfort band") {
    const fs::path out = scratch("wide");
    const fs::path sc = write_scenario(out, "controller = p1\ncapacity = 0\ntime.duration_s = 600\n"
                                            "schedule.band_lo = 10\nschedule.band_hi = 40\n");
    REQUIRE(run("simulate --scenario " + sc.string() + " --out " + (out / "a").string() + " --emit-plots") == 0);
    const nlohmann::json r = read_json(out / "a" / "report.json");
    CHECK(r["E_t"].get<double>() == 0.0);
    CHECK(r["samples"].get<int>() == 120);
    CHECK_FALSE(r["failed"].get<bool>());
    for (const char* f : {"log.csv", "control.csv", "manifest.json", "plot_power.svg", "plot_temperature.svg",
                          "plot_units.svg", "plot_storage.svg"})
        CHECK(fs::exists(out / "a" / f));

    const nlohmann::json m = read_json(out / "a" / "manifest.json");
    CHECK(m["seed"].get<std::uint64_t>() == 1);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m["controller"] == "p1");

    SUBCASE("same seed, same log") {
        REQUIRE(run("simulate --scenario " + sc.string() + " --out " + (out / "b").string()) == 0);
        CHECK(slurp(out / "a" / "log.csv") == slurp(out / "b" / "log.csv"));
        CHECK(slurp(out / "a" / "report.json") == slurp(out / "b" / "report.json"));
        CHECK(read_json(out / "b" / "manifest.json")["config_hash"] == m["config_hash"]);
    }
}

TEST_CASE("compare") {
    SUBCASE("no capacities gives an empty table") {
        const fs::path out = scratch("empty");
        REQUIRE(run("compare --capacity --out " + out.string()) == 0);
        const std::string t = slurp(out / "compare.csv");
        CHECK(std::count(t.begin(), t.end(), '\n') == 1);
    }
    SUBCASE("capacity sweep") {
        const fs::path out = scratch("sweep");
        const fs::path sc = write_scenario(out, "time.duration_s = 600\n");
        REQUIRE(run("compare --scenario " + sc.string() + " --capacity 0 0.25 --controllers p1 p4 --emit-plots --out " +
                    out.string()) == 0);
        auto t = read_compare(out / "compare.csv");
        REQUIRE(t.size() == 2);
        REQUIRE(t["p1"].size() == 2);
        REQUIRE(t["p4"].size() == 2);
        for (auto& [id, rows] : t)
            for (auto& [cap, row] : rows) CHECK(row["status"] == "ok");
        // Without regulation the distributed controller tracks at least as well.
        CHECK(std::stod(t["p1"][0]["E_p"]) <= std::stod(t["p4"][0]["E_p"]));
        // Capacity payments grow the economic index.
        for (const char* id : {"p1", "p4"}) {
            INFO(id);
            CHECK(std::stod(t[id][0.25]["E_e"]) >= std::stod(t[id][0]["E_e"]));
        }
        CHECK(fs::exists(out / "compare.svg"));
    }
}

TEST_CASE("exit codes") {
    const fs::path out = scratch("codes");
    CHECK(run("--version") == 0);
    CHECK(run("simulate --help") == 0);
    CHECK(run("") == 2);
    CHECK(run("simulate --controller p7") == 2);
    CHECK(run("decompose --params " + (out / "missing.params").string() + " --out " + out.string()) == 5);
    const fs::path bad = write_scenario(out, "no.such.key = 3\n");
    CHECK(run("simulate --scenario " + bad.string() + " --out " + out.string()) == 2);
    const fs::path wrong_header = out / "x.scenario";
    std::ofstream(wrong_header) << "something else\n";
    CHECK(run("simulate --scenario " + wrong_header.string() + " --out " + out.string()) == 2);
    KvFile kv = KvFile::load(shipped_params, kParamsHeader);
    kv.set("decomp.expected_fast", 5.0);
    kv.save((out / "five.params").string());
    // A partition with the wrong number of fast subsystems cannot drive P1.
    const fs::path sc = write_scenario(out, "time.duration_s = 60\n");
    CHECK(run("simulate --params " + (out / "five.params").string() + " --scenario " + sc.string() + " --out " +
              out.string()) == 3);
}
