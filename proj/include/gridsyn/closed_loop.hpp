#pragma once

#include "gridsyn/decomp.hpp"
#include "gridsyn/empc.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/plant.hpp"
#include "gridsyn/scenario.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gridsyn {

// Controller-side record of one fast sample.
struct ControlRecord {
    double t = 0;
    InputVec u;
    int iterations = 0;
    int holds = 0;
    int nlp_iterations = 0;
    std::vector<double> agent_objectives;
    std::vector<NlpStatus> agent_status;
    std::vector<double> agent_slack;
    std::vector<double> joint_history;
    bool slow_ran = false, slow_held = false;
    SlowResult slow;
};

struct RunResult {
    std::string controller;
    ScenarioConfig scenario;
    Profile profile;
    RegulationSignal regulation;
    Schedule schedule;
    ScenarioLog log;
    std::vector<ControlRecord> control;
    std::vector<UnitPowers> powers;     // per sample, at its end
    EvalReport report;
    bool failed = false;                // the plant left its envelope; log is partial
    std::string failure;
    double wall_seconds = 0;
};

// Profiles, prices, regulation and schedule of a scenario. Constant conditions
// hold every hourly and per-minute value at the start value.
struct ScenarioData {
    Profile profile;
    RegulationSignal regulation;
    Schedule schedule;
};
ScenarioData prepare_scenario(const PlantParams& p, const ScenarioConfig& sc);

// The controller named in sc.controller over the decomposition's sets.
std::unique_ptr<Controller> make_controller(const std::string& id, const ControlContext& ctx,
                                            const Decomposition& d);

// Closed-loop run. Plant failures end the run early with `failed` set;
// configuration and solver setup errors propagate.
RunResult run_closed_loop(const PlantParams& p, const ScenarioConfig& sc, const EmpcConfig& ec,
                          const Decomposition& d, const std::function<void(const LogRow&)>& on_row = {});

}  // namespace gridsyn
