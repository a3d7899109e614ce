#pragma once

#include "gridsyn/decomp.hpp"
#include "gridsyn/nlp.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/scenario.hpp"
#include "gridsyn/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace gridsyn {

class KvFile;

struct SlowConfig {
    double dt = 60;
    int horizon = 12;
    double alpha1 = 1;        // per kW^2 of export deviation
    double alpha2 = 1000;     // per °C^2 between building temperature and its setpoint
    double alpha3 = 100;      // per CAD of stage profit
    double r_s = 1e5;         // storage reference tracking
    double du_frac = 0.25;    // rate bound per slow step, fraction of each input range
    double band_guard = 0.05; // setpoints stay this far inside the comfort band, °C
    double soc_lo = 0.1, soc_hi = 0.9;
    double sot_lo = 0.02, sot_hi = 0.98;
    double tol = 1e-5;
    int max_iter = 15;        // real-time cap; capped solutions are still applied
};

struct FastConfig {
    double dt = 5;
    std::vector<int> horizons = {10, 12, 10};
    int substeps = 5;         // RK4 steps per interval
    double alpha1 = 1;
    double alpha2 = 100;
    double r1 = 0.1;          // input reference tracking, normalised inputs
    double r1x = 0.01;        // state reference tracking, normalised states
    double r2 = 1e3;          // slack penalty
    double du_rate = 0.1;     // per-interval rate bound, fraction of range
    double du_s = 0.1;        // neighbourhood of the slow reference
    double du_c = 0.1;        // change between consecutive iterations
    double du_p = 0.1;        // change from the previous sample's prediction
    int c_max = 12;
    double psi = 0.05;
    // Board update weight of a new plan against the previous iterate; 0 means
    // 1 / number of agents. Full replacement (1) oscillates because every
    // agent corrects the whole shared export error.
    double relax = 0;
    // Floor of the denominator in the relative-change test; economic
    // objectives cross zero, where a pure ratio never settles.
    double j_floor = 1.0;
    double tol = 1e-5;
    int max_iter = 15;
};

struct SupervisoryConfig {
    int horizon_short = 10;   // trackers without the microturbine
    int horizon_long = 12;    // trackers holding the microturbine
    double q_x = 1.0;         // normalised state tracking
    double r_u = 1.0;         // normalised input tracking
    double du_rate = 0.1;
    double tol = 1e-5;
    int max_iter = 15;
};

struct EmpcConfig {
    SlowConfig slow;
    FastConfig fast;
    SupervisoryConfig sup;
    double big_m = 10;        // multiple of the input range that lifts rate bounds on toggles
};

EmpcConfig empc_config_from_kv(const KvFile& kv);
void empc_config_to_kv(const EmpcConfig& c, KvFile& kv);

// Everything a controller needs besides the measurements.
struct ControlContext {
    const PlantParams* p = nullptr;
    EmpcConfig cfg;
    const Schedule* sched = nullptr;
    const Profile* prof = nullptr;
    const PriceBook* prices = nullptr;
    double band_lo = 23, band_hi = 25;
    std::vector<int> slow_states;      // integrated on the slow scale
    std::vector<int> fast_states;      // at quasi-steady state in the slow model
};

// Disturbance forecast over a horizon: day-ahead shape plus the current bias.
DistVec biased_forecast(const Profile& prof, double t_now, const DistVec& w_now, double t);

// Input range used for normalisation and rate bounds.
InputVec input_range(const PlantParams& p);

// ---- slow layer -------------------------------------------------------------

struct SlowResult {
    std::vector<InputVec> u;       // horizon inputs
    std::vector<StateVec> x;       // states at the end of each interval (fast at QSS)
    std::vector<double> y_sp;
    double objective = 0;
    double J[4] = {0, 0, 0, 0};
    NlpStatus status = NlpStatus::IterLimit;
    int nlp_iterations = 0;
    bool held = false;             // previous plan reused
};

class SlowEmpc {
public:
    explicit SlowEmpc(const ControlContext& ctx);

    // x: measured state; u_prev: inputs applied over the previous interval.
    SlowResult solve(double t, const StateVec& x, const InputVec& u_prev, const DistVec& w_now, double xi);

    // Objective of a given input and setpoint plan, for tests.
    double evaluate_plan(double t, const StateVec& x, const InputVec& u_prev, const DistVec& w_now, double xi,
                         const std::vector<InputVec>& u, const std::vector<double>& y_sp, SlowResult* parts);

    const SlowResult& last() const { return last_; }

private:
    const ControlContext& ctx_;
    SlowResult last_;
    bool have_last_ = false;
};

// ---- fast layer --------------------------------------------------------------

struct ExchangeBoard {
    std::vector<Eigen::MatrixXd> u;   // per agent, horizon x own inputs (physical units)
    std::vector<Eigen::MatrixXd> x;   // per agent, horizon x own states, x(k+1..k+N)
    std::vector<Eigen::MatrixXd> u_pred;   // per agent, own inputs predicted at the previous sample
    int iteration = 0;
    InputVec u_ref = InputVec::Zero();   // slow-layer reference inputs u_f^s
    StateVec x_ref = StateVec::Zero();   // slow-layer reference state x_f^s(k+1)
    StateVec x_frozen = StateVec::Zero();   // slow states held between slow samples
    InputVec u_frozen = InputVec::Zero();   // slow inputs held between slow samples
};

struct AgentSolution {
    Eigen::MatrixXd u;                // horizon x own inputs
    Eigen::MatrixXd x;                // horizon x own states
    Eigen::VectorXd slack;            // flattened over the horizon
    double objective = 0;
    NlpStatus status = NlpStatus::IterLimit;
    int nlp_iterations = 0;
    bool held = false;
};

// Measurements and signals shared by all agents within one fast sample.
struct FastSample {
    double t = 0;
    StateVec x;                       // measured state
    DistVec w;                        // measured disturbance
    double xi = 0;
    InputVec u_last;                  // inputs applied over the previous sample
    IntVec z_last;                    // integer inputs of the previous sample
};

class FastAgent {
public:
    FastAgent(const ControlContext& ctx, int index, const FastSubsystem& sub, int horizon);

    // Solves the agent's problem with neighbours fixed at `board`. The agent's
    // own board entry is its iteration c-1 plan.
    AgentSolution solve(const ExchangeBoard& board, const FastSample& s) const;

    // Objective of a given own input sequence, with zero slack where feasible.
    double cost(const ExchangeBoard& board, const FastSample& s, const Eigen::MatrixXd& u,
                Eigen::MatrixXd* x_out = nullptr) const;

    int index() const { return index_; }
    int horizon() const { return horizon_; }
    const FastSubsystem& subsystem() const { return sub_; }

private:
    const ControlContext& ctx_;
    int index_;
    FastSubsystem sub_;
    int horizon_;
};

struct CoordinationResult {
    InputVec u;                       // first inputs of the final sequences (own components only)
    int iterations = 0;
    std::vector<double> J;            // final objectives per agent
    std::vector<std::vector<double>> J_history;   // per iteration, per agent
    std::vector<AgentSolution> solutions;
    int holds = 0;
    int nlp_iterations = 0;           // summed over agents and iterations
};

// Runs the iterative exchange. `board` enters with the iteration-0 seeds and
// leaves with the final sequences.
CoordinationResult coordinate_fast(const std::vector<FastAgent>& agents, ExchangeBoard& board, const FastSample& s,
                                   const FastConfig& cfg);

// Board sequences of an agent, cut or extended by holding the last row to length n.
Eigen::MatrixXd fit_length(const Eigen::MatrixXd& m, int n);
// Drops the first row and repeats the last.
Eigen::MatrixXd shift_hold(const Eigen::MatrixXd& m);

// ---- controllers used by the closed loop ----------------------------------

struct StepInfo {
    int iterations = 0;
    int holds = 0;
    int nlp_iterations = 0;
    bool slow_ran = false;
    bool slow_held = false;
    double fast_objective = 0;
    std::vector<double> agent_objectives;
    std::vector<NlpStatus> agent_status;
    std::vector<double> agent_slack;      // max |slack| per agent
    std::vector<double> joint_history;    // sum of agent objectives per iteration
    SlowResult slow;                      // filled when slow_ran
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual void reset(const StateVec& x0, const InputVec& u0) = 0;
    // Called every fast sample; runs the slow layer itself on slow samples.
    virtual InputVec step(const FastSample& s, bool slow_sample, StepInfo& info) = 0;
    virtual std::string name() const = 0;
};

// The two-layer distributed economic controller.
std::unique_ptr<Controller> make_dempc(const ControlContext& ctx, const SubsystemSpec& spec);

// High-level economic reference plus decentralised trackers over `spec`.
std::unique_ptr<Controller> make_supervisory(const ControlContext& ctx, const SubsystemSpec& spec,
                                             const std::string& name);

// One decentralised tracker, exposed for tests.
class Tracker {
public:
    Tracker(const ControlContext& ctx, std::vector<int> states, std::vector<int> inputs, int horizon);
    // Holds other states at x and other inputs at u_last.
    AgentSolution solve(const FastSample& s, const InputVec& u_ref, const StateVec& x_ref) const;
    const std::vector<int>& states() const { return states_; }
    const std::vector<int>& inputs() const { return inputs_; }

private:
    const ControlContext& ctx_;
    std::vector<int> states_, inputs_;
    int horizon_;
};

}  // namespace gridsyn
