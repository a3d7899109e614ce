#pragma once

#include "gridsyn/netgraph.hpp"
#include "gridsyn/params.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridsyn {

class KvFile;

// ---- time scales -----------------------------------------------------------

struct TimeConstants {
    Eigen::VectorXd tau;              // seconds
    std::vector<int> from_table;      // states that fell back to the table
    std::vector<std::string> warnings;
};

// tau_i = 1/|A_ii| clamped to [1e-3, 1e6]; zero diagonals fall back to `table`.
TimeConstants estimate_time_constants(const Eigen::MatrixXd& A, const Eigen::VectorXd& table);
TimeConstants table_time_constants(const Eigen::VectorXd& table);

struct TimeScaleSplit {
    std::vector<int> slow_states, fast_states;
    std::vector<int> slow_inputs, fast_inputs;     // indices into u
    std::vector<int> slow_outputs, fast_outputs;   // indices into y
    int rep_fast = -1, rep_slow = -1;              // representative states
    double tau_f_rep = 0, tau_s_rep = 0;
    double epsilon = 0;
    double gap_ratio = 0;                          // tau ratio across the split
};

// Splits at the largest gap of sorted log tau. Representatives default to the
// largest fast and smallest slow constant; pass state indices to pin them.
// Throws NoScaleGap when the largest adjacent ratio is below gap_min.
TimeScaleSplit vertical_split(const Eigen::VectorXd& tau, const AdjacencyMatrix& a_e,
                              double gap_min = 50.0, int rep_fast = -1, int rep_slow = -1);

// Zeroes the rows of slow states, slow inputs and slow outputs.
AdjacencyMatrix fast_adjacency(const AdjacencyMatrix& a_e, const TimeScaleSplit& split);

// ---- modularity and community detection -----------------------------------

// Directed modularity (1/m) sum_ij (a_ij - kin_i kout_j / m) delta(c_i, c_j).
// Nodes with tag < 0 are treated as untagged and never share a community.
// Throws EmptyGraph when the total weight is zero.
template <typename Derived>
double modularity(const Eigen::MatrixBase<Derived>& a, const std::vector<int>& tags);

double modularity(const AdjacencyMatrix& a, const std::vector<int>& tags);

struct Partition {
    std::vector<int> tags;            // per node, -1 for isolated nodes
    std::vector<int> isolated;        // nodes without any edge
    int communities = 0;
    double modularity = 0;
    int restarts = 0;
    std::uint64_t seed = 0;
};

struct DetectionSettings {
    int n_c_upper = 3;       // most communities allowed
    int n_l_lower = 100;     // fewest outer restarts
    int n_m_lower = 3;       // times the best value must recur
    int max_restarts = 1000; // hard stop for the outer loop
    std::uint64_t seed = 1;
};

struct DetectionTrace {
    // Modularity after each local-moving level, per restart.
    std::vector<std::vector<double>> levels;
    std::vector<double> restart_best;
};

Partition detect_communities(const AdjacencyMatrix& a, const DetectionSettings& s,
                             DetectionTrace* trace = nullptr);

// ---- subsystem assembly ----------------------------------------------------

struct FastSubsystem {
    std::vector<int> states, inputs, outputs;
    std::vector<int> nbr_states, nbr_inputs;
    // Neighbour blocks in order; -1 is the slow block, l >= 0 is fast subsystem l.
    std::vector<int> nbr_state_blocks, nbr_input_blocks;
    bool shares_pv = false;
};

struct SubsystemSpec {
    std::vector<FastSubsystem> fast;
    std::vector<int> slow_states, slow_inputs, slow_outputs;
};

struct SharingOverrides {
    std::vector<int> shared_outputs;   // outputs housed in every fast subsystem
    bool share_pv = false;             // the PV source follows the shared outputs
    int expected_fast = 3;
};

// Fast subsystems are numbered by their smallest fast state index.
// Throws CardinalityMismatch when the partition does not hold expected_fast
// communities with fast states.
SubsystemSpec build_subsystems(const Partition& p, const TimeScaleSplit& split,
                               const AdjacencyMatrix& a_e, const SharingOverrides& o);

// ---- pipeline --------------------------------------------------------------

struct DecompConfig {
    std::string tau_mode = "table";    // "table" or "estimate"
    std::string rep_fast = "x5";       // empty: default representative
    std::string rep_slow = "x23";
    double gap_min = 50;
    double h_rel = 1e-6;
    double tol_abs = 1e-8;
    bool include_disturbances = true;
    SharingOverrides sharing{{0}, true, 3};
    DetectionSettings detection;
};

DecompConfig decomp_config_from_kv(const KvFile& kv);

struct Decomposition {
    OperatingPoint point;
    JacobianSet jac;
    AdjacencyMatrix a_e;
    TimeConstants tau;
    std::optional<TimeScaleSplit> split;     // empty when there is no scale gap
    std::string split_note;
    AdjacencyMatrix a_f;
    Partition partition;
    std::optional<SubsystemSpec> subsystems;
    std::string subsystem_note;
};

Decomposition decompose(const PlantParams& p, const DecompConfig& cfg);

void write_partition(std::ostream& out, const AdjacencyMatrix& a, const Partition& p);
std::vector<int> read_partition(std::istream& in, const AdjacencyMatrix& a);
void write_decomposition_report(std::ostream& out, const Decomposition& d, const DecompConfig& cfg);

// Fixed groupings by operating unit and by energy carrier, used by the
// supervisory baselines. Neighbour sets come from a_e.
SubsystemSpec unit_partition(const AdjacencyMatrix& a_e);
SubsystemSpec carrier_partition(const AdjacencyMatrix& a_e);

}  // namespace gridsyn

#include "gridsyn/decomp_impl.hpp"
