#include "gridsyn/decomp.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/plant.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace gridsyn {

namespace {

constexpr double kTauMin = 1e-3;
constexpr double kTauMax = 1e6;
constexpr double kTie = 1e-12;

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

// ---- time scales -----------------------------------------------------------

TimeConstants estimate_time_constants(const Eigen::MatrixXd& A, const Eigen::VectorXd& table) {
    if (A.rows() != A.cols()) throw ConfigError("time constants need a square state Jacobian");
    TimeConstants out;
    const Eigen::Index n = A.rows();
    out.tau.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = A(i, i);
        if (!std::isfinite(d)) throw NonFiniteDerivative("non-finite Jacobian diagonal at state " + std::to_string(i + 1));
        if (d == 0.0) {
            if (i >= table.size() || !(table(i) > 0))
                throw ConfigError("state " + std::to_string(i + 1) + " has a zero diagonal and no table entry");
            out.tau(i) = table(i);
            out.from_table.push_back(static_cast<int>(i));
            out.warnings.push_back("x" + std::to_string(i + 1) + ": zero diagonal, using table value " +
                                   format_double(table(i)) + " s");
            continue;
        }
        out.tau(i) = std::clamp(1.0 / std::abs(d), kTauMin, kTauMax);
    }
    return out;
}

TimeConstants table_time_constants(const Eigen::VectorXd& table) {
    for (Eigen::Index i = 0; i < table.size(); ++i)
        if (!(table(i) > 0)) throw ConfigError("time constant table entry " + std::to_string(i + 1) + " is not positive");
    TimeConstants out;
    out.tau = table;
    return out;
}

TimeScaleSplit vertical_split(const Eigen::VectorXd& tau, const AdjacencyMatrix& a_e, double gap_min,
                              int rep_fast, int rep_slow) {
    const int nx = static_cast<int>(tau.size());
    if (nx < 2) throw NoScaleGap("a single state has no time-scale gap");
    if (!(gap_min > 1)) throw ConfigError("gap_min must exceed 1");
    for (int i = 0; i < nx; ++i)
        if (!(tau(i) > 0)) throw ConfigError("time constants must be positive");

    std::vector<int> order(nx);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return tau(a) < tau(b); });
    int cut = -1;
    double best = -1;
    for (int k = 0; k + 1 < nx; ++k) {
        const double gap = std::log(tau(order[k + 1])) - std::log(tau(order[k]));
        if (gap > best) {
            best = gap;
            cut = k;
        }
    }
    const double ratio = std::exp(best);
    if (ratio < gap_min)
        throw NoScaleGap("largest time-constant ratio " + format_double(ratio) + " is below " + format_double(gap_min));

    TimeScaleSplit s;
    s.gap_ratio = tau(order[cut + 1]) / tau(order[cut]);
    for (int k = 0; k < nx; ++k) (k <= cut ? s.fast_states : s.slow_states).push_back(order[k]);
    std::sort(s.fast_states.begin(), s.fast_states.end());
    std::sort(s.slow_states.begin(), s.slow_states.end());

    if (rep_fast < 0) rep_fast = order[cut];
    if (rep_slow < 0) rep_slow = order[cut + 1];
    if (!contains(s.fast_states, rep_fast))
        throw ConfigError("fast representative x" + std::to_string(rep_fast + 1) + " is not a fast state");
    if (!contains(s.slow_states, rep_slow))
        throw ConfigError("slow representative x" + std::to_string(rep_slow + 1) + " is not a slow state");
    s.rep_fast = rep_fast;
    s.rep_slow = rep_slow;
    s.tau_f_rep = tau(rep_fast);
    s.tau_s_rep = tau(rep_slow);
    s.epsilon = s.tau_f_rep / s.tau_s_rep;
    if (!(s.epsilon < 0.1))
        throw ConfigError("representatives give epsilon " + format_double(s.epsilon) + ", not small");

    // Inputs and outputs follow the state rows they touch in A_e.
    std::vector<int> state_row(nx), input_col, output_row;
    for (int i = 0; i < a_e.size(); ++i) {
        const NodeId& id = a_e.nodes[i];
        if (id.kind == NodeKind::State && id.index < nx) state_row[id.index] = i;
        if (id.kind == NodeKind::Input) input_col.push_back(i);
        if (id.kind == NodeKind::Output) output_row.push_back(i);
    }
    if (a_e.nodes.empty()) throw ConfigError("adjacency without node labels");
    for (int col : input_col) {
        bool slow = false;
        for (int st : s.slow_states) slow = slow || a_e.a(state_row[st], col) != 0;
        (slow ? s.slow_inputs : s.fast_inputs).push_back(a_e.nodes[col].index);
    }
    for (int row : output_row) {
        bool any = false, all_slow = true;
        for (int st = 0; st < nx; ++st) {
            if (a_e.a(row, state_row[st]) == 0) continue;
            any = true;
            all_slow = all_slow && contains(s.slow_states, st);
        }
        (any && all_slow ? s.slow_outputs : s.fast_outputs).push_back(a_e.nodes[row].index);
    }
    return s;
}

AdjacencyMatrix fast_adjacency(const AdjacencyMatrix& a_e, const TimeScaleSplit& split) {
    AdjacencyMatrix out = a_e;
    for (int i = 0; i < out.size(); ++i) {
        const NodeId& id = out.nodes[i];
        const bool slow = (id.kind == NodeKind::State && contains(split.slow_states, id.index)) ||
                          (id.kind == NodeKind::Input && contains(split.slow_inputs, id.index)) ||
                          (id.kind == NodeKind::Output && contains(split.slow_outputs, id.index));
        if (slow) out.a.row(i).setZero();
    }
    return out;
}

double modularity(const AdjacencyMatrix& a, const std::vector<int>& tags) {
    if (static_cast<int>(tags.size()) != a.size()) throw ConfigError("tag count does not match the graph");
    return modularity(a.a, tags);
}

// ---- community detection ---------------------------------------------------

namespace {

// One level of the unfolding: a weighted graph whose nodes are communities of
// the level below. w(i, j) is the weight of edges from j into i.
struct Level {
    Eigen::MatrixXd w;
    Eigen::VectorXd kin, kout;
    double m = 0;

    explicit Level(Eigen::MatrixXd weights) : w(std::move(weights)) {
        kin = w.rowwise().sum();
        kout = w.colwise().sum().transpose();
        m = w.sum();
    }
    int size() const { return static_cast<int>(w.rows()); }
};

struct Communities {
    std::vector<int> of;                 // community of each level node
    std::vector<double> kin, kout;       // aggregated degrees per community id
};

double level_modularity(const Level& g, const std::vector<int>& c) { return modularity(g.w, c); }

// Gain of inserting node i into community cid, whose aggregated degrees and
// link weights to i exclude i itself.
double insertion_gain(const Level& g, int i, double link, double kin_c, double kout_c) {
    return (link + g.w(i, i) - (kin_c * g.kout(i) + g.kin(i) * kout_c + g.kin(i) * g.kout(i)) / g.m) / g.m;
}

// Sweeps the nodes once in `order`; returns true if any node moved.
bool local_pass(const Level& g, const std::vector<int>& order, Communities& c) {
    const int n = g.size();
    bool moved = false;
    std::vector<double> link(n, 0.0);
    std::vector<int> touched;
    for (int i : order) {
        const int home = c.of[i];
        c.kin[home] -= g.kin(i);
        c.kout[home] -= g.kout(i);
        touched.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double lw = g.w(i, j) + g.w(j, i);
            if (lw == 0.0) continue;
            const int cj = c.of[j];
            if (link[cj] == 0.0) touched.push_back(cj);
            link[cj] += lw;
        }
        if (!contains(touched, home)) touched.push_back(home);
        std::sort(touched.begin(), touched.end());
        const double stay = insertion_gain(g, i, link[home], c.kin[home], c.kout[home]);
        // Move only on a strictly positive gain; among equal gains the lowest id wins.
        int target = home;
        double best = stay;
        for (int cid : touched) {
            if (cid == home) continue;
            const double gain = insertion_gain(g, i, link[cid], c.kin[cid], c.kout[cid]);
            if (gain > best + kTie) {
                best = gain;
                target = cid;
            }
        }
        for (int cid : touched) link[cid] = 0.0;
        c.of[i] = target;
        c.kin[target] += g.kin(i);
        c.kout[target] += g.kout(i);
        moved = moved || target != home;
    }
    return moved;
}

// Renumbers community ids densely in order of first appearance.
int compact(std::vector<int>& of) {
    std::vector<int> map(of.size() + 1, -1);
    int next = 0;
    for (int& c : of) {
        if (map[c] < 0) map[c] = next++;
        c = map[c];
    }
    return next;
}

Level aggregate(const Level& g, const std::vector<int>& of, int count) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(count, count);
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (g.w(i, j) != 0.0) w(of[i], of[j]) += g.w(i, j);
    return Level(std::move(w));
}

struct RestartResult {
    std::vector<int> tags;   // per active node
    double modularity = 0;
};

RestartResult unfold(const Level& base, const std::vector<int>& order0, int n_c_upper, std::mt19937_64& rng,
                     std::vector<double>* levels) {
    Level g = base;
    // Level node -> community at the base level, composed through aggregation.
    std::vector<int> member(base.size());
    std::iota(member.begin(), member.end(), 0);
    std::vector<int> order = order0;

    double m_prev = level_modularity(g, member);
    if (levels) levels->push_back(m_prev);
    for (;;) {
        Communities c;
        c.of.resize(g.size());
        std::iota(c.of.begin(), c.of.end(), 0);
        c.kin.assign(g.kin.data(), g.kin.data() + g.size());
        c.kout.assign(g.kout.data(), g.kout.data() + g.size());
        bool any = false;
        while (local_pass(g, order, c)) any = true;
        if (!any) break;
        const int count = compact(c.of);
        for (int& t : member) t = c.of[t];
        g = aggregate(g, c.of, count);
        const double m_now = level_modularity(base, member);
        if (levels) levels->push_back(m_now);
        if (m_now < m_prev - 1e-12) throw std::logic_error("modularity decreased during local moving");
        if (!(m_now > m_prev)) break;
        m_prev = m_now;
        order.resize(count);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
    }

    // Reduction: merge the pair of communities that leaves modularity highest.
    while (g.size() > n_c_upper) {
        int bi = -1, bj = -1;
        double best = -std::numeric_limits<double>::infinity();
        bool adjacent_only = false;
        for (int i = 0; i < g.size() && !adjacent_only; ++i)
            for (int j = 0; j < g.size(); ++j)
                if (i != j && g.w(i, j) + g.w(j, i) > 0) adjacent_only = true;
        for (int i = 0; i < g.size(); ++i) {
            for (int j = i + 1; j < g.size(); ++j) {
                const double lw = g.w(i, j) + g.w(j, i);
                if (adjacent_only && lw == 0.0) continue;
                const double gain = (lw - (g.kin(i) * g.kout(j) + g.kin(j) * g.kout(i)) / g.m) / g.m;
                if (gain > best + kTie) {
                    best = gain;
                    bi = i;
                    bj = j;
                }
            }
        }
        std::vector<int> of(g.size());
        std::iota(of.begin(), of.end(), 0);
        of[bj] = bi;
        const int count = compact(of);
        for (int& t : member) t = of[t];
        g = aggregate(g, of, count);
    }
    RestartResult r;
    r.tags = member;
    compact(r.tags);
    r.modularity = level_modularity(base, r.tags);
    return r;
}

}  // namespace

Partition detect_communities(const AdjacencyMatrix& a, const DetectionSettings& s, DetectionTrace* trace) {
    if (s.n_c_upper < 1) throw ConfigError("the community limit must be at least 1");
    const int n = a.size();
    if (n == 0 || a.a.sum() == 0) throw EmptyGraph("community detection on a graph without edges");

    Partition out;
    out.seed = s.seed;
    std::vector<int> active;
    for (int i = 0; i < n; ++i) {
        if (a.a.row(i).any() || a.a.col(i).any())
            active.push_back(i);
        else
            out.isolated.push_back(i);
    }
    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd w(na, na);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j) w(i, j) = a.a(active[i], active[j]);
    const Level base(w);

    std::mt19937_64 rng(s.seed);
    std::vector<int> best_tags;
    double m_max = -std::numeric_limits<double>::infinity();
    int n_l = 0, n_m = 0;
    while ((n_l < s.n_l_lower || n_m < s.n_m_lower) && n_l < s.max_restarts) {
        std::vector<int> order(na);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double>* levels = nullptr;
        if (trace) levels = &trace->levels.emplace_back();
        const RestartResult r = unfold(base, order, s.n_c_upper, rng, levels);
        if (trace) trace->restart_best.push_back(r.modularity);
        if (r.modularity > m_max + kTie) {
            m_max = r.modularity;
            best_tags = r.tags;
            n_m = 0;
        } else if (n_l >= s.n_l_lower && std::abs(r.modularity - m_max) <= kTie) {
            ++n_m;
        }
        ++n_l;
    }

    // Canonical ids: communities numbered by their first node in graph order.
    out.tags.assign(n, -1);
    for (int i = 0; i < na; ++i) out.tags[active[i]] = best_tags[i];
    std::vector<int> map(na + 1, -1);
    int next = 0;
    for (int& t : out.tags) {
        if (t < 0) continue;
        if (map[t] < 0) map[t] = next++;
        t = map[t];
    }
    out.communities = next;
    out.restarts = n_l;
    out.modularity = modularity(a, out.tags);
    return out;
}

// ---- subsystems ------------------------------------------------------------

namespace {

std::vector<int> node_rows(const AdjacencyMatrix& a, NodeKind kind, const std::vector<int>& idx) {
    std::vector<int> rows;
    for (int k : idx)
        for (int i = 0; i < a.size(); ++i)
            if (a.nodes[i].kind == kind && a.nodes[i].index == k) rows.push_back(i);
    return rows;
}

bool touches(const AdjacencyMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    for (int r : rows)
        for (int c : cols)
            if (a.a(r, c) != 0) return true;
    return false;
}

void append(std::vector<int>& dst, const std::vector<int>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

// Neighbour sets from A_e: a whole block joins when any member feeds an own row.
void link_neighbours(SubsystemSpec& spec, const AdjacencyMatrix& a_e) {
    const int nf = static_cast<int>(spec.fast.size());
    for (int j = 0; j < nf; ++j) {
        FastSubsystem& f = spec.fast[j];
        std::vector<int> rows = node_rows(a_e, NodeKind::State, f.states);
        append(rows, node_rows(a_e, NodeKind::Output, f.outputs));
        f.nbr_states.clear();
        f.nbr_inputs.clear();
        f.nbr_state_blocks.clear();
        f.nbr_input_blocks.clear();
        auto consider = [&](int block, const std::vector<int>& xs, const std::vector<int>& us) {
            if (!xs.empty() && touches(a_e, rows, node_rows(a_e, NodeKind::State, xs))) {
                append(f.nbr_states, xs);
                f.nbr_state_blocks.push_back(block);
            }
            if (!us.empty() && touches(a_e, rows, node_rows(a_e, NodeKind::Input, us))) {
                append(f.nbr_inputs, us);
                f.nbr_input_blocks.push_back(block);
            }
        };
        consider(-1, spec.slow_states, spec.slow_inputs);
        for (int l = 0; l < nf; ++l)
            if (l != j) consider(l, spec.fast[l].states, spec.fast[l].inputs);
    }
}

}  // namespace

SubsystemSpec build_subsystems(const Partition& p, const TimeScaleSplit& split, const AdjacencyMatrix& a_e,
                               const SharingOverrides& o) {
    if (static_cast<int>(p.tags.size()) != a_e.size()) throw ConfigError("partition does not match the graph");
    // Communities holding fast states, ordered by their smallest fast state.
    std::vector<int> comm_order;
    for (int st : split.fast_states) {
        const int row = node_rows(a_e, NodeKind::State, {st}).front();
        const int c = p.tags[row];
        if (c >= 0 && !contains(comm_order, c)) comm_order.push_back(c);
    }
    if (static_cast<int>(comm_order.size()) != o.expected_fast)
        throw CardinalityMismatch("partition has " + std::to_string(comm_order.size()) +
                                  " fast communities, expected " + std::to_string(o.expected_fast));

    SubsystemSpec spec;
    spec.slow_states = split.slow_states;
    spec.slow_inputs = split.slow_inputs;
    spec.slow_outputs = split.slow_outputs;
    spec.fast.resize(comm_order.size());
    auto slot = [&](int node) -> int {
        const int c = p.tags[node];
        for (size_t k = 0; k < comm_order.size(); ++k)
            if (comm_order[k] == c) return static_cast<int>(k);
        return -1;
    };
    for (int st : split.fast_states) {
        const int k = slot(node_rows(a_e, NodeKind::State, {st}).front());
        if (k < 0) throw CardinalityMismatch("fast state x" + std::to_string(st + 1) + " is untagged");
        spec.fast[k].states.push_back(st);
    }
    for (int u : split.fast_inputs) {
        const int node = node_rows(a_e, NodeKind::Input, {u}).front();
        int k = slot(node);
        if (k < 0) {
            // Untagged or stranded input: follow the first fast state it feeds.
            for (int st : split.fast_states)
                if (a_e.a(node_rows(a_e, NodeKind::State, {st}).front(), node) != 0) {
                    for (size_t s = 0; s < spec.fast.size() && k < 0; ++s)
                        if (contains(spec.fast[s].states, st)) k = static_cast<int>(s);
                    break;
                }
        }
        if (k < 0) throw CardinalityMismatch("fast input u" + std::to_string(u + 1) + " feeds no fast subsystem");
        spec.fast[k].inputs.push_back(u);
    }
    for (int y : split.fast_outputs) {
        if (contains(o.shared_outputs, y)) continue;
        const int k = slot(node_rows(a_e, NodeKind::Output, {y}).front());
        if (k >= 0) spec.fast[k].outputs.push_back(y);
    }
    for (FastSubsystem& f : spec.fast) {
        for (int y : o.shared_outputs)
            if (contains(split.fast_outputs, y)) f.outputs.push_back(y);
        std::sort(f.outputs.begin(), f.outputs.end());
        f.shares_pv = o.share_pv && !o.shared_outputs.empty();
    }
    link_neighbours(spec, a_e);
    return spec;
}

namespace {

SubsystemSpec fixed_spec(const std::vector<std::vector<int>>& states, const std::vector<std::vector<int>>& inputs,
                         const AdjacencyMatrix& a_e) {
    SubsystemSpec spec;
    for (size_t k = 0; k < states.size(); ++k) {
        FastSubsystem f;
        f.states = states[k];
        f.inputs = inputs[k];
        f.outputs = {sy::P_sl};
        f.shares_pv = true;
        spec.fast.push_back(f);
    }
    link_neighbours(spec, a_e);
    return spec;
}

}  // namespace

SubsystemSpec unit_partition(const AdjacencyMatrix& a_e) {
    // FC, MT with AB, EC, CS, BA. The pump node x22 and the building x23 belong
    // to no unit and are held at their measured values.
    return fixed_spec({{0, 1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12, 13, 14}, {18, 19, 20}, {15, 16, 17}},
                      {{0}, {1, 2}, {3, 4}, {5}, {6}}, a_e);
}

SubsystemSpec carrier_partition(const AdjacencyMatrix& a_e) {
    // Electricity and cooling.
    return fixed_spec({{0, 1, 2, 3, 4, 5, 15, 16, 17}, {6, 7, 8, 9, 10, 11, 12, 13, 14, 18, 19, 20, 21, 22}},
                      {{0, 1, 6}, {2, 3, 4, 5}}, a_e);
}

// ---- pipeline --------------------------------------------------------------

DecompConfig decomp_config_from_kv(const KvFile& kv) {
    DecompConfig c;
    c.tau_mode = kv.str("decomp.tau_mode", c.tau_mode);
    if (c.tau_mode != "table" && c.tau_mode != "estimate")
        throw ConfigError(kv.source() + ": decomp.tau_mode must be 'table' or 'estimate'");
    c.rep_fast = kv.str("decomp.rep_fast", c.rep_fast);
    c.rep_slow = kv.str("decomp.rep_slow", c.rep_slow);
    if (c.rep_fast == "auto") c.rep_fast.clear();
    if (c.rep_slow == "auto") c.rep_slow.clear();
    c.gap_min = kv.num("decomp.gap_min", c.gap_min);
    c.h_rel = kv.num("decomp.h_rel", c.h_rel);
    c.tol_abs = kv.num("decomp.tol_abs", c.tol_abs);
    c.include_disturbances = kv.integer("decomp.include_disturbances", 1) != 0;
    c.detection.n_c_upper = static_cast<int>(kv.integer("decomp.n_c_upper", c.detection.n_c_upper));
    c.detection.n_l_lower = static_cast<int>(kv.integer("decomp.n_l_lower", c.detection.n_l_lower));
    c.detection.n_m_lower = static_cast<int>(kv.integer("decomp.n_m_lower", c.detection.n_m_lower));
    c.detection.max_restarts = static_cast<int>(kv.integer("decomp.max_restarts", c.detection.max_restarts));
    c.detection.seed = static_cast<std::uint64_t>(kv.integer("decomp.seed", 1));
    c.sharing.expected_fast = static_cast<int>(kv.integer("decomp.expected_fast", c.sharing.expected_fast));
    c.sharing.share_pv = kv.integer("decomp.share_pv", 1) != 0;
    if (kv.has("decomp.shared_outputs")) {
        c.sharing.shared_outputs.clear();
        for (const std::string& w : kv.words("decomp.shared_outputs")) {
            if (w == "none") continue;
            if (w.size() < 2 || w[0] != 'y') throw ConfigError(kv.source() + ": bad shared output '" + w + "'");
            c.sharing.shared_outputs.push_back(std::stoi(w.substr(1)) - 1);
        }
    }
    if (c.gap_min <= 1 || c.h_rel <= 0 || c.tol_abs <= 0 || c.detection.n_c_upper < 1 ||
        c.detection.n_l_lower < 1 || c.detection.n_m_lower < 0 || c.detection.max_restarts < 1)
        throw ConfigError(kv.source() + ": decomposition settings out of range");
    return c;
}

namespace {

int state_index(const std::string& label) {
    if (label.empty()) return -1;
    if (label.size() < 2 || label[0] != 'x') throw ConfigError("representative '" + label + "' is not a state label");
    const int k = std::stoi(label.substr(1));
    if (k < 1 || k > kNx) throw ConfigError("representative '" + label + "' is out of range");
    return k - 1;
}

}  // namespace

Decomposition decompose(const PlantParams& p, const DecompConfig& cfg) {
    Decomposition d;
    d.point = reference_equilibrium(p);
    d.jac = plant_jacobians(p, d.point, cfg.h_rel);
    d.a_e = adjacency(row_scaled(augment(d.jac)), cfg.tol_abs, ies_nodes());
    const Eigen::VectorXd table = p.tau_table;
    d.tau = cfg.tau_mode == "estimate" ? estimate_time_constants(d.jac.A, table) : table_time_constants(table);

    try {
        d.split = vertical_split(d.tau.tau, d.a_e, cfg.gap_min, state_index(cfg.rep_fast), state_index(cfg.rep_slow));
        d.a_f = fast_adjacency(d.a_e, *d.split);
    } catch (const NoScaleGap& e) {
        d.split_note = "NoScaleGap: " + std::string(e.what()) + "; horizontal decomposition only";
        d.a_f = d.a_e;
    }
    if (!cfg.include_disturbances)
        for (int i = 0; i < d.a_f.size(); ++i)
            if (d.a_f.nodes[i].kind == NodeKind::Disturbance) {
                d.a_f.a.row(i).setZero();
                d.a_f.a.col(i).setZero();
            }

    d.partition = detect_communities(d.a_f, cfg.detection);

    TimeScaleSplit split;
    if (d.split) {
        split = *d.split;
    } else {
        for (int i = 0; i < kNx; ++i) split.fast_states.push_back(i);
        for (int i = 0; i < kNu; ++i) split.fast_inputs.push_back(i);
        for (int i = 0; i < kNy; ++i) split.fast_outputs.push_back(i);
    }
    try {
        d.subsystems = build_subsystems(d.partition, split, d.a_e, cfg.sharing);
    } catch (const CardinalityMismatch& e) {
        d.subsystem_note = e.what();
    }
    return d;
}

void write_partition(std::ostream& out, const AdjacencyMatrix& a, const Partition& p) {
    for (int i = 0; i < a.size(); ++i)
        out << a.nodes[i].label << ' ' << (p.tags[i] < 0 ? std::string("-") : std::to_string(p.tags[i] + 1)) << '\n';
}

std::vector<int> read_partition(std::istream& in, const AdjacencyMatrix& a) {
    std::vector<int> tags(a.size(), -1);
    std::vector<bool> seen(a.size(), false);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string label, id;
        if (!(ls >> label)) continue;
        if (!(ls >> id)) throw IoError("partition line " + std::to_string(lineno) + ": missing community id");
        const int k = a.index_of(label);
        if (k < 0) throw IoError("partition line " + std::to_string(lineno) + ": unknown node '" + label + "'");
        if (seen[k]) throw IoError("partition line " + std::to_string(lineno) + ": duplicate node '" + label + "'");
        seen[k] = true;
        if (id != "-") {
            try {
                tags[k] = std::stoi(id) - 1;
            } catch (const std::exception&) {
                throw IoError("partition line " + std::to_string(lineno) + ": bad community id '" + id + "'");
            }
            if (tags[k] < 0) throw IoError("partition line " + std::to_string(lineno) + ": ids start at 1");
        }
    }
    return tags;
}

namespace {

nlohmann::json labels(const std::vector<int>& idx, char prefix) {
    nlohmann::json j = nlohmann::json::array();
    for (int i : idx) j.push_back(std::string(1, prefix) + std::to_string(i + 1));
    return j;
}

}  // namespace

void write_decomposition_report(std::ostream& out, const Decomposition& d, const DecompConfig& cfg) {
    nlohmann::json j;
    j["tau_mode"] = cfg.tau_mode;
    nlohmann::json tau = nlohmann::json::object();
    for (int i = 0; i < d.tau.tau.size(); ++i) tau["x" + std::to_string(i + 1)] = d.tau.tau(i);
    j["tau_s"] = tau;
    j["tau_warnings"] = d.tau.warnings;
    j["equilibrium_residual"] = d.jac.point_residual;
    j["edges"] = d.a_e.edge_count();
    j["fast_edges"] = d.a_f.edge_count();
    if (d.split) {
        const TimeScaleSplit& s = *d.split;
        j["vertical"] = {
            {"slow_states", labels(s.slow_states, 'x')},   {"fast_states", labels(s.fast_states, 'x')},
            {"slow_inputs", labels(s.slow_inputs, 'u')},   {"fast_inputs", labels(s.fast_inputs, 'u')},
            {"slow_outputs", labels(s.slow_outputs, 'y')}, {"fast_outputs", labels(s.fast_outputs, 'y')},
            {"rep_fast", "x" + std::to_string(s.rep_fast + 1)},
            {"rep_slow", "x" + std::to_string(s.rep_slow + 1)},
            {"tau_f_rep", s.tau_f_rep},
            {"tau_s_rep", s.tau_s_rep},
            {"epsilon", s.epsilon},
            {"gap_ratio", s.gap_ratio},
        };
    } else {
        j["vertical"] = nullptr;
        j["vertical_note"] = d.split_note;
    }
    nlohmann::json comms = nlohmann::json::array();
    for (int c = 0; c < d.partition.communities; ++c) {
        nlohmann::json members = nlohmann::json::array();
        for (int i = 0; i < d.a_f.size(); ++i)
            if (d.partition.tags[i] == c) members.push_back(d.a_f.nodes[i].label);
        comms.push_back(members);
    }
    nlohmann::json isolated = nlohmann::json::array();
    for (int i : d.partition.isolated) isolated.push_back(d.a_f.nodes[i].label);
    j["horizontal"] = {
        {"modularity", d.partition.modularity}, {"communities", comms},
        {"isolated", isolated},                 {"restarts", d.partition.restarts},
        {"seed", d.partition.seed},             {"n_c_upper", cfg.detection.n_c_upper},
        {"n_l_lower", cfg.detection.n_l_lower}, {"n_m_lower", cfg.detection.n_m_lower},
    };
    if (d.subsystems) {
        nlohmann::json subs = nlohmann::json::array();
        for (const FastSubsystem& f : d.subsystems->fast)
            subs.push_back({{"states", labels(f.states, 'x')},
                            {"inputs", labels(f.inputs, 'u')},
                            {"outputs", labels(f.outputs, 'y')},
                            {"neighbour_states", labels(f.nbr_states, 'x')},
                            {"neighbour_inputs", labels(f.nbr_inputs, 'u')},
                            {"shares_pv", f.shares_pv}});
        j["subsystems"] = subs;
    } else {
        j["subsystems"] = nullptr;
        j["subsystem_note"] = d.subsystem_note;
    }
    out << j.dump(2) << '\n';
}

}  // namespace gridsyn
