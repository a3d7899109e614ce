#include "gridsyn/empc.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/plant.hpp"
#include "gridsyn/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace gridsyn {

// ---- configuration ---------------------------------------------------------

namespace {

struct NumKey {
    const char* key;
    double* value;
};
struct IntKey {
    const char* key;
    int* value;
};

void bind_keys(EmpcConfig& c, std::vector<NumKey>& nums, std::vector<IntKey>& ints) {
    nums = {
        {"slow.dt", &c.slow.dt},
        {"slow.alpha1", &c.slow.alpha1},
        {"slow.alpha2", &c.slow.alpha2},
        {"slow.alpha3", &c.slow.alpha3},
        {"slow.r_s", &c.slow.r_s},
        {"slow.du_frac", &c.slow.du_frac},
        {"slow.band_guard", &c.slow.band_guard},
        {"slow.soc_lo", &c.slow.soc_lo},
        {"slow.soc_hi", &c.slow.soc_hi},
        {"slow.sot_lo", &c.slow.sot_lo},
        {"slow.sot_hi", &c.slow.sot_hi},
        {"slow.tol", &c.slow.tol},
        {"fast.dt", &c.fast.dt},
        {"fast.alpha1", &c.fast.alpha1},
        {"fast.alpha2", &c.fast.alpha2},
        {"fast.r1", &c.fast.r1},
        {"fast.r1x", &c.fast.r1x},
        {"fast.r2", &c.fast.r2},
        {"fast.du_rate", &c.fast.du_rate},
        {"fast.du_s", &c.fast.du_s},
        {"fast.du_c", &c.fast.du_c},
        {"fast.du_p", &c.fast.du_p},
        {"fast.psi", &c.fast.psi},
        {"fast.relax", &c.fast.relax},
        {"fast.j_floor", &c.fast.j_floor},
        {"fast.tol", &c.fast.tol},
        {"fast.big_m", &c.big_m},
        {"sup.q_x", &c.sup.q_x},
        {"sup.r_u", &c.sup.r_u},
        {"sup.du_rate", &c.sup.du_rate},
        {"sup.tol", &c.sup.tol},
    };
    ints = {
        {"slow.horizon", &c.slow.horizon},
        {"slow.max_iter", &c.slow.max_iter},
        {"fast.substeps", &c.fast.substeps},
        {"fast.c_max", &c.fast.c_max},
        {"fast.max_iter", &c.fast.max_iter},
        {"sup.horizon_short", &c.sup.horizon_short},
        {"sup.horizon_long", &c.sup.horizon_long},
        {"sup.max_iter", &c.sup.max_iter},
    };
}

bool has_prefix(const std::string& k) {
    return k.rfind("slow.", 0) == 0 || k.rfind("fast.", 0) == 0 || k.rfind("sup.", 0) == 0;
}

}  // namespace

EmpcConfig empc_config_from_kv(const KvFile& kv) {
    EmpcConfig c;
    std::vector<NumKey> nums;
    std::vector<IntKey> ints;
    bind_keys(c, nums, ints);
    for (const auto& [key, value] : kv.entries()) {
        if (!has_prefix(key)) continue;
        bool known = key == "fast.horizons";
        for (const auto& n : nums) known = known || key == n.key;
        for (const auto& n : ints) known = known || key == n.key;
        if (!known) throw ConfigError(kv.source() + ": unknown controller key '" + key + "'");
    }
    for (const auto& n : nums) *n.value = kv.num(n.key, *n.value);
    for (const auto& n : ints) *n.value = static_cast<int>(kv.integer(n.key, *n.value));
    if (kv.has("fast.horizons")) {
        c.fast.horizons.clear();
        for (double h : kv.list("fast.horizons")) c.fast.horizons.push_back(static_cast<int>(std::lround(h)));
    }

    auto bad = [&](const std::string& what) { throw ConfigError(kv.source() + ": " + what); };
    if (c.slow.horizon < 1 || c.sup.horizon_short < 1 || c.sup.horizon_long < 1) bad("horizons must be positive");
    for (int h : c.fast.horizons)
        if (h < 1) bad("fast.horizons must be positive");
    if (c.fast.c_max < 1) bad("fast.c_max must be at least 1");
    if (c.fast.substeps < 1) bad("fast.substeps must be at least 1");
    if (!(c.fast.psi > 0)) bad("fast.psi must be positive");
    if (!(c.fast.j_floor >= 0)) bad("fast.j_floor must be non-negative");
    if (!(c.fast.relax >= 0 && c.fast.relax <= 1)) bad("fast.relax must lie in [0, 1]");
    if (!(c.slow.band_guard >= 0)) bad("slow.band_guard must be non-negative");
    if (!(c.slow.dt > 0) || !(c.fast.dt > 0)) bad("controller steps must be positive");
    const double ratio = c.slow.dt / c.fast.dt;
    if (ratio < 1 || std::abs(ratio - std::round(ratio)) > 1e-9) bad("slow.dt must be a multiple of fast.dt");
    for (double w : {c.slow.alpha1, c.slow.alpha2, c.slow.alpha3, c.slow.r_s, c.fast.alpha1, c.fast.alpha2,
                     c.fast.r1, c.fast.r1x, c.fast.r2, c.sup.q_x, c.sup.r_u})
        if (!(w >= 0)) bad("weights must be non-negative");
    for (double d : {c.slow.du_frac, c.fast.du_rate, c.fast.du_s, c.fast.du_c, c.fast.du_p, c.sup.du_rate})
        if (!(d >= 0)) bad("neighbourhood and rate widths must be non-negative");
    return c;
}

void empc_config_to_kv(const EmpcConfig& c0, KvFile& kv) {
    EmpcConfig c = c0;
    std::vector<NumKey> nums;
    std::vector<IntKey> ints;
    bind_keys(c, nums, ints);
    for (const auto& n : nums) kv.set(n.key, *n.value);
    for (const auto& n : ints) kv.set(n.key, static_cast<double>(*n.value));
    std::vector<double> h(c.fast.horizons.begin(), c.fast.horizons.end());
    kv.set("fast.horizons", h);
}

// ---- shared helpers --------------------------------------------------------

DistVec biased_forecast(const Profile& prof, double t_now, const DistVec& w_now, double t) {
    DistVec w = prof.forecast(t) + (w_now - prof.forecast(t_now));
    for (int k : {sw::S_ra, sw::P_d, sw::Q_o}) w(k) = std::max(0.0, w(k));
    return w;
}

InputVec input_range(const PlantParams& p) { return (p.u_max - p.u_min).cwiseMax(1e-12); }

Eigen::MatrixXd fit_length(const Eigen::MatrixXd& m, int n) {
    Eigen::MatrixXd out(n, m.cols());
    for (int i = 0; i < n; ++i) out.row(i) = m.row(std::min<Eigen::Index>(i, m.rows() - 1));
    return out;
}

Eigen::MatrixXd shift_hold(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    const Eigen::Index n = m.rows();
    if (n > 1) out.topRows(n - 1) = m.bottomRows(n - 1);
    return out;
}

namespace {

constexpr int kOwner[kNu] = {sz::fc, sz::ma, sz::ma, sz::ec, sz::ec, -1, -1};

bool toggled(int input, const IntVec& a, const IntVec& b) {
    const int o = kOwner[input];
    return o >= 0 && a(o) != b(o);
}

double state_scale(const PlantParams& p, int i) { return std::max(1.0, std::abs(p.nominal.x(i))); }

bool recoverable(const Error& e) { return e.kind() == ErrorKind::Model || e.kind() == ErrorKind::Solver; }

// Single-shooting transcription. The first n_sim variables drive a simulation
// returning a cost, inequality values (<= 0) and the residuals whose squared
// norm is the convex quadratic part of the cost; the tail variables only
// carry a diagonal quadratic cost. Derivatives of the simulated part come
// from one joint central-difference sweep, cached per point, and give a
// Gauss-Newton Hessian for free.
class Shooting {
public:
    using Sim = std::function<void(const Eigen::VectorXd&, double&, Eigen::VectorXd&, Eigen::VectorXd&)>;

    Shooting(int n, int n_sim, int n_ineq, int n_res, Sim sim, Eigen::VectorXd q_tail)
        : n_(n), n_sim_(n_sim), n_ineq_(n_ineq), n_res_(n_res), sim_(std::move(sim)), q_tail_(std::move(q_tail)) {}

    NlpProblem problem(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, const Eigen::VectorXd& x0) {
        lb_ = lb;
        ub_ = ub;
        NlpProblem p;
        p.n = n_;
        p.lb = lb;
        p.ub = ub;
        p.x0 = x0.cwiseMax(lb).cwiseMin(ub);
        p.objective = [this](const Eigen::VectorXd& v) {
            eval(v);
            return J_ + tail_cost(v);
        };
        p.gradient = [this](const Eigen::VectorXd& v) {
            derive(v);
            Eigen::VectorXd g = g_;
            for (int k = n_sim_; k < n_; ++k) g(k) = 2.0 * q_tail_(k - n_sim_) * v(k);
            return g;
        };
        p.hessian = [this](const Eigen::VectorXd& v) {
            derive(v);
            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
            H.topLeftCorner(n_sim_, n_sim_) = 2.0 * Jr_.transpose() * Jr_;
            for (int k = n_sim_; k < n_; ++k) H(k, k) = 2.0 * q_tail_(k - n_sim_);
            return H;
        };
        if (n_ineq_ > 0) {
            p.ineq = [this](const Eigen::VectorXd& v) {
                eval(v);
                return c_;
            };
            p.ineq_jacobian = [this](const Eigen::VectorXd& v) {
                derive(v);
                return Jc_;
            };
        }
        return p;
    }

private:
    double tail_cost(const Eigen::VectorXd& v) const {
        double s = 0;
        for (int k = n_sim_; k < n_; ++k) s += q_tail_(k - n_sim_) * v(k) * v(k);
        return s;
    }

    void run(const Eigen::VectorXd& v, double& J, Eigen::VectorXd& c, Eigen::VectorXd& r) const {
        c = Eigen::VectorXd::Zero(n_ineq_);
        r = Eigen::VectorXd::Zero(n_res_);
        sim_(v, J, c, r);
    }

    void eval(const Eigen::VectorXd& v) {
        if (has_eval_ && v.head(n_sim_) == v_eval_) return;
        v_eval_ = v.head(n_sim_);
        has_eval_ = false;
        run(v, J_, c_, r_);
        has_eval_ = true;
    }

    void derive(const Eigen::VectorXd& v) {
        if (has_der_ && v.head(n_sim_) == v_der_) return;
        has_der_ = false;
        eval(v);
        g_ = Eigen::VectorXd::Zero(n_);
        Jc_ = Eigen::MatrixXd::Zero(n_ineq_, n_);
        Jr_ = Eigen::MatrixXd::Zero(n_res_, n_sim_);
        Eigen::VectorXd probe = v, cp, cm, rp, rm;
        double Jp = 0, Jm = 0;
        for (int k = 0; k < n_sim_; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(v(k)));
            const bool up = v(k) + h <= ub_(k), down = v(k) - h >= lb_(k);
            if (up && down) {
                probe(k) = v(k) + h;
                run(probe, Jp, cp, rp);
                probe(k) = v(k) - h;
                run(probe, Jm, cm, rm);
                g_(k) = (Jp - Jm) / (2 * h);
                if (n_ineq_) Jc_.col(k) = (cp - cm) / (2 * h);
                if (n_res_) Jr_.col(k) = (rp - rm) / (2 * h);
            } else if (up || !down) {
                probe(k) = v(k) + h;
                run(probe, Jp, cp, rp);
                g_(k) = (Jp - J_) / h;
                if (n_ineq_) Jc_.col(k) = (cp - c_) / h;
                if (n_res_) Jr_.col(k) = (rp - r_) / h;
            } else {
                probe(k) = v(k) - h;
                run(probe, Jm, cm, rm);
                g_(k) = (J_ - Jm) / h;
                if (n_ineq_) Jc_.col(k) = (c_ - cm) / h;
                if (n_res_) Jr_.col(k) = (r_ - rm) / h;
            }
            probe(k) = v(k);
        }
        v_der_ = v.head(n_sim_);
        has_der_ = true;
    }

    int n_, n_sim_, n_ineq_, n_res_;
    Sim sim_;
    Eigen::VectorXd q_tail_;
    Eigen::VectorXd lb_, ub_;
    Eigen::VectorXd v_eval_, v_der_;
    bool has_eval_ = false, has_der_ = false;
    double J_ = 0;
    Eigen::VectorXd c_, r_, g_;
    Eigen::MatrixXd Jc_, Jr_;
};

// Rows +-(v_i - v_{i-1}) <= width for one input column of a horizon-major
// layout; the rows are lifted by big_m where the unit toggles.
void add_rate_rows(std::vector<Eigen::RowVectorXd>& rows, std::vector<double>& rhs, int n, int m, int a,
                   int horizon, double v_before, double width, const std::vector<bool>& toggle, double big_m) {
    for (int i = 0; i < horizon; ++i) {
        const double w = width + (toggle[i] ? big_m : 0.0);
        for (int sign : {1, -1}) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
            r(i * m + a) = sign;
            double b = w;
            if (i > 0)
                r((i - 1) * m + a) = -sign;
            else
                b += sign * v_before;
            rows.push_back(r);
            rhs.push_back(b);
        }
    }
}

void stack_rows(NlpProblem& p, const std::vector<Eigen::RowVectorXd>& rows, const std::vector<double>& rhs) {
    p.A_lin.resize(static_cast<Eigen::Index>(rows.size()), p.n);
    p.b_lin.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        p.A_lin.row(static_cast<Eigen::Index>(r)) = rows[r];
        p.b_lin(static_cast<Eigen::Index>(r)) = rhs[r];
    }
}

}  // namespace

// ---- slow layer -------------------------------------------------------------

SlowEmpc::SlowEmpc(const ControlContext& ctx) : ctx_(ctx) {}

namespace {

struct SlowSim {
    const ControlContext& ctx;
    double t;
    StateVec x0;
    DistVec w_now;
    double xi;
    std::vector<IntVec> z;
    std::vector<DistVec> w;
    InputVec range;

    SlowSim(const ControlContext& c, double t_, const StateVec& x, const DistVec& wn, double xi_)
        : ctx(c), t(t_), x0(x), w_now(wn), xi(xi_) {
        const auto& s = ctx.cfg.slow;
        for (int i = 0; i < s.horizon; ++i) {
            z.push_back(ctx.sched->z_at(t + i * s.dt));
            w.push_back(biased_forecast(*ctx.prof, t, w_now, t + (i + 0.5) * s.dt));
        }
        range = input_range(*ctx.p);
    }

    InputVec input(const Eigen::VectorXd& v, int i) const {
        return v.segment<kNu>(i * kNu).cwiseProduct(range);
    }

    static constexpr int kResiduals = 5;

    // Returns the objective; fills constraint values, residuals, parts and
    // trajectory when asked.
    double run(const Eigen::VectorXd& v, Eigen::VectorXd* c, SlowResult* out, Eigen::VectorXd* res = nullptr) const {
        const auto& s = ctx.cfg.slow;
        const PlantParams& p = *ctx.p;
        const int N = s.horizon;
        QssSolver qss(p, ctx.fast_states);
        StateVec x = qss.solve(x0, input(v, 0), z[0], w[0]);
        double J[4] = {0, 0, 0, 0};
        for (int i = 0; i < N; ++i) {
            const InputVec u = input(v, i);
            const double ti = t + i * s.dt, te = ti + s.dt;
            x = reduced_step(qss, x, u, z[i], w[i], s.dt);
            const OutputVec y = outputs(x, u, z[i], w[i], p);
            const double y_eb = ctx.sched->y_eb_at(ti);
            const double dev = y(sy::P_sl) - (1.0 + xi) * y_eb;
            const double dsp = y(sy::t_br) - v(N * kNu + i);
            const double dsoc = x(sx::C_soc) - ctx.sched->soc_ref(te);
            const double dsot = x(sx::C_sot) - ctx.sched->sot_ref(te);
            J[0] += s.alpha1 * dev * dev;
            J[1] += s.alpha2 * dsp * dsp;
            J[2] -= s.alpha3 * stage_profit(*ctx.prices, ti, s.dt, y(sy::P_sl), y_eb, xi, w[i](sw::P_d),
                                            u(su::G_ff) + u(su::G_fm));
            J[3] += s.r_s * (dsoc * dsoc + dsot * dsot);
            if (res) {
                const double pn = ctx.prices->pn(ti) * s.dt / 3.6e6;
                res->segment<kResiduals>(kResiduals * i) << std::sqrt(s.alpha1) * dev, std::sqrt(s.alpha2) * dsp,
                    std::sqrt(s.alpha3 * pn) * dev, std::sqrt(s.r_s) * dsoc, std::sqrt(s.r_s) * dsot;
            }
            if (c) {
                (*c)(4 * i + 0) = s.soc_lo - x(sx::C_soc);
                (*c)(4 * i + 1) = x(sx::C_soc) - s.soc_hi;
                (*c)(4 * i + 2) = s.sot_lo - x(sx::C_sot);
                (*c)(4 * i + 3) = x(sx::C_sot) - s.sot_hi;
            }
            if (out) {
                out->u.push_back(u);
                out->x.push_back(x);
                out->y_sp.push_back(v(N * kNu + i));
            }
        }
        if (out)
            for (int k = 0; k < 4; ++k) out->J[k] = J[k];
        return J[0] + J[1] + J[2] + J[3];
    }
};

}  // namespace

double SlowEmpc::evaluate_plan(double t, const StateVec& x, const InputVec& u_prev, const DistVec& w_now, double xi,
                               const std::vector<InputVec>& u, const std::vector<double>& y_sp, SlowResult* parts) {
    (void)u_prev;
    const int N = ctx_.cfg.slow.horizon;
    if (static_cast<int>(u.size()) != N || static_cast<int>(y_sp.size()) != N)
        throw ConfigError("plan length does not match the slow horizon");
    SlowSim sim(ctx_, t, x, w_now, xi);
    Eigen::VectorXd v(N * (kNu + 1));
    for (int i = 0; i < N; ++i) {
        v.segment<kNu>(i * kNu) = u[i].cwiseQuotient(sim.range);
        v(N * kNu + i) = y_sp[i];
    }
    SlowResult r;
    const double J = sim.run(v, nullptr, &r);
    r.objective = J;
    if (parts) *parts = r;
    return J;
}

SlowResult SlowEmpc::solve(double t, const StateVec& x, const InputVec& u_prev, const DistVec& w_now, double xi) {
    const auto& s = ctx_.cfg.slow;
    const int N = s.horizon;
    const int n = N * (kNu + 1);
    SlowSim sim(ctx_, t, x, w_now, xi);

    Eigen::VectorXd lb(n), ub(n), x0(n);
    for (int i = 0; i < N; ++i) {
        InputVec lo, hi;
        gated_bounds(sim.z[i], *ctx_.p, lo, hi);
        lb.segment<kNu>(i * kNu) = lo.cwiseQuotient(sim.range);
        ub.segment<kNu>(i * kNu) = hi.cwiseQuotient(sim.range);
        lb(N * kNu + i) = ctx_.band_lo + s.band_guard;
        ub(N * kNu + i) = ctx_.band_hi - s.band_guard;
    }
    // Warm start from the previous plan shifted by one step, else the schedule.
    for (int i = 0; i < N; ++i) {
        InputVec u;
        double ysp;
        if (have_last_ && !last_.u.empty()) {
            const int j = std::min<int>(i + 1, static_cast<int>(last_.u.size()) - 1);
            u = last_.u[j];
            ysp = last_.y_sp[j];
        } else {
            u = ctx_.sched->u[std::clamp(static_cast<int>((t + i * s.dt) / 3600.0), 0, kHours - 1)];
            ysp = x(sx::t_br);
        }
        x0.segment<kNu>(i * kNu) = u.cwiseQuotient(sim.range);
        x0(N * kNu + i) = ysp;
    }
    // The schedule or a previous plan can sit outside this horizon's gating.
    x0 = x0.cwiseMax(lb).cwiseMin(ub);

    Shooting shoot(
        n, n, 4 * N, SlowSim::kResiduals * N,
        [&sim](const Eigen::VectorXd& v, double& J, Eigen::VectorXd& c, Eigen::VectorXd& r) {
            J = sim.run(v, &c, nullptr, &r);
        },
        Eigen::VectorXd());
    NlpProblem prob = shoot.problem(lb, ub, x0);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    const IntVec z_before = ctx_.sched->z_at(std::max(0.0, t - s.dt));
    for (int a = 0; a < kNu; ++a) {
        std::vector<bool> tog(N);
        for (int i = 0; i < N; ++i) tog[i] = toggled(a, sim.z[i], i == 0 ? z_before : sim.z[i - 1]);
        // A previous input outside the first step's gating means the unit switched.
        const double u0 = u_prev(a) / sim.range(a);
        if (u0 < lb(a) - 1e-12 || u0 > ub(a) + 1e-12) tog[0] = true;
        add_rate_rows(rows, rhs, n, kNu, a, N, u_prev(a) / sim.range(a), s.du_frac, tog, ctx_.cfg.big_m);
    }
    stack_rows(prob, rows, rhs);

    NlpSettings st;
    st.tol = s.tol;
    st.max_iter = s.max_iter;
    SlowResult r;
    try {
        const NlpSolution sol = gridsyn::solve(prob, st);
        if (sol.status == NlpStatus::Infeasible) throw SolverInfeasible("slow layer infeasible");
        r.objective = sim.run(sol.x, nullptr, &r);
        r.status = sol.status;
        r.nlp_iterations = sol.iterations;
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        // Reuse the previous plan shifted by one step, or the schedule.
        r = SlowResult();
        r.held = true;
        r.status = NlpStatus::Infeasible;
        try {
            r.objective = sim.run(x0, nullptr, &r);
        } catch (const Error& e2) {
            if (!recoverable(e2)) throw;
            for (int i = 0; i < N; ++i) {
                r.u.push_back(x0.segment<kNu>(i * kNu).cwiseProduct(sim.range));
                r.x.push_back(x);
                r.y_sp.push_back(x0(N * kNu + i));
            }
        }
    }
    last_ = r;
    have_last_ = true;
    return r;
}

// ---- agent model -------------------------------------------------------------

namespace {

// Background of one local prediction: every state and input an agent does not
// decide, per interval of its horizon.
struct Background {
    std::vector<StateVec> x;   // N+1 points, x(k+i)
    std::vector<InputVec> u;   // N intervals
    std::vector<IntVec> z;
    std::vector<DistVec> w;
    std::vector<double> y_eb;
    std::vector<double> t;
};

// Integrates the own states with RK4 substeps while everything else follows
// the background. Returns the full state at the end of each interval.
std::vector<StateVec> simulate_own(const PlantParams& p, const std::vector<int>& own_x, const std::vector<int>& own_u,
                                   const Background& bg, const Eigen::MatrixXd& U, double dt, int substeps,
                                   std::vector<InputVec>& u_full) {
    const int N = static_cast<int>(bg.u.size());
    std::vector<StateVec> out;
    out.reserve(N);
    u_full.assign(N, InputVec::Zero());
    Eigen::VectorXd own(own_x.size());
    for (size_t k = 0; k < own_x.size(); ++k) own(k) = bg.x[0](own_x[k]);
    const double h = dt / substeps;
    for (int i = 0; i < N; ++i) {
        InputVec u = bg.u[i];
        for (size_t a = 0; a < own_u.size(); ++a) u(own_u[a]) = U(i, static_cast<Eigen::Index>(a));
        u_full[i] = u;
        StateVec x = bg.x[i];
        auto f = [&](const Eigen::VectorXd& o) {
            for (size_t k = 0; k < own_x.size(); ++k) x(own_x[k]) = o(k);
            const StateVec d = derivatives(x, u, bg.z[i], bg.w[i], p);
            Eigen::VectorXd r(own_x.size());
            for (size_t k = 0; k < own_x.size(); ++k) r(k) = d(own_x[k]);
            return r;
        };
        for (int s = 0; s < substeps; ++s) {
            const Eigen::VectorXd k1 = f(own);
            const Eigen::VectorXd k2 = f(own + 0.5 * h * k1);
            const Eigen::VectorXd k3 = f(own + 0.5 * h * k2);
            const Eigen::VectorXd k4 = f(own + h * k3);
            own += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!own.allFinite()) throw IntegrationDiverged("local prediction is not finite");
        StateVec end = bg.x[i + 1];
        for (size_t k = 0; k < own_x.size(); ++k) end(own_x[k]) = own(k);
        out.push_back(end);
    }
    return out;
}

Background fast_background(const ControlContext& ctx, const std::vector<FastAgent>* agents, int self, int N,
                           const ExchangeBoard& board, const FastSample& s) {
    const auto& f = ctx.cfg.fast;
    Background bg;
    for (int i = 0; i <= N; ++i) {
        StateVec x = s.x;
        for (int k : ctx.slow_states) x(k) = board.x_frozen(k);
        bg.x.push_back(x);
    }
    for (int i = 0; i < N; ++i) {
        // Slow inputs stay at the slow-layer values; other agents come from the board below.
        bg.u.push_back(board.u_frozen);
        const double ti = s.t + i * f.dt;
        bg.t.push_back(ti);
        bg.z.push_back(ctx.sched->z_at(ti));
        bg.w.push_back(biased_forecast(*ctx.prof, s.t, s.w, ti + 0.5 * f.dt));
        bg.y_eb.push_back(ctx.sched->y_eb_at(ti));
    }
    if (agents) {
        for (const FastAgent& other : *agents) {
            if (other.index() == self) continue;
            const FastSubsystem& os = other.subsystem();
            const Eigen::MatrixXd ou = fit_length(board.u[other.index()], N);
            const Eigen::MatrixXd ox = fit_length(board.x[other.index()], N);
            for (int i = 0; i < N; ++i) {
                for (size_t a = 0; a < os.inputs.size(); ++a) bg.u[i](os.inputs[a]) = ou(i, a);
                for (size_t k = 0; k < os.states.size(); ++k) bg.x[i + 1](os.states[k]) = ox(i, k);
            }
        }
    }
    return bg;
}

}  // namespace

// ---- fast agents --------------------------------------------------------------

namespace {

// The agent set is needed to read neighbours off the board; agents register
// their siblings through this pointer while coordinating.
thread_local const std::vector<FastAgent>* g_siblings = nullptr;

struct SiblingScope {
    const std::vector<FastAgent>* saved;
    explicit SiblingScope(const std::vector<FastAgent>* a) : saved(g_siblings) { g_siblings = a; }
    ~SiblingScope() { g_siblings = saved; }
};

}  // namespace

FastAgent::FastAgent(const ControlContext& ctx, int index, const FastSubsystem& sub, int horizon)
    : ctx_(ctx), index_(index), sub_(sub), horizon_(horizon) {
    if (horizon < 1) throw ConfigError("fast horizon must be positive");
}

namespace {

struct FastCost {
    const ControlContext& ctx;
    const FastSubsystem& sub;
    const Background& bg;
    const ExchangeBoard& board;
    double xi;
    InputVec range;

    int residuals() const {
        return static_cast<int>(bg.u.size() * (2 + sub.inputs.size() + sub.states.size()));
    }

    // Economic and reference terms of a physical input sequence.
    double operator()(const Eigen::MatrixXd& U, Eigen::MatrixXd* x_out, Eigen::VectorXd* res = nullptr) const {
        const auto& f = ctx.cfg.fast;
        const PlantParams& p = *ctx.p;
        std::vector<InputVec> u_full;
        const std::vector<StateVec> xs =
            simulate_own(p, sub.states, sub.inputs, bg, U, f.dt, f.substeps, u_full);
        double J = 0;
        const int N = static_cast<int>(xs.size());
        int q = 0;
        for (int i = 0; i < N; ++i) {
            const OutputVec y = outputs(xs[i], u_full[i], bg.z[i], bg.w[i], p);
            const double dev = y(sy::P_sl) - (1.0 + xi) * bg.y_eb[i];
            J += f.alpha1 * dev * dev;
            if (res) {
                (*res)(q++) = std::sqrt(f.alpha1) * dev;
                (*res)(q++) = std::sqrt(f.alpha2 * ctx.prices->pn(bg.t[i]) * f.dt / 3.6e6) * dev;
            }
            J -= f.alpha2 * stage_profit(*ctx.prices, bg.t[i], f.dt, y(sy::P_sl), bg.y_eb[i], xi,
                                         bg.w[i](sw::P_d), u_full[i](su::G_ff) + u_full[i](su::G_fm));
            double track = 0;
            for (int a : sub.inputs) {
                const double d = (u_full[i](a) - board.u_ref(a)) / range(a);
                track += f.r1 * d * d;
                if (res) (*res)(q++) = std::sqrt(f.r1) * d;
            }
            for (int k : sub.states) {
                const double d = (xs[i](k) - board.x_ref(k)) / state_scale(p, k);
                track += f.r1x * d * d;
                if (res) (*res)(q++) = std::sqrt(f.r1x) * d;
            }
            J += track;
        }
        if (x_out) {
            x_out->resize(N, static_cast<Eigen::Index>(sub.states.size()));
            for (int i = 0; i < N; ++i)
                for (size_t k = 0; k < sub.states.size(); ++k) (*x_out)(i, k) = xs[i](sub.states[k]);
        }
        return J;
    }
};

}  // namespace

double FastAgent::cost(const ExchangeBoard& board, const FastSample& s, const Eigen::MatrixXd& u,
                       Eigen::MatrixXd* x_out) const {
    const Background bg = fast_background(ctx_, g_siblings, index_, horizon_, board, s);
    FastCost fc{ctx_, sub_, bg, board, s.xi, input_range(*ctx_.p)};
    return fc(fit_length(u, horizon_), x_out);
}

AgentSolution FastAgent::solve(const ExchangeBoard& board, const FastSample& s) const {
    const auto& f = ctx_.cfg.fast;
    const PlantParams& p = *ctx_.p;
    const int N = horizon_;
    const int m = static_cast<int>(sub_.inputs.size());
    const int nu = N * m;
    const int n = 2 * nu;
    const InputVec range = input_range(p);
    const Background bg = fast_background(ctx_, g_siblings, index_, N, board, s);
    const FastCost fc{ctx_, sub_, bg, board, s.xi, range};

    const Eigen::MatrixXd prev_iter = fit_length(board.u[index_], N);
    const Eigen::MatrixXd prev_pred = fit_length(board.u_pred[index_], N);

    Eigen::VectorXd lb(n), ub(n), x0(n);
    std::vector<std::vector<bool>> tog(m, std::vector<bool>(N));
    for (int i = 0; i < N; ++i) {
        InputVec lo, hi;
        gated_bounds(bg.z[i], p, lo, hi);
        for (int a = 0; a < m; ++a) {
            const int k = sub_.inputs[a];
            const double l = lo(k) / range(k), u = hi(k) / range(k);
            const bool t = toggled(k, bg.z[i], i == 0 ? s.z_last : bg.z[i - 1]) || toggled(k, bg.z[i], s.z_last);
            tog[a][i] = t;
            const double vi = std::clamp(prev_iter(i, a) / range(k), l, u);
            const double vp = std::clamp(prev_pred(i, a) / range(k), l, u);
            const double wc = f.du_c + (t ? ctx_.cfg.big_m : 0.0);
            const double wp = f.du_p + (t ? ctx_.cfg.big_m : 0.0);
            double lo_v = std::max({l, vi - wc, vp - wp});
            double hi_v = std::min({u, vi + wc, vp + wp});
            if (lo_v > hi_v) lo_v = hi_v = std::clamp(vi, l, u);
            lb(i * m + a) = lo_v;
            ub(i * m + a) = hi_v;
            x0(i * m + a) = std::clamp(vi, lo_v, hi_v);
            // Slack starts at the smallest value meeting the reference neighbourhood.
            const double d = x0(i * m + a) - board.u_ref(k) / range(k);
            x0(nu + i * m + a) = d > f.du_s ? f.du_s - d : d < -f.du_s ? -f.du_s - d : 0.0;
            lb(nu + i * m + a) = -2.0;
            ub(nu + i * m + a) = 2.0;
        }
    }

    auto decode = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd U(N, m);
        for (int i = 0; i < N; ++i)
            for (int a = 0; a < m; ++a) U(i, a) = v(i * m + a) * range(sub_.inputs[a]);
        return U;
    };
    Shooting shoot(
        n, nu, 0, fc.residuals(),
        [&](const Eigen::VectorXd& v, double& J, Eigen::VectorXd&, Eigen::VectorXd& r) {
            J = fc(decode(v), nullptr, &r);
        },
        Eigen::VectorXd::Constant(nu, f.r2));
    NlpProblem prob = shoot.problem(lb, ub, x0);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int a = 0; a < m; ++a) {
        const int k = sub_.inputs[a];
        add_rate_rows(rows, rhs, n, m, a, N, s.u_last(k) / range(k), f.du_rate, tog[a], ctx_.cfg.big_m);
        // Slack-extended neighbourhood of the slow reference.
        for (int i = 0; i < N; ++i)
            for (int sign : {1, -1}) {
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
                r(i * m + a) = sign;
                r(nu + i * m + a) = sign;
                rows.push_back(r);
                rhs.push_back(f.du_s + sign * board.u_ref(k) / range(k));
            }
    }
    stack_rows(prob, rows, rhs);

    NlpSettings st;
    st.tol = f.tol;
    st.max_iter = f.max_iter;
    AgentSolution out;
    try {
        const NlpSolution sol = gridsyn::solve(prob, st);
        if (sol.status == NlpStatus::Infeasible) throw SolverInfeasible("fast agent infeasible");
        out.u = decode(sol.x);
        out.slack = sol.x.tail(nu);
        out.objective = fc(out.u, &out.x) + f.r2 * out.slack.squaredNorm();
        out.status = sol.status;
        out.nlp_iterations = sol.iterations;
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        out = AgentSolution();
        out.held = true;
        out.status = NlpStatus::Infeasible;
        out.u = decode(x0);
        out.slack = x0.tail(nu);
        out.x = fit_length(board.x[index_], N);
        try {
            out.objective = fc(out.u, &out.x) + f.r2 * out.slack.squaredNorm();
        } catch (const Error& e2) {
            if (!recoverable(e2)) throw;
            out.objective = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

CoordinationResult coordinate_fast(const std::vector<FastAgent>& agents, ExchangeBoard& board, const FastSample& s,
                                   const FastConfig& cfg) {
    SiblingScope scope(&agents);
    const size_t na = agents.size();
    if (board.u.size() != na || board.x.size() != na || board.u_pred.size() != na)
        throw ConfigError("exchange board does not match the agent set");
    CoordinationResult r;
    r.u = s.u_last;
    std::vector<double> prev(na, 0.0);
    const double w = cfg.relax > 0 ? cfg.relax : 1.0 / static_cast<double>(na);
    for (int c = 1; c <= cfg.c_max; ++c) {
        board.iteration = c;
        std::vector<AgentSolution> sols;
        sols.reserve(na);
        // Every agent sees the plans of iteration c-1; the board is updated afterwards.
        for (const FastAgent& a : agents) sols.push_back(a.solve(board, s));
        std::vector<double> J(na);
        bool converged = c >= 2;
        int holds = 0;
        for (size_t j = 0; j < na; ++j) {
            if (w < 1 && !sols[j].held) {
                // Convex combination with the previous iterate; the agent's
                // constraint set is convex and holds both points.
                sols[j].u = w * sols[j].u + (1 - w) * board.u[j];
                sols[j].x = w * sols[j].x + (1 - w) * fit_length(board.x[j], static_cast<int>(sols[j].x.rows()));
                sols[j].objective = agents[j].cost(board, s, sols[j].u) + cfg.r2 * sols[j].slack.squaredNorm();
            }
        }
        for (size_t j = 0; j < na; ++j) {
            board.u[j] = sols[j].u;
            board.x[j] = sols[j].x;
            J[j] = sols[j].objective;
            holds += sols[j].held ? 1 : 0;
            r.nlp_iterations += sols[j].nlp_iterations;
            if (c >= 2) {
                const double denom = std::max({std::abs(prev[j]), cfg.j_floor, 1e-12});
                if (!(std::abs(J[j] - prev[j]) / denom <= cfg.psi)) converged = false;
            }
        }
        r.J_history.push_back(J);
        r.iterations = c;
        r.solutions = std::move(sols);
        r.holds = holds;
        prev = J;
        if (converged) break;
    }
    r.J = prev;
    for (size_t j = 0; j < na; ++j) {
        const FastSubsystem& sub = agents[j].subsystem();
        for (size_t a = 0; a < sub.inputs.size(); ++a) r.u(sub.inputs[a]) = board.u[j](0, a);
    }
    return r;
}

// ---- trackers ------------------------------------------------------------------

Tracker::Tracker(const ControlContext& ctx, std::vector<int> states, std::vector<int> inputs, int horizon)
    : ctx_(ctx), states_(std::move(states)), inputs_(std::move(inputs)), horizon_(horizon) {
    if (horizon < 1) throw ConfigError("tracker horizon must be positive");
}

AgentSolution Tracker::solve(const FastSample& s, const InputVec& u_ref, const StateVec& x_ref) const {
    const auto& sc = ctx_.cfg.sup;
    const double dt = ctx_.cfg.fast.dt;
    const PlantParams& p = *ctx_.p;
    const int N = horizon_;
    const int m = static_cast<int>(inputs_.size());
    const int n = N * m;
    const InputVec range = input_range(p);

    // No communication: others are held at their measured and last applied values.
    Background bg;
    for (int i = 0; i <= N; ++i) bg.x.push_back(s.x);
    for (int i = 0; i < N; ++i) {
        const double ti = s.t + i * dt;
        bg.u.push_back(s.u_last);
        bg.t.push_back(ti);
        bg.z.push_back(ctx_.sched->z_at(ti));
        bg.w.push_back(biased_forecast(*ctx_.prof, s.t, s.w, ti + 0.5 * dt));
        bg.y_eb.push_back(ctx_.sched->y_eb_at(ti));
    }

    auto decode = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd U(N, m);
        for (int i = 0; i < N; ++i)
            for (int a = 0; a < m; ++a) U(i, a) = v(i * m + a) * range(inputs_[a]);
        return U;
    };
    const int n_res = N * static_cast<int>(states_.size() + inputs_.size());
    auto cost = [&](const Eigen::MatrixXd& U, Eigen::MatrixXd* x_out, Eigen::VectorXd* res) {
        std::vector<InputVec> u_full;
        const std::vector<StateVec> xs = simulate_own(p, states_, inputs_, bg, U, dt, ctx_.cfg.fast.substeps, u_full);
        double J = 0;
        int q = 0;
        for (int i = 0; i < N; ++i) {
            for (int k : states_) {
                const double d = (xs[i](k) - x_ref(k)) / state_scale(p, k);
                J += sc.q_x * d * d;
                if (res) (*res)(q++) = std::sqrt(sc.q_x) * d;
            }
            for (int a : inputs_) {
                const double d = (u_full[i](a) - u_ref(a)) / range(a);
                J += sc.r_u * d * d;
                if (res) (*res)(q++) = std::sqrt(sc.r_u) * d;
            }
        }
        if (x_out) {
            x_out->resize(N, static_cast<Eigen::Index>(states_.size()));
            for (int i = 0; i < N; ++i)
                for (size_t k = 0; k < states_.size(); ++k) (*x_out)(i, k) = xs[i](states_[k]);
        }
        return J;
    };

    Eigen::VectorXd lb(n), ub(n), x0(n);
    std::vector<std::vector<bool>> tog(m, std::vector<bool>(N));
    for (int i = 0; i < N; ++i) {
        InputVec lo, hi;
        gated_bounds(bg.z[i], p, lo, hi);
        for (int a = 0; a < m; ++a) {
            const int k = inputs_[a];
            lb(i * m + a) = lo(k) / range(k);
            ub(i * m + a) = hi(k) / range(k);
            x0(i * m + a) = std::clamp(u_ref(k) / range(k), lb(i * m + a), ub(i * m + a));
            tog[a][i] = toggled(k, bg.z[i], i == 0 ? s.z_last : bg.z[i - 1]);
        }
    }
    Shooting shoot(
        n, n, 0, n_res,
        [&](const Eigen::VectorXd& v, double& J, Eigen::VectorXd&, Eigen::VectorXd& r) {
            J = cost(decode(v), nullptr, &r);
        },
        Eigen::VectorXd());
    NlpProblem prob = shoot.problem(lb, ub, x0);
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int a = 0; a < m; ++a)
        add_rate_rows(rows, rhs, n, m, a, N, s.u_last(inputs_[a]) / range(inputs_[a]), sc.du_rate, tog[a],
                      ctx_.cfg.big_m);
    stack_rows(prob, rows, rhs);
    // Start from a rate-feasible ramp toward the reference.
    for (int a = 0; a < m; ++a) {
        double prev = s.u_last(inputs_[a]) / range(inputs_[a]);
        for (int i = 0; i < N; ++i) {
            const double w = sc.du_rate * 0.999 + (tog[a][i] ? ctx_.cfg.big_m : 0.0);
            double v = std::clamp(x0(i * m + a), prev - w, prev + w);
            v = std::clamp(v, lb(i * m + a), ub(i * m + a));
            prob.x0(i * m + a) = v;
            prev = v;
        }
    }

    NlpSettings st;
    st.tol = sc.tol;
    st.max_iter = sc.max_iter;
    AgentSolution out;
    try {
        const NlpSolution sol = gridsyn::solve(prob, st);
        if (sol.status == NlpStatus::Infeasible) throw SolverInfeasible("tracker infeasible");
        out.u = decode(sol.x);
        out.objective = cost(out.u, &out.x, nullptr);
        out.status = sol.status;
        out.nlp_iterations = sol.iterations;
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        out = AgentSolution();
        out.held = true;
        out.status = NlpStatus::Infeasible;
        out.u = Eigen::MatrixXd(N, m);
        for (int i = 0; i < N; ++i)
            for (int a = 0; a < m; ++a) out.u(i, a) = s.u_last(inputs_[a]);
        out.x = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(states_.size()));
        out.objective = std::numeric_limits<double>::infinity();
    }
    return out;
}

// ---- controllers ---------------------------------------------------------------

namespace {

class DempcController : public Controller {
public:
    DempcController(const ControlContext& ctx, const SubsystemSpec& spec) : ctx_(ctx), slow_(ctx_) {
        const auto& h = ctx_.cfg.fast.horizons;
        for (size_t j = 0; j < spec.fast.size(); ++j) {
            const int N = h.empty() ? 10 : h[std::min(j, h.size() - 1)];
            agents_.emplace_back(ctx_, static_cast<int>(j), spec.fast[j], N);
        }
        if (agents_.empty()) throw ConfigError("distributed controller needs at least one fast subsystem");
    }

    std::string name() const override { return "p1"; }

    void reset(const StateVec& x0, const InputVec& u0) override {
        board_ = ExchangeBoard();
        for (const FastAgent& a : agents_) {
            const FastSubsystem& sub = a.subsystem();
            Eigen::MatrixXd u(a.horizon(), sub.inputs.size()), x(a.horizon(), sub.states.size());
            for (int i = 0; i < a.horizon(); ++i) {
                for (size_t k = 0; k < sub.inputs.size(); ++k) u(i, k) = u0(sub.inputs[k]);
                for (size_t k = 0; k < sub.states.size(); ++k) x(i, k) = x0(sub.states[k]);
            }
            board_.u.push_back(u);
            board_.x.push_back(x);
            board_.u_pred.push_back(u);
        }
        board_.u_ref = u0;
        board_.x_ref = x0;
        board_.x_frozen = x0;
        board_.u_frozen = u0;
        have_slow_ = false;
    }

    InputVec step(const FastSample& s, bool slow_sample, StepInfo& info) override {
        if (slow_sample || !have_slow_) {
            const SlowResult r = slow_.solve(s.t, s.x, s.u_last, s.w, s.xi);
            board_.u_ref = r.u.front();
            board_.x_ref = r.x.front();
            board_.x_frozen = s.x;
            board_.u_frozen = r.u.front();
            have_slow_ = true;
            info.slow_ran = true;
            info.slow_held = r.held;
            info.slow = r;
        }
        // Iteration-0 plans are the previous sample's predictions.
        for (size_t j = 0; j < agents_.size(); ++j) board_.u_pred[j] = board_.u[j];
        const CoordinationResult c = coordinate_fast(agents_, board_, s, ctx_.cfg.fast);
        InputVec u = board_.u_frozen;
        for (const FastAgent& a : agents_)
            for (int k : a.subsystem().inputs) u(k) = c.u(k);
        info.iterations = c.iterations;
        info.holds = c.holds;
        info.nlp_iterations = c.nlp_iterations;
        info.agent_objectives = c.J;
        for (const AgentSolution& a : c.solutions) {
            info.agent_status.push_back(a.status);
            info.agent_slack.push_back(a.slack.size() ? a.slack.cwiseAbs().maxCoeff() : 0.0);
        }
        for (const auto& J : c.J_history) {
            double sum = 0;
            for (double v : J) sum += v;
            info.joint_history.push_back(sum);
        }
        info.fast_objective = 0;
        for (double J : c.J) info.fast_objective += J;
        for (size_t j = 0; j < agents_.size(); ++j) {
            board_.u[j] = shift_hold(board_.u[j]);
            board_.x[j] = shift_hold(board_.x[j]);
        }
        return u;
    }

private:
    ControlContext ctx_;
    SlowEmpc slow_;
    std::vector<FastAgent> agents_;
    ExchangeBoard board_;
    bool have_slow_ = false;
};

class SupervisoryController : public Controller {
public:
    SupervisoryController(const ControlContext& ctx, const SubsystemSpec& spec, std::string name)
        : ctx_(ctx), high_(ctx_), name_(std::move(name)) {
        auto add = [&](const std::vector<int>& xs, const std::vector<int>& us) {
            if (us.empty()) return;
            const bool long_h = std::find(us.begin(), us.end(), static_cast<int>(su::G_fm)) != us.end();
            trackers_.emplace_back(ctx_, xs, us, long_h ? ctx_.cfg.sup.horizon_long : ctx_.cfg.sup.horizon_short);
        };
        add(spec.slow_states, spec.slow_inputs);
        for (const FastSubsystem& f : spec.fast) add(f.states, f.inputs);
        if (trackers_.empty()) throw ConfigError("supervisory controller needs at least one subsystem");
    }

    std::string name() const override { return name_; }

    void reset(const StateVec& x0, const InputVec& u0) override {
        u_ref_ = u0;
        x_ref_ = x0;
        have_ref_ = false;
    }

    InputVec step(const FastSample& s, bool slow_sample, StepInfo& info) override {
        if (slow_sample || !have_ref_) {
            const SlowResult r = high_.solve(s.t, s.x, s.u_last, s.w, s.xi);
            u_ref_ = r.u.front();
            x_ref_ = r.x.front();
            have_ref_ = true;
            info.slow_ran = true;
            info.slow_held = r.held;
            info.slow = r;
        }
        InputVec u = u_ref_;
        info.fast_objective = 0;
        info.holds = 0;
        for (const Tracker& t : trackers_) {
            const AgentSolution sol = t.solve(s, u_ref_, x_ref_);
            for (size_t a = 0; a < t.inputs().size(); ++a) u(t.inputs()[a]) = sol.u(0, a);
            info.holds += sol.held ? 1 : 0;
            info.nlp_iterations += sol.nlp_iterations;
            info.agent_objectives.push_back(sol.objective);
            info.agent_status.push_back(sol.status);
            info.agent_slack.push_back(0.0);
            info.fast_objective += sol.objective;
        }
        info.iterations = 1;
        return u;
    }

private:
    ControlContext ctx_;
    SlowEmpc high_;
    std::vector<Tracker> trackers_;
    std::string name_;
    InputVec u_ref_;
    StateVec x_ref_;
    bool have_ref_ = false;
};

}  // namespace

std::unique_ptr<Controller> make_dempc(const ControlContext& ctx, const SubsystemSpec& spec) {
    return std::make_unique<DempcController>(ctx, spec);
}

std::unique_ptr<Controller> make_supervisory(const ControlContext& ctx, const SubsystemSpec& spec,
                                             const std::string& name) {
    return std::make_unique<SupervisoryController>(ctx, spec, name);
}

}  // namespace gridsyn
