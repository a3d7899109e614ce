#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsyn/closed_loop.hpp"
#include "gridsyn/decomp.hpp"
#include "gridsyn/empc.hpp"
#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/plant.hpp"

#include <cmath>
#include <sstream>

using namespace gridsyn;

namespace {

const PlantParams& params() {
    static const PlantParams p;
    return p;
}

const Decomposition& decomposition() {
    static const Decomposition d = decompose(params(), DecompConfig{});
    return d;
}

// The reference equilibrium held over the whole day: constant weather, the
// equilibrium export as commitment and the equilibrium as storage plan.
struct Steady {
    OperatingPoint ref = reference_equilibrium(params());
    Profile prof;
    Schedule sched;
    PriceBook prices;
    ControlContext ctx;

    explicit Steady(const EmpcConfig& cfg = {}, double band_lo = 23, double band_hi = 25) {
        for (int c = 0; c < kNw; ++c) {
            prof.day_ahead[c].assign(kHours, ref.w(c));
            prof.real_time[c].assign(kMinutes, ref.w(c));
        }
        const double y1 = outputs(ref.x, ref.u, ref.z, ref.w, params())(sy::P_sl);
        sched.y_eb.assign(kHours, y1);
        sched.z.assign(kHours, ref.z);
        sched.u.assign(kHours, ref.u);
        sched.x.assign(kHours + 1, ref.x);
        sched.t_br.assign(kHours, ref.x(sx::t_br));
        sched.fallback.assign(kHours, false);
        ctx.p = &params();
        ctx.cfg = cfg;
        ctx.sched = &sched;
        ctx.prof = &prof;
        ctx.prices = &prices;
        ctx.band_lo = band_lo;
        ctx.band_hi = band_hi;
        ctx.slow_states = decomposition().split->slow_states;
        ctx.fast_states = decomposition().split->fast_states;
    }
    Steady(const Steady&) = delete;

    FastSample sample(double t = 12 * 3600.0) const {
        FastSample s;
        s.t = t;
        s.x = ref.x;
        s.w = ref.w;
        s.xi = 0;
        s.u_last = ref.u;
        s.z_last = ref.z;
        return s;
    }
};

// Input deviation normalised by the input range, largest component.
double normalised_gap(const InputVec& a, const InputVec& b) {
    const InputVec r = input_range(params());
    double worst = 0;
    for (int i = 0; i < kNu; ++i)
        if (r(i) > 0) worst = std::max(worst, std::abs(a(i) - b(i)) / r(i));
    return worst;
}

ExchangeBoard board_at(const std::vector<FastAgent>& agents, const StateVec& x, const InputVec& u) {
    ExchangeBoard b;
    for (const FastAgent& a : agents) {
        const FastSubsystem& sub = a.subsystem();
        Eigen::MatrixXd um(a.horizon(), sub.inputs.size()), xm(a.horizon(), sub.states.size());
        for (int i = 0; i < a.horizon(); ++i) {
            for (size_t k = 0; k < sub.inputs.size(); ++k) um(i, k) = u(sub.inputs[k]);
            for (size_t k = 0; k < sub.states.size(); ++k) xm(i, k) = x(sub.states[k]);
        }
        b.u.push_back(um);
        b.x.push_back(xm);
        b.u_pred.push_back(um);
    }
    b.u_ref = u;
    b.x_ref = x;
    b.x_frozen = x;
    b.u_frozen = u;
    return b;
}

std::vector<FastAgent> agents_for(const ControlContext& ctx) {
    std::vector<FastAgent> out;
    const SubsystemSpec& spec = *decomposition().subsystems;
    for (size_t j = 0; j < spec.fast.size(); ++j)
        out.emplace_back(ctx, static_cast<int>(j), spec.fast[j], ctx.cfg.fast.horizons[j]);
    return out;
}

}  // namespace

TEST_CASE("slow layer at the equilibrium keeps the equilibrium inputs") {
    EmpcConfig cfg;
    cfg.slow.alpha3 = 0;   // tracking only
    Steady st(cfg);
    SlowEmpc slow(st.ctx);
    const FastSample s = st.sample();
    const SlowResult r = slow.solve(s.t, s.x, s.u_last, s.w, 0.0);
    REQUIRE(r.u.size() == static_cast<size_t>(cfg.slow.horizon));
    CHECK_FALSE(r.held);
    for (int k : decomposition().split->slow_inputs) {
        INFO("input " << k);
        CHECK(std::abs(r.u.front()(k) - st.ref.u(k)) <= 0.01 * input_range(params())(k));
    }
    CHECK(r.J[0] + r.J[1] + r.J[3] <= 1e-3);
    CHECK(std::abs(r.y_sp.front() - st.ref.x(sx::t_br)) <= 0.01);
}

TEST_CASE("slow layer respects unit gating") {
    Steady st;
    for (IntVec& z : st.sched.z) z(sz::ec) = 0;
    SlowEmpc slow(st.ctx);
    const FastSample s = st.sample();
    const SlowResult r = slow.solve(s.t, s.x, s.u_last, s.w, 0.0);
    CHECK_FALSE(r.held);
    for (const InputVec& u : r.u) {
        CHECK(u(su::N_ec) == 0.0);
        CHECK(u(su::G_ec) == 0.0);
    }
}

TEST_CASE("cheap cooling at the upper edge pushes the setpoint there") {
    Steady st(EmpcConfig{}, 22, 26);
    SlowEmpc slow(st.ctx);
    FastSample s = st.sample();
    s.x(sx::t_br) = 25.95;
    const SlowResult r = slow.solve(s.t, s.x, s.u_last, s.w, 0.0);
    REQUIRE_FALSE(r.y_sp.empty());
    CHECK(std::abs(r.y_sp.back() - 26.0) <= 0.1);
    for (double y : r.y_sp) CHECK(y <= 26.0);
}

TEST_CASE("plan evaluation agrees with the solver's breakdown") {
    Steady st;
    SlowEmpc slow(st.ctx);
    const FastSample s = st.sample();
    const SlowResult r = slow.solve(s.t, s.x, s.u_last, s.w, 0.0);
    SlowResult parts;
    const double J = slow.evaluate_plan(s.t, s.x, s.u_last, s.w, 0.0, r.u, r.y_sp, &parts);
    CHECK(J == doctest::Approx(r.objective).epsilon(1e-12));
    CHECK(J == doctest::Approx(parts.J[0] + parts.J[1] + parts.J[2] + parts.J[3]).epsilon(1e-12));
    CHECK_THROWS_AS(slow.evaluate_plan(s.t, s.x, s.u_last, s.w, 0.0, {}, {}, nullptr), ConfigError);
}

TEST_CASE("fast agents at the equilibrium") {
    Steady st;
    const std::vector<FastAgent> agents = agents_for(st.ctx);
    REQUIRE(agents.size() == 3);
    const FastSample s = st.sample();
    const ExchangeBoard b = board_at(agents, st.ref.x, st.ref.u);
    for (const FastAgent& a : agents) {
        INFO("agent " << a.index());
        const AgentSolution sol = a.solve(b, s);
        CHECK_FALSE(sol.held);
        CHECK(sol.u.rows() == a.horizon());
        for (size_t k = 0; k < a.subsystem().inputs.size(); ++k) {
            const int in = a.subsystem().inputs[k];
            CHECK(std::abs(sol.u(0, k) - st.ref.u(in)) <= 0.02 * input_range(params())(in));
        }
        CHECK(sol.slack.cwiseAbs().maxCoeff() <= 1e-3);
    }
}

TEST_CASE("zero iteration neighbourhood pins the plan") {
    EmpcConfig cfg;
    cfg.fast.du_c = 0;
    Steady st(cfg);
    const std::vector<FastAgent> agents = agents_for(st.ctx);
    InputVec u = st.ref.u;
    u(su::G_ff) *= 0.9;
    u(su::N_ec) *= 1.05;
    const ExchangeBoard b = board_at(agents, st.ref.x, u);
    const FastSample s = st.sample();
    for (size_t j = 0; j < agents.size(); ++j) {
        INFO("agent " << j);
        const AgentSolution sol = agents[j].solve(b, s);
        CHECK((sol.u - b.u[j]).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("fuel cell off forces its input to zero") {
    Steady st;
    for (IntVec& z : st.sched.z) z(sz::fc) = 0;
    const std::vector<FastAgent> agents = agents_for(st.ctx);
    InputVec u = st.ref.u;
    u(su::G_ff) = 0;
    const ExchangeBoard b = board_at(agents, st.ref.x, u);
    FastSample s = st.sample();
    s.z_last(sz::fc) = 0;
    s.u_last(su::G_ff) = 0;
    bool found = false;
    for (size_t j = 0; j < agents.size(); ++j) {
        const auto& ins = agents[j].subsystem().inputs;
        for (size_t k = 0; k < ins.size(); ++k)
            if (ins[k] == su::G_ff) {
                found = true;
                const AgentSolution sol = agents[j].solve(b, s);
                CHECK(sol.u.col(k).cwiseAbs().maxCoeff() == 0.0);
            }
    }
    CHECK(found);
}

TEST_CASE("coordination iteration counts") {
    SUBCASE("a cap of one runs exactly once") {
        EmpcConfig cfg;
        cfg.fast.c_max = 1;
        cfg.fast.psi = 1e-12;
        Steady st(cfg);
        const std::vector<FastAgent> agents = agents_for(st.ctx);
        ExchangeBoard b = board_at(agents, st.ref.x, st.ref.u);
        InputVec u = st.ref.u;
        FastSample s = st.sample();
        s.xi = 0.2;   // far from converged
        const CoordinationResult c = coordinate_fast(agents, b, s, cfg.fast);
        CHECK(c.iterations == 1);
        CHECK(c.J_history.size() == 1);
        (void)u;
    }
    SUBCASE("the equilibrium settles on the second pass") {
        Steady st;
        const std::vector<FastAgent> agents = agents_for(st.ctx);
        ExchangeBoard b = board_at(agents, st.ref.x, st.ref.u);
        const CoordinationResult c = coordinate_fast(agents, b, st.sample(), st.ctx.cfg.fast);
        CHECK(c.iterations == 2);
    }
    SUBCASE("never beyond the cap") {
        EmpcConfig cfg;
        cfg.fast.psi = 1e-12;
        cfg.fast.c_max = 4;
        Steady st(cfg);
        const std::vector<FastAgent> agents = agents_for(st.ctx);
        ExchangeBoard b = board_at(agents, st.ref.x, st.ref.u);
        FastSample s = st.sample();
        s.xi = 0.25;
        const CoordinationResult c = coordinate_fast(agents, b, s, cfg.fast);
        CHECK(c.iterations >= 1);
        CHECK(c.iterations <= 4);
    }
}

TEST_CASE("applied input is the head of the final sequences") {
    Steady st;
    const std::vector<FastAgent> agents = agents_for(st.ctx);
    ExchangeBoard b = board_at(agents, st.ref.x, st.ref.u);
    FastSample s = st.sample();
    s.xi = 0.1;
    const CoordinationResult c = coordinate_fast(agents, b, s, st.ctx.cfg.fast);
    for (size_t j = 0; j < agents.size(); ++j)
        for (size_t k = 0; k < agents[j].subsystem().inputs.size(); ++k)
            CHECK(c.u(agents[j].subsystem().inputs[k]) == b.u[j](0, k));
}

TEST_CASE("tracker at its reference does not move") {
    Steady st;
    const SubsystemSpec& spec = *decomposition().subsystems;
    const FastSample s = st.sample();
    for (const FastSubsystem& f : spec.fast) {
        const Tracker t(st.ctx, f.states, f.inputs, 10);
        const AgentSolution sol = t.solve(s, st.ref.u, st.ref.x);
        for (size_t k = 0; k < f.inputs.size(); ++k)
            CHECK(std::abs(sol.u(0, k) - st.ref.u(f.inputs[k])) <= 1e-6 * std::max(1.0, input_range(params())(f.inputs[k])));
    }
}

TEST_CASE("supervisory baseline at the equilibrium") {
    EmpcConfig cfg;
    cfg.slow.alpha3 = 0;
    Steady st(cfg);
    auto ctrl = make_supervisory(st.ctx, *decomposition().subsystems, "p2");
    ctrl->reset(st.ref.x, st.ref.u);
    StepInfo info;
    const InputVec u = ctrl->step(st.sample(), true, info);
    CHECK(info.slow_ran);
    CHECK(normalised_gap(u, st.ref.u) <= 0.01);
}

TEST_CASE("helpers") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    Eigen::MatrixXd shifted(3, 2);
    shifted << 3, 4, 5, 6, 5, 6;
    CHECK(shift_hold(m) == shifted);
    CHECK(fit_length(m, 2) == m.topRows(2));
    Eigen::MatrixXd longer(4, 2);
    longer << 1, 2, 3, 4, 5, 6, 5, 6;
    CHECK(fit_length(m, 4) == longer);
}

TEST_CASE("controller settings file") {
    EmpcConfig c;
    c.slow.alpha2 = 321;
    c.fast.c_max = 7;
    c.fast.horizons = {8, 9, 10};
    c.sup.horizon_long = 15;
    KvFile kv;
    empc_config_to_kv(c, kv);
    std::stringstream ss;
    kv.set_header("t");
    kv.write(ss);
    const EmpcConfig back = empc_config_from_kv(KvFile::parse(ss, "t"));
    CHECK(back.slow.alpha2 == 321);
    CHECK(back.fast.c_max == 7);
    CHECK(back.fast.horizons == c.fast.horizons);
    CHECK(back.sup.horizon_long == 15);

    auto parse = [](const std::string& text) {
        std::stringstream in("t\n" + text);
        return empc_config_from_kv(KvFile::parse(in, "t"));
    };
    CHECK_THROWS_AS(parse("fast.c_max = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("fast.psi = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("slow.alpha1 = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("slow.dt = 7\n"), ConfigError);
    CHECK_NOTHROW(parse(""));
}
