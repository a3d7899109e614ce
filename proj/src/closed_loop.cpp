#include "gridsyn/closed_loop.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/reduced.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace gridsyn {

ScenarioData prepare_scenario(const PlantParams& p, const ScenarioConfig& sc) {
    ScenarioData d;
    d.profile = generate_profiles(sc.profile, sc.seed);
    d.regulation = generate_regulation(sc.capacity, sc.regulation_pattern, sc.seed);
    if (sc.constant_conditions) {
        const DistVec w0 = d.profile.actual(sc.start);
        for (int c = 0; c < kNw; ++c) {
            std::fill(d.profile.day_ahead[c].begin(), d.profile.day_ahead[c].end(), w0(c));
            std::fill(d.profile.real_time[c].begin(), d.profile.real_time[c].end(), w0(c));
        }
    }
    d.schedule = day_ahead(d.profile, sc.prices, p, sc.day_ahead);
    if (sc.constant_conditions) {
        const int h0 = std::clamp(static_cast<int>(sc.start / 3600.0), 0, kHours - 1);
        const StateVec x0 = d.schedule.state_at(sc.start);
        Schedule& s = d.schedule;
        for (int h = 0; h < kHours; ++h) {
            s.y_eb[h] = s.y_eb[h0];
            s.z[h] = s.z[h0];
            s.u[h] = s.u[h0];
            s.t_br[h] = s.t_br[h0];
        }
        std::fill(s.x.begin(), s.x.end(), x0);
    }
    if (sc.xi_step_time >= 0) {
        // A step from zero to xi_step_value at start + xi_step_time.
        auto& rt = d.regulation.real_time;
        rt.assign(kMinutes, 0.0);
        for (int m = 0; m < kMinutes; ++m)
            if (m * 60.0 >= sc.start + sc.xi_step_time) rt[m] = sc.xi_step_value;
        std::fill(d.regulation.day_ahead.begin(), d.regulation.day_ahead.end(), 0.0);
    }
    return d;
}

std::unique_ptr<Controller> make_controller(const std::string& id, const ControlContext& ctx,
                                            const Decomposition& d) {
    if (id == "p1" || id == "p2") {
        if (!d.subsystems) throw CardinalityMismatch("decomposition has no subsystems: " + d.subsystem_note);
        return id == "p1" ? make_dempc(ctx, *d.subsystems) : make_supervisory(ctx, *d.subsystems, id);
    }
    if (id == "p3") return make_supervisory(ctx, unit_partition(d.a_e), id);
    if (id == "p4") return make_supervisory(ctx, carrier_partition(d.a_e), id);
    throw ConfigError("unknown controller '" + id + "' (expected p1, p2, p3 or p4)");
}

RunResult run_closed_loop(const PlantParams& p, const ScenarioConfig& sc, const EmpcConfig& ec,
                          const Decomposition& d, const std::function<void(const LogRow&)>& on_row) {
    const auto wall0 = std::chrono::steady_clock::now();
    if (!d.split) throw NoScaleGap("closed loop needs a time-scale split: " + d.split_note);
    const long per_slow = std::lround(sc.dt_slow / sc.dt_fast);
    if (per_slow < 1 || std::abs(per_slow * sc.dt_fast - sc.dt_slow) > 1e-9)
        throw ConfigError("slow step must be a multiple of the fast step");
    if (std::abs(ec.fast.dt - sc.dt_fast) > 1e-9 || std::abs(ec.slow.dt - sc.dt_slow) > 1e-9)
        throw ConfigError("controller steps differ from the scenario sampling");

    RunResult r;
    r.controller = sc.controller;
    r.scenario = sc;
    ScenarioData data = prepare_scenario(p, sc);
    r.profile = std::move(data.profile);
    r.regulation = std::move(data.regulation);
    r.schedule = std::move(data.schedule);

    ControlContext ctx;
    ctx.p = &p;
    ctx.cfg = ec;
    ctx.sched = &r.schedule;
    ctx.prof = &r.profile;
    ctx.prices = &sc.prices;
    ctx.band_lo = sc.day_ahead.band_lo;
    ctx.band_hi = sc.day_ahead.band_hi;
    ctx.slow_states = d.split->slow_states;
    ctx.fast_states = d.split->fast_states;
    std::unique_ptr<Controller> ctrl = make_controller(sc.controller, ctx, d);

    // Planned slow states with the fast states at quasi-steady state.
    const int h0 = std::clamp(static_cast<int>(sc.start / 3600.0), 0, kHours - 1);
    InputVec u = r.schedule.u[h0];
    IntVec z = r.schedule.z_at(sc.start);
    StateVec x;
    {
        QssSolver qss(p, ctx.fast_states);
        x = qss.solve(r.schedule.state_at(sc.start), u, z, r.profile.actual(sc.start));
    }
    ctrl->reset(x, u);

    ScenarioLog& log = r.log;
    log.dt = sc.dt_fast;
    log.t0 = sc.start;
    log.duration = sc.duration;
    const long samples = std::lround(sc.duration / sc.dt_fast);
    log.rows.reserve(samples);
    try {
        for (long k = 0; k < samples; ++k) {
            const double t = sc.start + k * sc.dt_fast;
            FastSample s;
            s.t = t;
            s.x = x;
            s.w = r.profile.actual(t);
            s.xi = r.regulation.at(t);
            s.u_last = u;
            s.z_last = z;
            StepInfo info;
            const bool slow = k % per_slow == 0;
            InputVec u_new = ctrl->step(s, slow, info);
            z = r.schedule.z_at(t);
            InputVec lo, hi;
            gated_bounds(z, p, lo, hi);
            u = u_new.cwiseMax(lo).cwiseMin(hi);

            x = advance(x, u, z, s.w, sc.dt_fast, p, sc.dt_plant);
            LogRow row;
            row.t = t;
            row.u = u;
            row.x = x;
            row.w = s.w;
            row.y = outputs(x, u, z, s.w, p);
            row.y_eb = r.schedule.y_eb_at(t);
            row.xi = s.xi;
            row.band_lo = sc.day_ahead.band_lo;
            row.band_hi = sc.day_ahead.band_hi;
            row.iterations = info.iterations;
            row.holds = info.holds;
            row.fast_objective = info.fast_objective;
            log.rows.push_back(row);
            if (slow) log.slow_holds.push_back(info.slow_held);
            r.powers.push_back(unit_powers(x, u, z, s.w, p));

            ControlRecord cr;
            cr.t = t;
            cr.u = u;
            cr.iterations = info.iterations;
            cr.holds = info.holds;
            cr.nlp_iterations = info.nlp_iterations;
            cr.agent_objectives = std::move(info.agent_objectives);
            cr.agent_status = std::move(info.agent_status);
            cr.agent_slack = std::move(info.agent_slack);
            cr.joint_history = std::move(info.joint_history);
            cr.slow_ran = info.slow_ran;
            cr.slow_held = info.slow_held;
            if (info.slow_ran) cr.slow = std::move(info.slow);
            r.control.push_back(std::move(cr));
            if (on_row) on_row(row);
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Model) throw;
        r.failed = true;
        r.failure = e.what();
    }
    if (!r.failed) r.report = evaluate(log, r.schedule, sc.prices, p);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return r;
}

}  // namespace gridsyn
