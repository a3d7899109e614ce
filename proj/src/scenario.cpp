#include "gridsyn/scenario.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/nlp.hpp"
#include "gridsyn/plant.hpp"
#include "gridsyn/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

namespace gridsyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_day(double t) {
    double r = std::fmod(t, kDay);
    return r < 0 ? r + kDay : r;
}

int hour_of(double t) { return std::min(kHours - 1, static_cast<int>(wrap_day(t) / 3600.0)); }

double hourly_linear(const std::vector<double>& v, double t) {
    const double h = wrap_day(t) / 3600.0;
    const int i = std::min(kHours - 1, static_cast<int>(h));
    const double f = h - i;
    return (1 - f) * v[i] + f * v[(i + 1) % kHours];
}

double bump(double h, double centre, double width) {
    double d = std::abs(h - centre);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * d * d / (width * width));
}

}  // namespace

// ---- profiles --------------------------------------------------------------

DistVec Profile::forecast(double t) const {
    DistVec w;
    for (int c = 0; c < kNw; ++c) w(c) = hourly_linear(day_ahead[c], t);
    return w;
}

DistVec Profile::actual(double t) const {
    const int m = std::min(kMinutes - 1, static_cast<int>(wrap_day(t) / 60.0));
    DistVec w;
    for (int c = 0; c < kNw; ++c) w(c) = real_time[c][m];
    return w;
}

Profile generate_profiles(const ProfileSpec& s, std::uint64_t seed) {
    if (s.sunset <= s.sunrise) throw ConfigError("profile sunset must follow sunrise");
    if (s.sigma_rel < 0 || s.clip_rel < 0) throw ConfigError("profile noise settings must be nonnegative");
    Profile p;
    p.seed = seed;
    for (auto& v : p.day_ahead) v.resize(kHours);
    for (int h = 0; h < kHours; ++h) {
        const double c = 0.5 * (1 + std::cos(2 * kPi * (h - s.ta_peak_hour) / 24.0));
        p.day_ahead[sw::t_a][h] = s.ta_min + (s.ta_max - s.ta_min) * std::max(s.ta_plateau, c);
        const double sun = (h - s.sunrise) / (s.sunset - s.sunrise);
        p.day_ahead[sw::S_ra][h] = sun > 0 && sun < 1 ? s.sra_peak * std::sin(kPi * sun) : 0.0;
        p.day_ahead[sw::P_d][h] =
            s.pd_base + s.pd_peak1 * bump(h, s.pd_hour1, s.pd_width) + s.pd_peak2 * bump(h, s.pd_hour2, s.pd_width);
        p.day_ahead[sw::Q_o][h] =
            s.qo_base + s.qo_peak1 * bump(h, s.qo_hour1, s.qo_width) + s.qo_peak2 * bump(h, s.qo_hour2, s.qo_width);
    }
    for (int c = 0; c < kNw; ++c)
        for (double& v : p.day_ahead[c])
            if (c != sw::t_a) v = std::max(0.0, v);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int c = 0; c < kNw; ++c) {
        p.real_time[c].resize(kMinutes);
        for (int m = 0; m < kMinutes; ++m) {
            const double da = hourly_linear(p.day_ahead[c], m * 60.0);
            const double e = std::clamp(s.sigma_rel * normal(rng), -s.clip_rel, s.clip_rel);
            p.real_time[c][m] = da * (1.0 + e);
        }
    }
    return p;
}

// ---- prices and regulation -------------------------------------------------

double PriceBook::se(double t) const { return p_se[hour_of(t)]; }

double PriceBook::mean_se() const { return std::accumulate(p_se.begin(), p_se.end(), 0.0) / p_se.size(); }

double RegulationSignal::at(double t) const {
    return real_time.empty() ? 0.0 : real_time[std::min(kMinutes - 1, static_cast<int>(wrap_day(t) / 60.0))];
}

double RegulationSignal::forecast(double t) const { return day_ahead.empty() ? 0.0 : day_ahead[hour_of(t)]; }

RegulationSignal generate_regulation(double capacity, const std::vector<double>& pattern, std::uint64_t seed) {
    if (capacity < 0 || capacity > 1) throw ConfigError("regulation capacity must lie in [0, 1]");
    if (static_cast<int>(pattern.size()) != kHours) throw ConfigError("regulation pattern needs 24 values");
    RegulationSignal r;
    r.capacity = capacity;
    r.day_ahead.resize(kHours);
    r.real_time.assign(kMinutes, 0.0);
    for (int h = 0; h < kHours; ++h) r.day_ahead[h] = capacity * std::clamp(pattern[h], -1.0, 1.0);
    // A separate stream from the weather so both can be reseeded independently.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int m = 0; m < kMinutes; ++m) {
        const double e = normal(rng);
        if (capacity == 0) continue;
        r.real_time[m] = std::clamp(r.day_ahead[m / 60] + capacity / 6.0 * e, -1.2 * capacity, 1.2 * capacity);
    }
    return r;
}

// ---- schedule --------------------------------------------------------------

double Schedule::y_eb_at(double t) const { return y_eb[hour_of(t)]; }

IntVec Schedule::z_at(double t) const { return z[hour_of(t)]; }

StateVec Schedule::state_at(double t) const {
    const double h = std::min(wrap_day(t) / 3600.0, static_cast<double>(kHours));
    const int i = std::min(kHours - 1, static_cast<int>(h));
    const double f = h - i;
    return (1 - f) * x[i] + f * x[i + 1];
}

double Schedule::soc_ref(double t) const { return state_at(t)(sx::C_soc); }
double Schedule::sot_ref(double t) const { return state_at(t)(sx::C_sot); }

namespace {

const std::vector<int>& slow_state_set() {
    static const std::vector<int> s = {sx::C_soc, sx::C_sot, sx::C_stc, sx::C_sth, sx::t_br};
    return s;
}

std::vector<int> fast_state_set() {
    std::vector<int> f;
    for (int i = 0; i < kNx; ++i)
        if (std::find(slow_state_set().begin(), slow_state_set().end(), i) == slow_state_set().end()) f.push_back(i);
    return f;
}

struct HourPlan {
    InputVec u;
    StateVec x;
    double y1 = 0;
    bool ok = false;
};

// Steady-state economic optimum for one hour with storage actions fixed.
HourPlan plan_hour(const PlantParams& p, const DistVec& w, const IntVec& z, const StateVec& slow_at,
                   const InputVec& fixed, const PriceBook& prices, double p_se, const DayAheadSettings& s,
                   const InputVec& guess, const InputVec& anchor) {
    InputVec lo, hi;
    gated_bounds(z, p, lo, hi);
    for (int k : {su::G_ff, su::G_fm}) {
        const double r = s.reserve * (hi(k) - lo(k));
        lo(k) += r;
        hi(k) -= r;
    }
    const int free_u[] = {su::G_ff, su::G_fm, su::G_ab, su::N_ec, su::G_ec};
    QssSolver qss(p, fast_state_set());

    auto decode = [&](const Eigen::VectorXd& v, InputVec& u, StateVec& x) {
        u = fixed;
        for (int k = 0; k < 5; ++k) u(free_u[k]) = lo(free_u[k]) + v(k) * (hi(free_u[k]) - lo(free_u[k]));
        StateVec g = slow_at;
        g(sx::t_br) = v(5);
        x = qss.solve(g, u, z, w);
    };

    NlpProblem nlp;
    nlp.n = 6;
    nlp.lb = Eigen::VectorXd::Zero(6);
    nlp.ub = Eigen::VectorXd::Ones(6);
    nlp.lb(5) = s.band_lo + s.margin;
    nlp.ub(5) = s.band_hi - s.margin;
    nlp.x0.resize(6);
    for (int k = 0; k < 5; ++k) {
        const double span = hi(free_u[k]) - lo(free_u[k]);
        nlp.x0(k) = span > 0 ? std::clamp((guess(free_u[k]) - lo(free_u[k])) / span, 0.0, 1.0) : 0.0;
        if (span <= 0) nlp.lb(k) = nlp.ub(k) = 0.0;
    }
    nlp.x0(5) = 0.5 * (s.band_lo + s.band_hi);
    // Flat directions are pulled toward a fixed anchor so identical hours plan alike.
    Eigen::VectorXd v_ref = nlp.x0;
    for (int k = 0; k < 5; ++k) {
        const double span = hi(free_u[k]) - lo(free_u[k]);
        v_ref(k) = span > 0 ? std::clamp((anchor(free_u[k]) - lo(free_u[k])) / span, 0.0, 1.0) : 0.0;
    }
    nlp.objective = [&](const Eigen::VectorXd& v) {
        InputVec u;
        StateVec x;
        decode(v, u, x);
        const double y1 = outputs(x, u, z, w, p)(sy::P_sl);
        const double revenue = p_se * y1 / 1000.0;
        const double fuel = prices.p_f * (u(su::G_ff) + u(su::G_fm)) * 3600.0;
        return -(revenue - fuel) + 1e-3 * (v.head(5) - v_ref.head(5)).squaredNorm();
    };
    nlp.eq = [&](const Eigen::VectorXd& v) {
        InputVec u;
        StateVec x;
        decode(v, u, x);
        Eigen::VectorXd c(1);
        c(0) = derivatives(x, u, z, w, p)(sx::t_br) * p.bld.c_br / 10.0;
        return c;
    };
    NlpSettings st;
    st.tol = s.tol;
    st.max_iter = 80;
    HourPlan out;
    try {
        const NlpSolution sol = solve(nlp, st);
        if (sol.status == NlpStatus::Infeasible) return out;
        decode(sol.x, out.u, out.x);
        out.y1 = outputs(out.x, out.u, z, w, p)(sy::P_sl);
        out.ok = sol.violation < 1e-4;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io) throw;
    }
    return out;
}

}  // namespace

Schedule day_ahead(const Profile& prof, const PriceBook& prices, const PlantParams& p, const DayAheadSettings& s) {
    if (static_cast<int>(prices.p_se.size()) != kHours) throw ConfigError("p_se needs 24 hourly values");
    if (!(s.band_lo + 2 * s.margin < s.band_hi)) throw ConfigError("comfort band is empty after the margin");
    const double mean = prices.mean_se();
    std::vector<int> mode(kHours, 0);   // -1 charge, +1 discharge
    int n_charge = 0, n_dis = 0;
    for (int h = 0; h < kHours; ++h) {
        if (prices.p_se[h] < s.low_price * mean) mode[h] = -1, ++n_charge;
        if (prices.p_se[h] > s.high_price * mean) mode[h] = 1, ++n_dis;
    }
    // Balanced storage use: what is charged in cheap hours is returned at peak.
    // The tank is planned by moved water so its two layers come back to the start.
    double bat_charge = 0, bat_dis = 0, tank_charge = 0, tank_dis = 0;
    if (n_charge > 0 && n_dis > 0) {
        bat_charge = std::min(s.battery_kw, s.soc_swing * p.battery_kwh() / n_charge);
        bat_dis = std::min(s.battery_kw, bat_charge * n_charge / n_dis);
        bat_charge = bat_dis * n_dis / n_charge;
        const double layers = p.nominal.x(sx::C_stc) + p.nominal.x(sx::C_sth);
        tank_charge = std::min(p.u_max(su::G_stu), s.soc_swing * layers / (p.c_w * 3600.0 * n_charge));
        tank_dis = std::min(p.u_max(su::G_stu), tank_charge * n_charge / n_dis);
        tank_charge = tank_dis * n_dis / n_charge;
    }
    Schedule sc;
    const OperatingPoint ref = reference_equilibrium(p);
    StateVec state = ref.x;
    state(sx::t_br) = 0.5 * (s.band_lo + s.band_hi);
    sc.x.push_back(state);
    InputVec guess = ref.u;
    QssSolver qss(p, fast_state_set());
    for (int h = 0; h < kHours; ++h) {
        const DistVec w = prof.forecast(h * 3600.0 + 1800.0);
        IntVec z = ref.z;
        InputVec fixed = ref.u;
        fixed(su::P_bar) = mode[h] < 0 ? -bat_charge : mode[h] > 0 ? bat_dis : 0.0;
        z(sz::st) = mode[h] < 0 ? 0 : 1;
        fixed(su::G_stu) = mode[h] < 0 ? tank_charge : mode[h] > 0 ? tank_dis : 0.0;

        // Start from the anchor so identical hours plan alike; the previous plan is the retry.
        HourPlan plan = plan_hour(p, w, z, state, fixed, prices, prices.p_se[h], s, ref.u, ref.u);
        if (!plan.ok && h > 0) plan = plan_hour(p, w, z, state, fixed, prices, prices.p_se[h], s, guess, ref.u);
        const bool fallback = !plan.ok && h > 0;
        if (!plan.ok) {
            if (h == 0) throw SolverInfeasible("day-ahead plan infeasible in the first hour");
            plan.u = sc.u.back();
            z = sc.z.back();
            plan.y1 = sc.y_eb.back();
        }
        sc.u.push_back(plan.u);
        sc.z.push_back(z);
        sc.y_eb.push_back(std::max(0.0, plan.y1));
        sc.t_br.push_back(plan.ok ? plan.x(sx::t_br) : sc.t_br.back());
        sc.fallback.push_back(fallback);
        guess = plan.u;

        // Carry the storage states through the hour on the reduced model.
        StateVec x = plan.ok ? plan.x : state;
        qss.reset();
        for (int m = 0; m < 60; ++m) x = reduced_step(qss, x, plan.u, z, w, 60.0);
        x(sx::t_br) = sc.t_br.back();
        x(sx::C_soc) = std::clamp(x(sx::C_soc), 0.05, 0.95);
        x(sx::C_sot) = std::clamp(x(sx::C_sot), 0.0, 1.0);
        state = x;
        sc.x.push_back(state);
    }
    // The boundary states carry the planned building temperature of the hour that starts there.
    for (int h = 0; h < kHours; ++h) sc.x[h](sx::t_br) = sc.t_br[h];
    return sc;
}

// ---- evaluation ------------------------------------------------------------

double stage_profit(const PriceBook& prices, double t, double dt, double y1, double y_eb, double xi, double p_d,
                    double fuel_kg_s) {
    const double dev = y1 - (1.0 + xi) * y_eb;
    const double per_mwh = prices.p_mg * p_d + prices.se(t) * y1 + prices.cm(t) * std::abs(xi) * y_eb -
                           prices.pn(t) * dev * dev;
    return per_mwh * dt / 3.6e6 - prices.p_f * fuel_kg_s * dt;
}

EvalReport evaluate(const ScenarioLog& log, const Schedule& sched, const PriceBook& prices, const PlantParams& p) {
    const long expected = std::lround(log.duration / log.dt);
    if (static_cast<long>(log.rows.size()) != expected)
        throw IncompleteLog("log holds " + std::to_string(log.rows.size()) + " samples, expected " +
                            std::to_string(expected));
    EvalReport r;
    long iter_sum = 0;
    for (size_t k = 0; k < log.rows.size(); ++k) {
        const LogRow& row = log.rows[k];
        if (std::abs(row.t - (log.t0 + k * log.dt)) > 1e-6)
            throw IncompleteLog("sample " + std::to_string(k) + " is out of sequence");
        const double y1 = row.y(sy::P_sl), y2 = row.y(sy::t_br);
        const double dev = y1 - (1.0 + row.xi) * row.y_eb;
        r.E_p += std::abs(dev);
        if (y2 < row.band_lo || y2 > row.band_hi)
            r.E_t += std::min(std::abs(y2 - row.band_lo), std::abs(y2 - row.band_hi));
        r.profit += stage_profit(prices, row.t, log.dt, y1, row.y_eb, row.xi, row.w(sw::P_d),
                                 row.u(su::G_ff) + row.u(su::G_fm));
        iter_sum += row.iterations;
        r.max_iterations = std::max(r.max_iterations, row.iterations);
    }
    r.samples = static_cast<int>(log.rows.size());
    if (!log.rows.empty()) {
        const LogRow& last = log.rows.back();
        const double t_end = last.t + log.dt;
        r.dC_es = ((last.x(sx::C_soc) - sched.soc_ref(t_end)) * p.battery_kwh() +
                   (last.x(sx::C_sot) - sched.sot_ref(t_end)) * p.storage_kwh()) *
                  prices.p_mg / 1000.0;
        r.mean_iterations = static_cast<double>(iter_sum) / r.samples;
    }
    r.E_e = r.profit + r.dC_es;
    r.E_glb = r.recomposed();
    return r;
}

// ---- scenario file ---------------------------------------------------------

namespace {

struct Field {
    const char* key;
    double ScenarioConfig::*top = nullptr;
    double ProfileSpec::*prof = nullptr;
    double DayAheadSettings::*plan = nullptr;
};

const std::vector<Field>& scalar_fields() {
    static const std::vector<Field> f = {
        {"time.start_s", &ScenarioConfig::start},
        {"time.duration_s", &ScenarioConfig::duration},
        {"time.dt_fast", &ScenarioConfig::dt_fast},
        {"time.dt_slow", &ScenarioConfig::dt_slow},
        {"time.dt_plant", &ScenarioConfig::dt_plant},
        {"capacity", &ScenarioConfig::capacity},
        {"test.xi_step_time", &ScenarioConfig::xi_step_time},
        {"test.xi_step_value", &ScenarioConfig::xi_step_value},
        {"profile.ta_min", nullptr, &ProfileSpec::ta_min},
        {"profile.ta_max", nullptr, &ProfileSpec::ta_max},
        {"profile.ta_peak_hour", nullptr, &ProfileSpec::ta_peak_hour},
        {"profile.ta_plateau", nullptr, &ProfileSpec::ta_plateau},
        {"profile.sra_peak", nullptr, &ProfileSpec::sra_peak},
        {"profile.sunrise", nullptr, &ProfileSpec::sunrise},
        {"profile.sunset", nullptr, &ProfileSpec::sunset},
        {"profile.pd_base", nullptr, &ProfileSpec::pd_base},
        {"profile.pd_peak1", nullptr, &ProfileSpec::pd_peak1},
        {"profile.pd_hour1", nullptr, &ProfileSpec::pd_hour1},
        {"profile.pd_peak2", nullptr, &ProfileSpec::pd_peak2},
        {"profile.pd_hour2", nullptr, &ProfileSpec::pd_hour2},
        {"profile.pd_width", nullptr, &ProfileSpec::pd_width},
        {"profile.qo_base", nullptr, &ProfileSpec::qo_base},
        {"profile.qo_peak1", nullptr, &ProfileSpec::qo_peak1},
        {"profile.qo_hour1", nullptr, &ProfileSpec::qo_hour1},
        {"profile.qo_peak2", nullptr, &ProfileSpec::qo_peak2},
        {"profile.qo_hour2", nullptr, &ProfileSpec::qo_hour2},
        {"profile.qo_width", nullptr, &ProfileSpec::qo_width},
        {"profile.sigma_rel", nullptr, &ProfileSpec::sigma_rel},
        {"profile.clip_rel", nullptr, &ProfileSpec::clip_rel},
        {"schedule.band_lo", nullptr, nullptr, &DayAheadSettings::band_lo},
        {"schedule.band_hi", nullptr, nullptr, &DayAheadSettings::band_hi},
        {"schedule.margin", nullptr, nullptr, &DayAheadSettings::margin},
        {"schedule.battery_kw", nullptr, nullptr, &DayAheadSettings::battery_kw},
        {"schedule.reserve", nullptr, nullptr, &DayAheadSettings::reserve},
        {"schedule.soc_swing", nullptr, nullptr, &DayAheadSettings::soc_swing},
        {"schedule.low_price", nullptr, nullptr, &DayAheadSettings::low_price},
        {"schedule.high_price", nullptr, nullptr, &DayAheadSettings::high_price},
    };
    return f;
}

double* field_ptr(ScenarioConfig& c, const Field& f) {
    if (f.top) return &(c.*f.top);
    if (f.prof) return &(c.profile.*f.prof);
    return &(c.day_ahead.*f.plan);
}

// Prefixes owned by the controller configuration.
const std::vector<std::string>& controller_prefixes() {
    static const std::vector<std::string> p = {"slow.", "fast.", "sup."};
    return p;
}

}  // namespace

ScenarioConfig scenario_from_kv(const KvFile& kv) {
    ScenarioConfig c;
    std::set<std::string> known = {"seed", "controller", "prices.p_mg", "prices.p_f", "prices.p_se",
                                   "prices.cm_factor", "prices.pn_factor", "regulation.pattern",
                                   "test.constant_conditions"};
    for (const Field& f : scalar_fields()) {
        known.insert(f.key);
        if (kv.has(f.key)) *field_ptr(c, f) = kv.num(f.key);
    }
    for (const auto& [key, value] : kv.entries()) {
        (void)value;
        bool ok = known.count(key) > 0;
        for (const std::string& pre : controller_prefixes()) ok = ok || key.rfind(pre, 0) == 0;
        if (!ok) throw ConfigError(kv.source() + ": unknown key '" + key + "'");
    }
    c.seed = static_cast<std::uint64_t>(kv.integer("seed", 1));
    c.controller = kv.str("controller", c.controller);
    c.prices.p_mg = kv.num("prices.p_mg", c.prices.p_mg);
    c.prices.p_f = kv.num("prices.p_f", c.prices.p_f);
    c.prices.cm_factor = kv.num("prices.cm_factor", c.prices.cm_factor);
    c.prices.pn_factor = kv.num("prices.pn_factor", c.prices.pn_factor);
    c.prices.p_se = kv.list("prices.p_se", c.prices.p_se);
    c.regulation_pattern = kv.list("regulation.pattern", c.regulation_pattern);
    c.constant_conditions = kv.integer("test.constant_conditions", 0) != 0;

    const std::string src = kv.source() + ": ";
    if (c.controller != "p1" && c.controller != "p2" && c.controller != "p3" && c.controller != "p4")
        throw ConfigError(src + "controller must be one of p1, p2, p3, p4");
    if (static_cast<int>(c.prices.p_se.size()) != kHours) throw ConfigError(src + "prices.p_se needs 24 values");
    if (static_cast<int>(c.regulation_pattern.size()) != kHours)
        throw ConfigError(src + "regulation.pattern needs 24 values");
    for (double v : c.prices.p_se)
        if (v < 0) throw ConfigError(src + "prices must be nonnegative");
    if (c.prices.p_mg < 0 || c.prices.p_f < 0 || c.prices.cm_factor < 0 || c.prices.pn_factor < 0)
        throw ConfigError(src + "prices must be nonnegative");
    if (c.capacity < 0 || c.capacity > 1) throw ConfigError(src + "capacity must lie in [0, 1]");
    if (!(c.dt_plant > 0) || !(c.dt_fast > 0) || !(c.dt_slow > 0) || c.duration < 0)
        throw ConfigError(src + "time steps must be positive");
    const double r1 = c.dt_fast / c.dt_plant, r2 = c.dt_slow / c.dt_fast;
    if (std::abs(r1 - std::round(r1)) > 1e-9 || std::abs(r2 - std::round(r2)) > 1e-9)
        throw ConfigError(src + "dt_slow must be a multiple of dt_fast, and dt_fast of dt_plant");
    const double rd = c.duration / c.dt_slow;
    if (std::abs(rd - std::round(rd)) > 1e-9) throw ConfigError(src + "duration must be a multiple of dt_slow");
    if (c.start < 0 || c.start + c.duration > kDay) throw ConfigError(src + "the run must stay within one day");
    if (!(c.day_ahead.band_lo < c.day_ahead.band_hi)) throw ConfigError(src + "comfort band is empty");
    return c;
}

void scenario_to_kv(const ScenarioConfig& c, KvFile& kv) {
    kv.set_header(kScenarioHeader);
    ScenarioConfig copy = c;
    for (const Field& f : scalar_fields()) kv.set(f.key, *field_ptr(copy, f));
    kv.set("seed", std::to_string(c.seed));
    kv.set("controller", c.controller);
    kv.set("prices.p_mg", c.prices.p_mg);
    kv.set("prices.p_f", c.prices.p_f);
    kv.set("prices.cm_factor", c.prices.cm_factor);
    kv.set("prices.pn_factor", c.prices.pn_factor);
    kv.set("prices.p_se", c.prices.p_se);
    kv.set("regulation.pattern", c.regulation_pattern);
    kv.set("test.constant_conditions", c.constant_conditions ? 1.0 : 0.0);
}

}  // namespace gridsyn
