#pragma once

#include "gridsyn/params.hpp"
#include "gridsyn/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gridsyn {

class KvFile;

inline constexpr int kHours = 24;
inline constexpr int kMinutes = 1440;
inline constexpr double kDay = 86400.0;

// Parametric 24 h shapes for the external conditions.
struct ProfileSpec {
    double ta_min = 26, ta_max = 32, ta_peak_hour = 15, ta_plateau = 0.2;
    double sra_peak = 800, sunrise = 6, sunset = 20;
    double pd_base = 30, pd_peak1 = 12, pd_hour1 = 10, pd_peak2 = 18, pd_hour2 = 19, pd_width = 2.5;
    double qo_base = 36, qo_peak1 = 14, qo_hour1 = 13, qo_peak2 = 8, qo_hour2 = 17, qo_width = 3;
    double sigma_rel = 0.02;   // real-time spread relative to the day-ahead value
    double clip_rel = 0.06;
};

struct Profile {
    std::array<std::vector<double>, kNw> day_ahead;   // 24 hourly points per channel
    std::array<std::vector<double>, kNw> real_time;   // 1440 one-minute points
    std::uint64_t seed = 0;

    // Day-ahead forecast, linear between hourly points and wrapping at midnight.
    DistVec forecast(double t) const;
    // Real-time value held over each minute.
    DistVec actual(double t) const;
};

Profile generate_profiles(const ProfileSpec& spec, std::uint64_t seed);

// Prices in CAD/MWh except p_f in CAD/kg.
struct PriceBook {
    double p_mg = 80;
    double p_f = 0.2;
    // Hourly selling price: off-peak night, shoulder, afternoon peak.
    std::vector<double> p_se = {25, 25, 25, 25, 25, 25, 25, 45, 45, 45, 45, 80,
                                80, 80, 80, 80, 80, 80, 80, 45, 45, 45, 45, 45};
    double cm_factor = 1.5;
    double pn_factor = 1.5;

    double se(double t) const;
    double cm(double t) const { return cm_factor * se(t); }
    double pn(double t) const { return pn_factor * se(t); }
    double mean_se() const;
};

struct RegulationSignal {
    double capacity = 0;
    std::vector<double> day_ahead;   // 24 hourly factors
    std::vector<double> real_time;   // 1440 one-minute factors

    double at(double t) const;             // real-time factor
    double forecast(double t) const;       // hourly factor
};

// Hourly factors capacity * pattern[h]; real time adds Gaussian noise with
// sigma = capacity / 6, clipped at 1.2 * capacity. Zero capacity gives zero.
RegulationSignal generate_regulation(double capacity, const std::vector<double>& pattern, std::uint64_t seed);

struct Schedule {
    std::vector<double> y_eb;          // hourly committed export, kW
    std::vector<IntVec> z;             // hourly unit commitment
    std::vector<InputVec> u;           // hourly steady-state inputs
    std::vector<StateVec> x;           // state at each hour boundary (25 points)
    std::vector<double> t_br;          // hourly planned building temperature
    std::vector<bool> fallback;        // hour reused the previous plan

    double y_eb_at(double t) const;
    IntVec z_at(double t) const;
    // Storage reference, linear between hour boundaries.
    double soc_ref(double t) const;
    double sot_ref(double t) const;
    StateVec state_at(double t) const;
};

struct DayAheadSettings {
    double band_lo = 23, band_hi = 25;
    double margin = 0.5;                // planned temperature stays this far inside the band
    double battery_kw = 15;             // scheduled battery power limit
    double reserve = 0.2;               // generator range kept free for regulation
    double soc_swing = 0.35;            // daily storage excursion from the start level
    double low_price = 0.8, high_price = 1.2;   // fractions of the mean p_se
    double tol = 1e-7;
};

// Hourly steady-state economic plan. Does not depend on the regulation capacity.
Schedule day_ahead(const Profile& prof, const PriceBook& prices, const PlantParams& p,
                   const DayAheadSettings& s = {});

// ---- closed-loop log and evaluation ----------------------------------------

struct LogRow {
    double t = 0;           // start of the sample, s
    InputVec u;             // applied over [t, t + dt)
    OutputVec y;            // at t + dt
    StateVec x;             // at t + dt
    DistVec w;              // actual disturbance over the sample
    double y_eb = 0, xi = 0;
    double band_lo = 0, band_hi = 0;
    int iterations = 0;     // fast coordination iterations
    int holds = 0;          // agents that fell back to a held input
    double fast_objective = 0;
};

struct ScenarioLog {
    double dt = 5;
    double t0 = 0, duration = 0;
    std::vector<LogRow> rows;
    std::vector<bool> slow_holds;   // per slow sample
};

struct EvalReport {
    double E_p = 0, E_t = 0, E_e = 0, E_glb = 0;
    double profit = 0;      // sum of -J3
    double dC_es = 0;
    double beta1 = 0.05, beta2 = 3.5, beta3 = 10;
    int samples = 0;
    double mean_iterations = 0;
    int max_iterations = 0;
    double recomposed() const { return beta1 * E_p + beta2 * E_t - beta3 * E_e; }
};

// Per-sample stage economics in CAD.
double stage_profit(const PriceBook& prices, double t, double dt, double y1, double y_eb, double xi, double p_d,
                    double fuel_kg_s);

// Throws IncompleteLog when rows are missing or out of order.
EvalReport evaluate(const ScenarioLog& log, const Schedule& sched, const PriceBook& prices, const PlantParams& p);

// ---- scenario file ---------------------------------------------------------

struct ScenarioConfig {
    double start = 12 * 3600.0;   // time of day at the start, s
    double duration = 3600;
    double dt_fast = 5, dt_slow = 60, dt_plant = 1;
    std::uint64_t seed = 1;
    double capacity = 0.25;
    std::string controller = "p1";
    ProfileSpec profile;
    PriceBook prices;
    // Hourly day-ahead regulation factor in units of the capacity.
    std::vector<double> regulation_pattern = {0.0,  -0.3, -0.6, -0.8, -0.6, -0.2, 0.2,  0.6, 0.9, 1.0, 0.7, 0.2,
                                              -0.4, -0.8, -1.0, -0.6, 0.0,  0.5,  0.9, 1.0, 0.6, 0.2, -0.2, 0.0};
    DayAheadSettings day_ahead;
    double xi_step_time = -1;     // >= 0 replaces the signal by a step to xi_step_value
    double xi_step_value = 0;
    bool constant_conditions = false;   // hold the disturbances at their start values
};

ScenarioConfig scenario_from_kv(const KvFile& kv);
void scenario_to_kv(const ScenarioConfig& c, KvFile& kv);

inline constexpr const char* kScenarioHeader = "gridsyn-scenario v1";

}  // namespace gridsyn
