#pragma once

#include "gridsyn/params.hpp"
#include "gridsyn/types.hpp"

#include <iosfwd>
#include <vector>

namespace gridsyn {

struct NetworkFlows {
    double t_ab = 0, t_ec = 0;     // chiller supply temperatures
    double t_sl = 0;               // mixed supply to the building
    double t_rec = 0;              // return to the chillers
    double t_slc = 0;              // chiller-only mix
    double t_cp = 0, t_hp = 0;     // storage cold/hot side temperatures
    double t_stc = 0, t_sth = 0;   // cold and hot tank temperatures
    double G_sl = 0, G_st = 0, G_all = 0;
    double P_pmp = 0;
    double Q_sl = 0, Q_ab = 0, Q_ec = 0, Q_st = 0;
};

struct UnitPowers {
    double P_pv = 0, P_fc = 0, P_mt = 0, P_ba = 0, P_cp = 0, P_pmp = 0, P_d = 0;
    double delivered() const { return P_pv + P_fc + P_mt + P_ba - P_cp - P_pmp - P_d; }
};

double pv_power(const DistVec& w, const PlantParams& p);
double fc_voltage(const StateVec& x, const PlantParams& p);

NetworkFlows water_network(const InputVec& u, const IntVec& z, const StateVec& x,
                           const PlantParams& p);

StateVec derivatives(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                     const PlantParams& p);

UnitPowers unit_powers(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                       const PlantParams& p);

OutputVec outputs(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                  const PlantParams& p);

// Throws IntegrationDiverged if x is non-finite or outside the envelope.
void check_envelope(const StateVec& x, const PlantParams& p);

// One RK4 step of length dt with inputs and disturbances held.
StateVec step(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w, double dt,
              const PlantParams& p);

// Integrates over `duration` using equal RK4 steps no longer than max_dt.
StateVec advance(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                 double duration, const PlantParams& p, double max_dt = 1.0);

struct EquilibriumResult {
    StateVec x;
    double residual = 0;   // max |dx/dt|
    int iterations = 0;
    bool converged = false;
};

// Damped Newton on f(x) = 0 with minimum-norm steps, so states whose rows
// vanish identically (idle storage) stay at their guessed values.
EquilibriumResult equilibrium(const StateVec& guess, const InputVec& u, const IntVec& z,
                              const DistVec& w, const PlantParams& p, double tol = 1e-10,
                              int max_iter = 50);

// The nominal point of `p` with its state refined to an equilibrium.
OperatingPoint reference_equilibrium(const PlantParams& p);

// Inputs clamped to their gated bounds; u_min/u_max apply only while the
// owning unit is switched on.
void gated_bounds(const IntVec& z, const PlantParams& p, InputVec& lo, InputVec& hi);

void write_state_csv_header(std::ostream& out);
void write_state_csv_row(std::ostream& out, double t, const StateVec& x);
std::vector<std::pair<double, StateVec>> read_state_csv(std::istream& in);

}  // namespace gridsyn
