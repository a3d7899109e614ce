#pragma once

#include "gridsyn/types.hpp"

#include <string>

namespace gridsyn {

class KvFile;

struct PvParams {
    double n_pp = 13;            // panels in parallel
    double n_sp = 15;            // panels in series
    double panel_area = 1.6;     // m^2
    double eta_ref = 0.18;
    double beta = 0.004;         // 1/°C efficiency derate
    double t_ref = 25;           // °C
};

// First-order stack with hydrogen, oxygen and vapour pressure lags.
struct FcParams {
    double n_cells = 500;
    double faraday = 96485;
    double r_gas = 8.314;
    double t_stack = 343.15;     // K
    double e0 = 0.9;             // V per cell
    double r_int = 0.5512388875199781;
    double k_ref = 250;          // mol H2 per kg of feed gas
    double u_opt = 0.8;          // fuel utilisation
    double r_ho = 1.168;         // oxygen to hydrogen feed ratio
    double k_h2 = 0.06477690832771932;
    double k_o2 = 0.2487433279784422;
    double k_h2o = 0.5182152666217547;
    double tau_i = 0.8;
    double tau_ref = 5;
    double tau_o2 = 2.9;
    double tau_h2o = 78;
    double tau_h2 = 26;
    double p_floor = 1e-6;
};

struct MtParams {
    double p_mt0 = 80;           // kW at g_fm0
    double g_fm0 = 80.0 / 15000.0;
    double k_mt = 15000;         // kW per kg/s
    double tau = 20;
};

struct AbParams {
    double t_ab0 = 7;
    double k_f = -0.02;          // °C per kW of MT power change
    double tau_f = 130;
    double k_w = 0.8;            // °C per kg/s of chilled flow change
    double g_ab0 = 15.0 / 4.18;
    double tau_w = 80;
    double k_t = 0.5;            // °C per °C of return temperature change
    double t_rec0 = 12;
    double tau_t = 70;
};

struct EcParams {
    double a_e = 0.05;           // evaporating temperature drop per rps
    double tau_e = 1.2;
    double a_c = 0.075;          // condensing temperature lift per rps
    double tau_c = 1.2;
    double ua_w = 25;            // kW/°C chilled water to evaporator shell
    double ua_r = 25;            // kW/°C shell to refrigerant
    double c_es = 75;            // kJ/°C
    double c_ew = 882;
    double ua_c = 62.6 / 3.0;
    double ua_cw = 62.6 / 3.0;
    double c_cs = 62.6;
    double gcw_cw = 15.65;       // cooling water G*C_w, kW/°C
    double c_cw = 1215.4833333333336;
    double k_p = 12.6 / 1300.0;  // kW per rps per °C lift
};

struct BaParams {
    double n_sb = 100;
    double n_pb = 10;
    double e_m = 3.7;            // V per cell
    double r0 = 0.01;
    double r1 = 0.005;
    double c1 = 1240;
    double q_cell = 44.63963963963964;  // Ah
    double tau_i = 0.8;
};

struct CsParams {
    double e_cs = 378000;        // kJ of cold at full charge
    double t_cold_min = 5;
    double span_cold = 4;
    double t_hot_max = 14;
    double span_hot = 4;
};

struct BuildingParams {
    double u_br = 12.5;          // kW/°C
    double c_br = 158150;        // kJ/°C
    double ua_fc = 125.0 / 12.0;
    double c_fc = 908.3333333333334;
};

// Pump curve: head h0 + h2*G^2 (m), efficiency eta0 + eta1*G - eta2*G^2.
// The efficiency shape is a calibration choice, not measured data.
struct PumpParams {
    double g = 9.81;
    double h0 = 128.19854908143344;
    double h2 = 0.8;
    double eta0 = 0.35;
    double eta1 = 0.1;
    double eta2 = 0.008;
    double eta_floor = 0.05;
};

struct OperatingPoint {
    StateVec x;
    InputVec u;
    IntVec z;
    DistVec w;
};

struct PlantParams {
    double c_w = 4.18;
    PvParams pv;
    FcParams fc;
    MtParams mt;
    AbParams ab;
    EcParams ec;
    BaParams ba;
    CsParams cs;
    BuildingParams bld;
    PumpParams pump;

    StateVec x_min, x_max;       // physical envelope
    InputVec u_min, u_max;       // bounds while the owning unit is on
    OperatingPoint nominal;      // calibration point and Newton guess
    StateVec tau_table;          // tabulated dominant time constants, s

    PlantParams();

    double battery_kwh() const { return ba.n_sb * ba.n_pb * ba.e_m * ba.q_cell / 1000.0; }
    double storage_kwh() const { return cs.e_cs / 3600.0; }

    // Throws ConfigError naming the first non-positive constant.
    void validate() const;
};

PlantParams params_from_kv(const KvFile& kv);
void params_to_kv(const PlantParams& p, KvFile& kv);
PlantParams load_params(const std::string& path);
void save_params(const PlantParams& p, const std::string& path);

inline constexpr const char* kParamsHeader = "gridsyn-params v1";

}  // namespace gridsyn
