#include "gridsyn/params.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/kvfile.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace gridsyn {

PlantParams::PlantParams() {
    // Envelope: temperatures in [-20, 120] °C, capacity states in [0, 1].
    x_min.setConstant(-20.0);
    x_max.setConstant(120.0);
    auto span = [&](int i, double lo, double hi) {
        x_min(i) = lo;
        x_max(i) = hi;
    };
    span(sx::I_f, -1.0, 400.0);
    span(sx::G_H2, -1e-3, 2.0);
    span(sx::p_O2, -1e-3, 10.0);
    span(sx::p_H2O, -1e-3, 10.0);
    span(sx::p_H2, -1e-3, 10.0);
    span(sx::P_mtf, -200.0, 200.0);
    span(sx::v_cap, -5.0, 5.0);
    span(sx::C_soc, 0.0, 1.0);
    span(sx::I_ba, -1000.0, 1000.0);
    span(sx::C_sot, 0.0, 1.0);
    span(sx::C_stc, 0.0, 63000.0);
    span(sx::C_sth, 0.0, 63000.0);

    u_min << 0.0005, 0.0025, 1.0, 15.0, 0.5, 0.0, -40.0;
    u_max << 0.0017, 0.0068, 6.0, 60.0, 5.0, 1.0, 40.0;

    nominal.u << 0.0012955381665543865, mt.g_fm0, ab.g_ab0, 40.0, 10.0 / c_w, 0.0, 0.0;
    nominal.z << 1, 1, 1, 1;
    nominal.w << 30.0, 800.0, 40.0, 50.0;
    nominal.x << 100.0, 0.3238845416385966, 1.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 38.0, 35.0, 32.0,
        5.5, 7.5, 9.5, 0.0, 0.5, 0.0, 0.5, 31500.0, 31500.0, 12.0, 24.0;

    tau_table << 0.8, 5, 2.9, 78, 26, 20, 130, 80, 70, 1.2, 1.5, 23.3, 1.2, 1.5, 19.6, 6.2, 14865,
        0.8, 18000, 18000, 18000, 20, 12652;
}

namespace {

void visit_scalars(PlantParams& p, const std::function<void(const std::string&, double*)>& f) {
    f("water.c_w", &p.c_w);
    f("pv.n_pp", &p.pv.n_pp);
    f("pv.n_sp", &p.pv.n_sp);
    f("pv.panel_area", &p.pv.panel_area);
    f("pv.eta_ref", &p.pv.eta_ref);
    f("pv.beta", &p.pv.beta);
    f("pv.t_ref", &p.pv.t_ref);
    f("fc.n_cells", &p.fc.n_cells);
    f("fc.faraday", &p.fc.faraday);
    f("fc.r_gas", &p.fc.r_gas);
    f("fc.t_stack", &p.fc.t_stack);
    f("fc.e0", &p.fc.e0);
    f("fc.r_int", &p.fc.r_int);
    f("fc.k_ref", &p.fc.k_ref);
    f("fc.u_opt", &p.fc.u_opt);
    f("fc.r_ho", &p.fc.r_ho);
    f("fc.k_h2", &p.fc.k_h2);
    f("fc.k_o2", &p.fc.k_o2);
    f("fc.k_h2o", &p.fc.k_h2o);
    f("fc.tau_i", &p.fc.tau_i);
    f("fc.tau_ref", &p.fc.tau_ref);
    f("fc.tau_o2", &p.fc.tau_o2);
    f("fc.tau_h2o", &p.fc.tau_h2o);
    f("fc.tau_h2", &p.fc.tau_h2);
    f("fc.p_floor", &p.fc.p_floor);
    f("mt.p_mt0", &p.mt.p_mt0);
    f("mt.g_fm0", &p.mt.g_fm0);
    f("mt.k_mt", &p.mt.k_mt);
    f("mt.tau", &p.mt.tau);
    f("ab.t_ab0", &p.ab.t_ab0);
    f("ab.k_f", &p.ab.k_f);
    f("ab.tau_f", &p.ab.tau_f);
    f("ab.k_w", &p.ab.k_w);
    f("ab.g_ab0", &p.ab.g_ab0);
    f("ab.tau_w", &p.ab.tau_w);
    f("ab.k_t", &p.ab.k_t);
    f("ab.t_rec0", &p.ab.t_rec0);
    f("ab.tau_t", &p.ab.tau_t);
    f("ec.a_e", &p.ec.a_e);
    f("ec.tau_e", &p.ec.tau_e);
    f("ec.a_c", &p.ec.a_c);
    f("ec.tau_c", &p.ec.tau_c);
    f("ec.ua_w", &p.ec.ua_w);
    f("ec.ua_r", &p.ec.ua_r);
    f("ec.c_es", &p.ec.c_es);
    f("ec.c_ew", &p.ec.c_ew);
    f("ec.ua_c", &p.ec.ua_c);
    f("ec.ua_cw", &p.ec.ua_cw);
    f("ec.c_cs", &p.ec.c_cs);
    f("ec.gcw_cw", &p.ec.gcw_cw);
    f("ec.c_cw", &p.ec.c_cw);
    f("ec.k_p", &p.ec.k_p);
    f("ba.n_sb", &p.ba.n_sb);
    f("ba.n_pb", &p.ba.n_pb);
    f("ba.e_m", &p.ba.e_m);
    f("ba.r0", &p.ba.r0);
    f("ba.r1", &p.ba.r1);
    f("ba.c1", &p.ba.c1);
    f("ba.q_cell", &p.ba.q_cell);
    f("ba.tau_i", &p.ba.tau_i);
    f("cs.e_cs", &p.cs.e_cs);
    f("cs.t_cold_min", &p.cs.t_cold_min);
    f("cs.span_cold", &p.cs.span_cold);
    f("cs.t_hot_max", &p.cs.t_hot_max);
    f("cs.span_hot", &p.cs.span_hot);
    f("building.u_br", &p.bld.u_br);
    f("building.c_br", &p.bld.c_br);
    f("building.ua_fc", &p.bld.ua_fc);
    f("building.c_fc", &p.bld.c_fc);
    f("pump.g", &p.pump.g);
    f("pump.h0", &p.pump.h0);
    f("pump.h2", &p.pump.h2);
    f("pump.eta0", &p.pump.eta0);
    f("pump.eta1", &p.pump.eta1);
    f("pump.eta2", &p.pump.eta2);
    f("pump.eta_floor", &p.pump.eta_floor);
}

// Signed calibration gains and offsets that may legitimately be zero or negative.
const std::set<std::string> kSignedKeys = {"ab.k_f", "ab.t_ab0", "ab.t_rec0", "pv.t_ref",
                                           "pump.eta2", "pump.h2", "cs.t_cold_min"};

template <typename V>
void read_vec(const KvFile& kv, const std::string& key, V& v) {
    if (!kv.has(key)) return;
    auto vals = kv.list(key);
    if (static_cast<int>(vals.size()) != v.size())
        throw ConfigError(kv.source() + ": '" + key + "' needs " + std::to_string(v.size()) +
                          " values, got " + std::to_string(vals.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = static_cast<typename V::Scalar>(vals[i]);
}

template <typename V>
std::vector<double> to_list(const V& v) {
    std::vector<double> out(v.size());
    for (int i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v(i));
    return out;
}

const std::vector<std::string> kVecKeys = {"envelope.x_min", "envelope.x_max", "bounds.u_min",
                                           "bounds.u_max",   "nominal.x",      "nominal.u",
                                           "nominal.z",      "nominal.w",      "tau_table"};

}  // namespace

void PlantParams::validate() const {
    auto self = const_cast<PlantParams*>(this);
    visit_scalars(*self, [](const std::string& key, double* v) {
        if (kSignedKeys.count(key)) return;
        if (!(*v > 0.0)) throw ConfigError("parameter '" + key + "' must be strictly positive");
    });
    for (int i = 0; i < kNx; ++i)
        if (!(x_min(i) < x_max(i)))
            throw ConfigError("envelope for " + std::string(kStateSymbols[i]) + " is empty");
    for (int i = 0; i < kNu; ++i)
        if (!(u_min(i) <= u_max(i)))
            throw ConfigError("bounds for " + std::string(kInputSymbols[i]) + " are inverted");
    for (int i = 0; i < kNu - 1; ++i)
        if (u_min(i) < 0.0) throw ConfigError("flow input " + std::string(kInputSymbols[i]) + " may not go negative");
    for (int i = 0; i < kNz; ++i)
        if (nominal.z(i) != 0 && nominal.z(i) != 1) throw ConfigError("nominal.z must be binary");
    if ((tau_table.array() <= 0.0).any()) throw ConfigError("tau_table entries must be positive");
}

PlantParams params_from_kv(const KvFile& kv) {
    PlantParams p;
    std::set<std::string> known(kVecKeys.begin(), kVecKeys.end());
    visit_scalars(p, [&](const std::string& key, double* v) {
        known.insert(key);
        if (kv.has(key)) *v = kv.num(key);
    });
    for (auto& [key, value] : kv.entries())
        if (!known.count(key) && key.rfind("decomp.", 0) != 0)
            throw ConfigError(kv.source() + ": unknown parameter '" + key + "'");
    read_vec(kv, "envelope.x_min", p.x_min);
    read_vec(kv, "envelope.x_max", p.x_max);
    read_vec(kv, "bounds.u_min", p.u_min);
    read_vec(kv, "bounds.u_max", p.u_max);
    read_vec(kv, "nominal.x", p.nominal.x);
    read_vec(kv, "nominal.u", p.nominal.u);
    read_vec(kv, "nominal.z", p.nominal.z);
    read_vec(kv, "nominal.w", p.nominal.w);
    read_vec(kv, "tau_table", p.tau_table);
    p.validate();
    return p;
}

void params_to_kv(const PlantParams& p, KvFile& kv) {
    if (kv.header().empty()) kv.set_header(kParamsHeader);
    auto& mp = const_cast<PlantParams&>(p);
    visit_scalars(mp, [&](const std::string& key, double* v) { kv.set(key, *v); });
    kv.set("envelope.x_min", to_list(p.x_min));
    kv.set("envelope.x_max", to_list(p.x_max));
    kv.set("bounds.u_min", to_list(p.u_min));
    kv.set("bounds.u_max", to_list(p.u_max));
    kv.set("nominal.x", to_list(p.nominal.x));
    kv.set("nominal.u", to_list(p.nominal.u));
    kv.set("nominal.z", to_list(p.nominal.z));
    kv.set("nominal.w", to_list(p.nominal.w));
    kv.set("tau_table", to_list(p.tau_table));
}

PlantParams load_params(const std::string& path) {
    return params_from_kv(KvFile::load(path, kParamsHeader));
}

void save_params(const PlantParams& p, const std::string& path) {
    KvFile kv;
    params_to_kv(p, kv);
    kv.save(path);
}

}  // namespace gridsyn
