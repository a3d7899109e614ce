#include "gridsyn/plant.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/integrator.hpp"
#include "gridsyn/kvfile.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace gridsyn {

double pv_power(const DistVec& w, const PlantParams& p) {
    const auto& pv = p.pv;
    const double eta = pv.eta_ref * std::max(0.0, 1.0 - pv.beta * (w(sw::t_a) - pv.t_ref));
    const double area = pv.n_pp * pv.n_sp * pv.panel_area;
    return eta * area * std::max(0.0, w(sw::S_ra)) / 1000.0;
}

double fc_voltage(const StateVec& x, const PlantParams& p) {
    const auto& fc = p.fc;
    const double ph2 = std::max(x(sx::p_H2), fc.p_floor);
    const double po2 = std::max(x(sx::p_O2), fc.p_floor);
    const double ph2o = std::max(x(sx::p_H2O), fc.p_floor);
    const double nernst = fc.r_gas * fc.t_stack / (2.0 * fc.faraday) * std::log(ph2 * std::sqrt(po2) / ph2o);
    return fc.n_cells * (fc.e0 + nernst) - fc.r_int * x(sx::I_f);
}

NetworkFlows water_network(const InputVec& u, const IntVec& z, const StateVec& x,
                           const PlantParams& p) {
    NetworkFlows n;
    const double cw = p.c_w;
    const double g_ab = u(su::G_ab), g_ec = u(su::G_ec), g_stu = u(su::G_stu);
    const double zst = z(sz::st);
    const double t_re = x(sx::t_re);

    n.G_st = zst * g_stu + (zst - 1.0) * g_stu;
    const double g_ch = g_ab + g_ec;
    n.G_sl = g_ch + n.G_st;
    n.G_all = g_ch + g_stu;

    n.t_ab = p.ab.t_ab0 + x(sx::t_abf) + x(sx::t_abw) + x(sx::t_abt);
    const double c_tot = x(sx::C_stc) + x(sx::C_sth);
    const double frac_hot = c_tot > 0.0 ? x(sx::C_sth) / c_tot : 0.5;
    n.t_stc = p.cs.t_cold_min + p.cs.span_cold * frac_hot;
    n.t_sth = p.cs.t_hot_max - p.cs.span_hot * (1.0 - frac_hot);
    n.t_hp = zst * t_re + (1.0 - zst) * n.t_sth;

    if (g_ch > 0.0) {
        n.t_rec = (n.G_sl * t_re - n.G_st * n.t_hp) / g_ch;
        n.t_ec = 2.0 * x(sx::t_ewm) - n.t_rec;
        n.t_slc = (g_ab * n.t_ab + g_ec * n.t_ec) / g_ch;
    } else {
        if (z(sz::ma) != 0 || z(sz::ec) != 0)
            throw DegenerateFlow("no chilled-water flow while a chiller is switched on");
        n.t_rec = t_re;
        n.t_ec = t_re;
        n.t_slc = t_re;
    }
    n.t_cp = zst * n.t_stc + (1.0 - zst) * n.t_slc;

    if (n.G_sl < 0.0) throw DegenerateFlow("storage charging flow exceeds the chiller flow");
    n.t_sl = n.G_sl > 0.0 ? (g_ab * n.t_ab + g_ec * n.t_ec + n.G_st * n.t_cp) / n.G_sl : t_re;

    n.Q_sl = n.G_sl * cw * (t_re - n.t_sl);
    n.Q_ab = g_ab * cw * (n.t_rec - n.t_ab);
    n.Q_ec = g_ec * cw * (n.t_rec - n.t_ec);
    n.Q_st = n.G_st * cw * (n.t_hp - n.t_cp);

    const auto& pm = p.pump;
    const double g = n.G_all;
    const double head = pm.h0 + pm.h2 * g * g;
    const double eta = std::max(pm.eta_floor, pm.eta0 + pm.eta1 * g - pm.eta2 * g * g);
    n.P_pmp = g * pm.g * head / (1000.0 * eta);
    return n;
}

StateVec derivatives(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                     const PlantParams& p) {
    const NetworkFlows n = water_network(u, z, x, p);
    StateVec dx;

    const auto& fc = p.fc;
    const double kr = fc.n_cells / (4.0 * fc.faraday);
    const double q = x(sx::G_H2), cur = x(sx::I_f);
    dx(sx::I_f) = (fc.u_opt * q / (2.0 * kr) - cur) / fc.tau_i;
    dx(sx::G_H2) = (fc.k_ref * u(su::G_ff) - q) / fc.tau_ref;
    dx(sx::p_O2) = ((fc.r_ho * q - kr * cur) / fc.k_o2 - x(sx::p_O2)) / fc.tau_o2;
    dx(sx::p_H2O) = (2.0 * kr * cur / fc.k_h2o - x(sx::p_H2O)) / fc.tau_h2o;
    dx(sx::p_H2) = ((q - 2.0 * kr * cur) / fc.k_h2 - x(sx::p_H2)) / fc.tau_h2;

    dx(sx::P_mtf) = (p.mt.k_mt * (u(su::G_fm) - p.mt.g_fm0) - x(sx::P_mtf)) / p.mt.tau;

    const auto& ab = p.ab;
    dx(sx::t_abf) = (ab.k_f * x(sx::P_mtf) - x(sx::t_abf)) / ab.tau_f;
    dx(sx::t_abw) = (ab.k_w * (u(su::G_ab) - ab.g_ab0) - x(sx::t_abw)) / ab.tau_w;
    dx(sx::t_abt) = (ab.k_t * (n.t_rec - ab.t_rec0) - x(sx::t_abt)) / ab.tau_t;

    const auto& ec = p.ec;
    const double nec = u(su::N_ec);
    dx(sx::t_c) = (x(sx::t_cs) + ec.a_c * nec - x(sx::t_c)) / ec.tau_c;
    dx(sx::t_cs) = (ec.ua_c * (x(sx::t_c) - x(sx::t_cs)) - ec.ua_cw * (x(sx::t_cs) - x(sx::t_cwm))) / ec.c_cs;
    dx(sx::t_cwm) = (ec.ua_cw * (x(sx::t_cs) - x(sx::t_cwm)) -
                     2.0 * ec.gcw_cw * (x(sx::t_cwm) - w(sw::t_a))) / ec.c_cw;
    dx(sx::t_e) = (x(sx::t_es) - ec.a_e * nec - x(sx::t_e)) / ec.tau_e;
    dx(sx::t_es) = (ec.ua_w * (x(sx::t_ewm) - x(sx::t_es)) - ec.ua_r * (x(sx::t_es) - x(sx::t_e))) / ec.c_es;
    dx(sx::t_ewm) = (2.0 * u(su::G_ec) * p.c_w * (n.t_rec - x(sx::t_ewm)) -
                     ec.ua_w * (x(sx::t_ewm) - x(sx::t_es))) / ec.c_ew;

    const auto& ba = p.ba;
    const double i_cell = x(sx::I_ba) / ba.n_pb;
    const double i_ref = 1000.0 * u(su::P_bar) / (ba.n_sb * (ba.e_m - x(sx::v_cap)));
    dx(sx::v_cap) = -x(sx::v_cap) / (ba.r1 * ba.c1) + i_cell / ba.c1;
    dx(sx::C_soc) = -i_cell / (3600.0 * ba.q_cell);
    dx(sx::I_ba) = (i_ref - x(sx::I_ba)) / ba.tau_i;

    dx(sx::C_sot) = -n.Q_st / p.cs.e_cs;
    dx(sx::C_stc) = -p.c_w * n.G_st;
    dx(sx::C_sth) = p.c_w * n.G_st;

    const auto& b = p.bld;
    dx(sx::t_re) = (n.G_sl * p.c_w * (n.t_sl - x(sx::t_re)) + b.ua_fc * (x(sx::t_br) - x(sx::t_re))) / b.c_fc;
    dx(sx::t_br) = (b.u_br * (w(sw::t_a) - x(sx::t_br)) - n.Q_sl + w(sw::Q_o)) / b.c_br;
    return dx;
}

UnitPowers unit_powers(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                       const PlantParams& p) {
    const NetworkFlows n = water_network(u, z, x, p);
    UnitPowers pw;
    pw.P_pv = pv_power(w, p);
    pw.P_fc = z(sz::fc) * fc_voltage(x, p) * x(sx::I_f) / 1000.0;
    pw.P_mt = z(sz::ma) * (p.mt.p_mt0 + x(sx::P_mtf));
    const double i_cell = x(sx::I_ba) / p.ba.n_pb;
    pw.P_ba = p.ba.n_sb * (p.ba.e_m - x(sx::v_cap) - p.ba.r0 * i_cell) * x(sx::I_ba) / 1000.0;
    pw.P_cp = z(sz::ec) * p.ec.k_p * u(su::N_ec) * (x(sx::t_c) - x(sx::t_e));
    pw.P_pmp = n.P_pmp;
    pw.P_d = w(sw::P_d);
    return pw;
}

OutputVec outputs(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                  const PlantParams& p) {
    OutputVec y;
    y(sy::P_sl) = unit_powers(x, u, z, w, p).delivered();
    y(sy::t_br) = x(sx::t_br);
    return y;
}

void check_envelope(const StateVec& x, const PlantParams& p) {
    for (int i = 0; i < kNx; ++i) {
        if (!std::isfinite(x(i)) || x(i) < p.x_min(i) || x(i) > p.x_max(i)) {
            std::ostringstream os;
            os << "state " << kStateSymbols[i] << " = " << x(i) << " left its envelope ["
               << p.x_min(i) << ", " << p.x_max(i) << "]";
            throw IntegrationDiverged(os.str());
        }
    }
}

StateVec step(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w, double dt,
              const PlantParams& p) {
    auto f = [&](const StateVec& s) { return derivatives(s, u, z, w, p); };
    StateVec next = rk4_step(f, x, dt);
    check_envelope(next, p);
    return next;
}

StateVec advance(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                 double duration, const PlantParams& p, double max_dt) {
    const int n = std::max(1, static_cast<int>(std::ceil(duration / max_dt - 1e-9)));
    const double dt = duration / n;
    StateVec s = x;
    for (int i = 0; i < n; ++i) s = step(s, u, z, w, dt, p);
    return s;
}

EquilibriumResult equilibrium(const StateVec& guess, const InputVec& u, const IntVec& z,
                              const DistVec& w, const PlantParams& p, double tol, int max_iter) {
    EquilibriumResult r;
    r.x = guess;
    StateVec f = derivatives(r.x, u, z, w, p);
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        r.residual = f.cwiseAbs().maxCoeff();
        if (r.residual <= tol) {
            r.converged = true;
            return r;
        }
        Eigen::Matrix<double, kNx, kNx> jac;
        for (int j = 0; j < kNx; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(r.x(j)));
            StateVec xp = r.x, xm = r.x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (derivatives(xp, u, z, w, p) - derivatives(xm, u, z, w, p)) / (2.0 * h);
        }
        const StateVec dx = -jac.completeOrthogonalDecomposition().solve(f);
        double alpha = 1.0;
        const double f0 = f.norm();
        for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
            StateVec trial = r.x + alpha * dx;
            StateVec ft = derivatives(trial, u, z, w, p);
            if (ft.allFinite() && ft.norm() < f0) {
                r.x = trial;
                f = ft;
                break;
            }
        }
        if (alpha < 1e-8) break;
    }
    r.residual = f.cwiseAbs().maxCoeff();
    r.converged = r.residual <= tol;
    return r;
}

OperatingPoint reference_equilibrium(const PlantParams& p) {
    OperatingPoint op = p.nominal;
    const auto r = equilibrium(op.x, op.u, op.z, op.w, p);
    if (!r.converged)
        throw IntegrationDiverged("reference equilibrium refinement stalled at residual " +
                                  format_double(r.residual));
    op.x = r.x;
    return op;
}

void gated_bounds(const IntVec& z, const PlantParams& p, InputVec& lo, InputVec& hi) {
    lo = p.u_min;
    hi = p.u_max;
    const int owner[kNu] = {sz::fc, sz::ma, sz::ma, sz::ec, sz::ec, -1, -1};
    for (int i = 0; i < kNu; ++i)
        if (owner[i] >= 0 && z(owner[i]) == 0) lo(i) = hi(i) = 0.0;
}

void write_state_csv_header(std::ostream& out) {
    out << "time";
    for (auto s : kStateSymbols) out << ',' << s;
    out << '\n';
}

void write_state_csv_row(std::ostream& out, double t, const StateVec& x) {
    out << format_double(t);
    for (int i = 0; i < kNx; ++i) out << ',' << format_double(x(i));
    out << '\n';
}

std::vector<std::pair<double, StateVec>> read_state_csv(std::istream& in) {
    std::vector<std::pair<double, StateVec>> rows;
    std::string line;
    if (!std::getline(in, line)) throw IoError("state CSV is empty");
    {
        std::ostringstream expect;
        write_state_csv_header(expect);
        std::string want = expect.str();
        want.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != want) throw IoError("state CSV header does not match the state symbols");
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string cell;
        double vals[kNx + 1];
        int k = 0;
        while (std::getline(is, cell, ',')) {
            if (k > kNx) break;
            try {
                vals[k++] = std::stod(cell);
            } catch (const std::exception&) {
                throw IoError("state CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (k != kNx + 1) throw IoError("state CSV line " + std::to_string(lineno) + ": wrong column count");
        StateVec x;
        for (int i = 0; i < kNx; ++i) x(i) = vals[i + 1];
        rows.emplace_back(vals[0], x);
    }
    return rows;
}

}  // namespace gridsyn
