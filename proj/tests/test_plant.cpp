#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsyn/errors.hpp"
#include "gridsyn/integrator.hpp"
#include "gridsyn/kvfile.hpp"
#include "gridsyn/params.hpp"
#include "gridsyn/plant.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace gridsyn;

namespace {

const PlantParams& params() {
    static const PlantParams p;
    return p;
}

const OperatingPoint& reference() {
    static const OperatingPoint op = reference_equilibrium(params());
    return op;
}

}  // namespace

TEST_CASE("pv power at the calibration point and by hand") {
    const PlantParams& p = params();
    DistVec w = p.nominal.w;
    CHECK(pv_power(w, p) == doctest::Approx(44.0).epsilon(1e-3));

    w(sw::S_ra) = 0;
    for (double ta : {-5.0, 25.0, 40.0}) {
        w(sw::t_a) = ta;
        CHECK(pv_power(w, p) == 0.0);
    }

    w = p.nominal.w;
    w(sw::S_ra) = 0.5 * p.nominal.w(sw::S_ra);
    const double area = 13 * 15 * 1.6;
    const double eta = 0.18 * (1 - 0.004 * (w(sw::t_a) - 25));
    CHECK(pv_power(w, p) == doctest::Approx(eta * area * w(sw::S_ra) / 1000).epsilon(1e-12));
}

TEST_CASE("water network mixing") {
    const PlantParams& p = params();
    StateVec x = reference().x;
    InputVec u = reference().u;
    IntVec z;
    z << 1, 1, 1, 1;

    SUBCASE("every chilled stream at 7 degC") {
        x(sx::t_abf) = x(sx::t_abw) = x(sx::t_abt) = 0;   // t_ab = 7
        x(sx::C_stc) = x(sx::C_sth) = 31500;              // tank cold side at 7
        x(sx::t_re) = 12;
        u(su::G_stu) = 0.5;
        // t_ec = 2 t_ewm - t_rec with t_rec from the return balance.
        const double g_ch = u(su::G_ab) + u(su::G_ec);
        const double g_sl = g_ch + 0.5;
        const double t_rec = (g_sl * 12 - 0.5 * 12) / g_ch;
        x(sx::t_ewm) = (7 + t_rec) / 2;
        const NetworkFlows n = water_network(u, z, x, p);
        CHECK(n.t_sl == doctest::Approx(7.0).epsilon(1e-12));
    }

    SUBCASE("equal flows average the chiller temperatures") {
        u(su::G_stu) = 0;
        u(su::G_ab) = u(su::G_ec) = 2.0;
        x(sx::t_abf) = -1;
        x(sx::t_abw) = x(sx::t_abt) = 0;   // t_ab = 6
        x(sx::t_re) = 12;
        x(sx::t_ewm) = 10;                 // t_ec = 2*10 - 12 = 8
        const NetworkFlows n = water_network(u, z, x, p);
        CHECK(n.G_st == 0.0);
        CHECK(n.t_ab == doctest::Approx(6.0));
        CHECK(n.t_ec == doctest::Approx(8.0));
        CHECK(n.t_sl == doctest::Approx(7.0).epsilon(1e-12));
    }

    SUBCASE("pump power at nominal flows") {
        const NetworkFlows n = water_network(p.nominal.u, p.nominal.z, p.nominal.x, p);
        CHECK(n.P_pmp == doctest::Approx(13.9).epsilon(1e-3));
    }

    SUBCASE("charging beyond the chiller flow is rejected") {
        z(sz::st) = 0;
        u(su::G_stu) = u(su::G_ab) + u(su::G_ec) + 1;
        CHECK_THROWS_AS(water_network(u, z, x, p), DegenerateFlow);
    }
}

TEST_CASE("building balance cancels when ambient and cooling match") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    DistVec w = op.w;
    w(sw::t_a) = op.x(sx::t_br);
    w(sw::Q_o) = water_network(op.u, op.z, op.x, p).Q_sl;
    CHECK(std::abs(derivatives(op.x, op.u, op.z, w, p)(sx::t_br)) < 1e-15);
}

TEST_CASE("reference equilibrium") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    const StateVec f = derivatives(op.x, op.u, op.z, op.w, p);
    CHECK(f.cwiseAbs().maxCoeff() <= 1e-6);

    SUBCASE("more turbine fuel raises the turbine lag state") {
        InputVec u = op.u;
        u(su::G_fm) *= 1.01;
        CHECK(derivatives(op.x, u, op.z, op.w, p)(sx::P_mtf) > 0);
    }
    SUBCASE("a 5 s step leaves it in place") {
        const StateVec x1 = step(op.x, op.u, op.z, op.w, 5.0, p);
        CHECK((x1 - op.x).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, op.x.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("supplied power from the nominal table") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    StateVec x = op.x;
    x(sx::I_ba) = 0;
    DistVec w = op.w;
    w(sw::P_d) = 0;
    const OutputVec y = outputs(x, op.u, op.z, w, p);
    // 44 + 40 + 80 - 12.6 - 13.9 with the table rounded to 0.1 kW.
    CHECK(std::abs(y(sy::P_sl) - 137.5) <= 0.1);
    CHECK(y(sy::t_br) == x(sx::t_br));

    IntVec z = op.z;
    z(sz::fc) = 0;
    const UnitPowers pw = unit_powers(x, op.u, z, w, p);
    CHECK(pw.P_fc == 0.0);
}

TEST_CASE("gating zeroes bounds and contributions") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    const int owner[kNu] = {sz::fc, sz::ma, sz::ma, sz::ec, sz::ec, -1, -1};
    for (int k = 0; k < 3; ++k) {
        IntVec z = op.z;
        z(k) = 0;
        InputVec lo, hi;
        gated_bounds(z, p, lo, hi);
        for (int i = 0; i < kNu; ++i) {
            if (owner[i] == k) {
                CHECK(lo(i) == 0.0);
                CHECK(hi(i) == 0.0);
            } else {
                CHECK(lo(i) == p.u_min(i));
                CHECK(hi(i) == p.u_max(i));
            }
        }
    }
    IntVec z = op.z;
    z(sz::ma) = 0;
    z(sz::ec) = 0;
    CHECK(unit_powers(op.x, op.u, z, op.w, p).P_mt == 0.0);
    CHECK(unit_powers(op.x, op.u, z, op.w, p).P_cp == 0.0);
}

TEST_CASE("rk4 on the scalar decay") {
    auto f = [](const Eigen::Matrix<double, 1, 1>& x) { return Eigen::Matrix<double, 1, 1>(-x); };
    Eigen::Matrix<double, 1, 1> x0(1.0);
    // 0.904837 to six digits; compared against the exact value since the
    // rounding alone is 4e-7.
    CHECK(std::abs(rk4_step(f, x0, 0.1)(0) - std::exp(-0.1)) <= 1e-7);

    // Global error at t = 1 for halving steps.
    double prev = 0;
    std::vector<double> ratios;
    for (int n : {5, 10, 20, 40}) {
        const double err = std::abs(rk4_integrate(f, x0, 1.0 / n, n)(0) - std::exp(-1.0));
        if (prev > 0) ratios.push_back(prev / err);
        prev = err;
    }
    for (double r : ratios) CHECK(std::log2(r) >= 3.9);
    CHECK(ratios.back() == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("balance and mixing residuals along a perturbed trajectory") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    StateVec x = op.x;
    double worst_balance = 0, worst_mix = 0;
    for (int k = 0; k < 600; ++k) {
        InputVec u = op.u;
        for (int i = 0; i < kNu - 1; ++i) u(i) *= 1 + jitter(rng);
        u(su::P_bar) = 20 * jitter(rng);
        x = step(x, u, op.z, op.w, 1.0, p);
        const UnitPowers pw = unit_powers(x, u, op.z, op.w, p);
        const double y1 = outputs(x, u, op.z, op.w, p)(sy::P_sl);
        const double balance = y1 + pw.P_cp + pw.P_pmp + pw.P_d - (pw.P_pv + pw.P_fc + pw.P_mt + pw.P_ba);
        const double scale = std::max({1.0, std::abs(y1), pw.P_pv + pw.P_fc + pw.P_mt + std::abs(pw.P_ba)});
        worst_balance = std::max(worst_balance, std::abs(balance) / scale);
        const NetworkFlows n = water_network(u, op.z, x, p);
        const double lhs = n.G_sl * n.t_sl;
        const double rhs = u(su::G_ab) * n.t_ab + u(su::G_ec) * n.t_ec + n.G_st * n.t_cp;
        worst_mix = std::max(worst_mix, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    CHECK(worst_balance <= 1e-9);
    CHECK(worst_mix <= 1e-9);
}

TEST_CASE("envelope violations are reported") {
    const PlantParams& p = params();
    StateVec x = reference().x;
    x(sx::C_soc) = 1.5;
    CHECK_THROWS_AS(check_envelope(x, p), IntegrationDiverged);
    x = reference().x;
    x(sx::t_br) = std::nan("");
    CHECK_THROWS_AS(check_envelope(x, p), IntegrationDiverged);
}

TEST_CASE("state csv round trip") {
    const StateVec x = reference().x;
    std::stringstream s;
    write_state_csv_header(s);
    write_state_csv_row(s, 0.5, x);
    write_state_csv_row(s, 1.5, 2 * x);
    const auto rows = read_state_csv(s);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].first == 0.5);
    CHECK(rows[0].second == x);
    CHECK(rows[1].second == 2 * x);
}

TEST_CASE("params file round trip and validation") {
    const PlantParams& p = params();
    std::stringstream s;
    KvFile kv;
    params_to_kv(p, kv);
    kv.write(s);
    const PlantParams q = params_from_kv(KvFile::parse(s, kParamsHeader));
    CHECK(q.nominal.x == p.nominal.x);
    CHECK(q.tau_table == p.tau_table);
    CHECK(q.fc.r_int == p.fc.r_int);

    std::stringstream bad("gridsyn-params v1\nmt.k_mt = -1\n");
    CHECK_THROWS_AS(params_from_kv(KvFile::parse(bad, kParamsHeader)), ConfigError);
    std::stringstream unknown("gridsyn-params v1\nmt.kk = 1\n");
    CHECK_THROWS_AS(params_from_kv(KvFile::parse(unknown, kParamsHeader)), ConfigError);
}

TEST_CASE("independent finite-difference schemes agree on the plant jacobian") {
    const PlantParams& p = params();
    const OperatingPoint& op = reference();
    auto jac = [&](double h_rel, bool central) {
        Eigen::Matrix<double, kNx, kNx> J;
        const StateVec f0 = derivatives(op.x, op.u, op.z, op.w, p);
        for (int j = 0; j < kNx; ++j) {
            const double h = h_rel * std::max(1.0, std::abs(op.x(j)));
            StateVec xp = op.x, xm = op.x;
            xp(j) += h;
            xm(j) -= h;
            J.col(j) = central ? StateVec((derivatives(xp, op.u, op.z, op.w, p) - derivatives(xm, op.u, op.z, op.w, p)) / (2 * h))
                               : StateVec((derivatives(xp, op.u, op.z, op.w, p) - f0) / h);
        }
        return J;
    };
    const auto a = jac(1e-6, true);
    const auto b = jac(1e-7, false);
    double worst = 0;
    for (int i = 0; i < kNx; ++i)
        for (int j = 0; j < kNx; ++j)
            if (std::abs(a(i, j)) > 1e-6 * a.row(i).cwiseAbs().maxCoeff()) worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::abs(a(i, j)));
    CHECK(worst <= 1e-4);
}
