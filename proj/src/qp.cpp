#include "gridsyn/qp.hpp"

#include "gridsyn/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gridsyn {

namespace {

constexpr double kBig = 1e19;

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
    return a;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpSettings& st) {
    const Eigen::Index n = qp.g.size();
    if (qp.H.rows() != n || qp.H.cols() != n) throw ConfigError("QP Hessian shape mismatch");
    const Eigen::VectorXd lb = qp.lb.size() ? qp.lb : Eigen::VectorXd::Constant(n, -kBig * 10);
    const Eigen::VectorXd ub = qp.ub.size() ? qp.ub : Eigen::VectorXd::Constant(n, kBig * 10);
    const Eigen::Index me = qp.A_eq.rows(), mi_user = qp.A_in.rows();

    // Split fixed and free variables.
    std::vector<int> free_idx, fixed_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lb(i) > ub(i)) throw ConfigError("QP bounds cross");
        (ub(i) - lb(i) <= 1e-14 * std::max(1.0, std::abs(lb(i))) ? fixed_idx : free_idx).push_back(static_cast<int>(i));
    }
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::VectorXd x_full = Eigen::VectorXd::Zero(n);
    for (int i : fixed_idx) x_full(i) = lb(i);

    Eigen::MatrixXd H(nf, nf), E(me, nf);
    Eigen::VectorXd g(nf), e = qp.b_eq;
    Eigen::MatrixXd Gu(mi_user, nf);
    Eigen::VectorXd hu = qp.b_in;
    for (Eigen::Index a = 0; a < nf; ++a) {
        const int i = free_idx[a];
        g(a) = qp.g(i);
        for (Eigen::Index b = 0; b < nf; ++b) H(a, b) = qp.H(i, free_idx[b]);
        for (int k : fixed_idx) g(a) += qp.H(i, k) * x_full(k);
        if (me) E.col(a) = qp.A_eq.col(i);
        if (mi_user) Gu.col(a) = qp.A_in.col(i);
    }
    for (int k : fixed_idx) {
        if (me) e -= qp.A_eq.col(k) * x_full(k);
        if (mi_user) hu -= qp.A_in.col(k) * x_full(k);
    }

    // Bounds on free variables become inequality rows.
    std::vector<std::pair<int, double>> box;   // (free position, sign)
    for (Eigen::Index a = 0; a < nf; ++a) {
        const int i = free_idx[a];
        if (ub(i) < kBig) box.emplace_back(static_cast<int>(a), 1.0);
        if (lb(i) > -kBig) box.emplace_back(static_cast<int>(a), -1.0);
    }
    const Eigen::Index mb = static_cast<Eigen::Index>(box.size());
    const Eigen::Index mi = mi_user + mb;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(mi, nf);
    Eigen::VectorXd h(mi);
    if (mi_user) {
        G.topRows(mi_user) = Gu;
        h.head(mi_user) = hu;
    }
    for (Eigen::Index r = 0; r < mb; ++r) {
        const auto [a, sgn] = box[r];
        G(mi_user + r, a) = sgn;
        h(mi_user + r) = sgn > 0 ? ub(free_idx[a]) : -lb(free_idx[a]);
    }

    QpResult res;
    res.y_eq = Eigen::VectorXd::Zero(me);
    res.z_in = Eigen::VectorXd::Zero(mi_user);
    res.z_box = Eigen::VectorXd::Zero(n);

    // Start at the box midpoint (or zero) with unit slacks and duals.
    Eigen::VectorXd x(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
        const int i = free_idx[a];
        const bool lo = lb(i) > -kBig, hi = ub(i) < kBig;
        x(a) = lo && hi ? 0.5 * (lb(i) + ub(i)) : lo ? lb(i) + 1.0 : hi ? ub(i) - 1.0 : 0.0;
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd s = (h - G * x).cwiseMax(1.0);
    Eigen::VectorXd z = Eigen::VectorXd::Ones(mi);

    const double scale_d = 1.0 + inf_norm(g);
    const double scale_p = 1.0 + std::max(inf_norm(h), inf_norm(e));
    const double reg = 1e-10;
    const Eigen::Index nk = nf + me;
    Eigen::MatrixXd K(nk, nk);
    Eigen::VectorXd rhs(nk);

    for (int it = 0; it < st.max_iter; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd r_d = H * x + g + E.transpose() * y + G.transpose() * z;
        const Eigen::VectorXd r_e = E * x - e;
        const Eigen::VectorXd r_i = G * x + s - h;
        const double mu = mi ? s.dot(z) / static_cast<double>(mi) : 0.0;
        res.dual_residual = inf_norm(r_d) / scale_d;
        res.primal_residual = std::max(inf_norm(r_e), inf_norm(r_i)) / scale_p;
        if (res.dual_residual <= st.tol && res.primal_residual <= st.tol && mu <= st.tol) {
            res.converged = true;
            break;
        }
        if (!x.allFinite() || !z.allFinite()) break;

        const Eigen::VectorXd w = z.cwiseQuotient(s);
        K.setZero();
        K.topLeftCorner(nf, nf) = H + G.transpose() * w.asDiagonal() * G;
        K.topLeftCorner(nf, nf).diagonal().array() += reg;
        if (me) {
            K.topRightCorner(nf, me) = E.transpose();
            K.bottomLeftCorner(me, nf) = E;
            K.bottomRightCorner(me, me).diagonal().array() = -reg;
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

        auto direction = [&](const Eigen::VectorXd& r_c, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                             Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
            rhs.head(nf) = -r_d - G.transpose() * (z.cwiseProduct(r_i) - r_c).cwiseQuotient(s);
            if (me) rhs.tail(me) = -r_e;
            const Eigen::VectorXd sol = lu.solve(rhs);
            dx = sol.head(nf);
            dy = sol.tail(me);
            dz = (z.cwiseProduct(r_i + G * dx) - r_c).cwiseQuotient(s);
            ds = -r_i - G * dx;
        };

        Eigen::VectorXd dx, dy, ds, dz;
        direction(s.cwiseProduct(z), dx, dy, ds, dz);
        const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
        double sigma = 0.0;
        if (mi) {
            const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(mi);
            sigma = std::pow(mu_aff / mu, 3);
            const Eigen::VectorXd r_c =
                s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(mi, sigma * mu);
            direction(r_c, dx, dy, ds, dz);
        }
        const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
        x += a * dx;
        y += a * dy;
        s += a * ds;
        z += a * dz;
    }

    for (Eigen::Index a = 0; a < nf; ++a) x_full(free_idx[a]) = std::clamp(x(a), lb(free_idx[a]), ub(free_idx[a]));
    res.x = x_full;
    res.y_eq = y;
    if (mi_user) res.z_in = z.head(mi_user);
    for (Eigen::Index r = 0; r < mb; ++r) {
        const auto [a, sgn] = box[r];
        res.z_box(free_idx[a]) += sgn * z(mi_user + r);
    }
    // Multipliers of eliminated variables close the stationarity of their rows.
    if (!fixed_idx.empty()) {
        Eigen::VectorXd grad = qp.H * x_full + qp.g;
        if (me) grad += qp.A_eq.transpose() * res.y_eq;
        if (mi_user) grad += qp.A_in.transpose() * res.z_in;
        for (int k : fixed_idx) res.z_box(k) = -grad(k);
    }
    return res;
}

}  // namespace gridsyn
