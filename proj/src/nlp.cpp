#include "gridsyn/nlp.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridsyn {

std::string to_string(NlpStatus s) {
    switch (s) {
        case NlpStatus::Converged: return "converged";
        case NlpStatus::IterLimit: return "iteration-limit";
        case NlpStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub, double h_rel) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = h_rel * std::max(1.0, std::abs(x(i)));
        const bool up = x(i) + h <= ub(i), down = x(i) - h >= lb(i);
        if (up && down) {
            xp(i) = x(i) + h;
            const double fp = f(xp);
            xp(i) = x(i) - h;
            const double fm = f(xp);
            g(i) = (fp - fm) / (2 * h);
        } else if (up) {
            xp(i) = x(i) + h;
            g(i) = (f(xp) - fx) / h;
        } else if (down) {
            xp(i) = x(i) - h;
            g(i) = (fx - f(xp)) / h;
        } else {
            g(i) = 0;   // fixed variable
        }
        xp(i) = x(i);
    }
    if (!g.allFinite()) throw NonFiniteDerivative("objective gradient is not finite");
    return g;
}

Eigen::MatrixXd fd_jacobian(const VectorFn& c, const Eigen::VectorXd& x, const Eigen::VectorXd& cx,
                            const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, double h_rel) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd J(cx.size(), n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = h_rel * std::max(1.0, std::abs(x(i)));
        const bool up = x(i) + h <= ub(i), down = x(i) - h >= lb(i);
        if (up && down) {
            xp(i) = x(i) + h;
            const Eigen::VectorXd cp = c(xp);
            xp(i) = x(i) - h;
            J.col(i) = (cp - c(xp)) / (2 * h);
        } else if (up) {
            xp(i) = x(i) + h;
            J.col(i) = (c(xp) - cx) / h;
        } else if (down) {
            xp(i) = x(i) - h;
            J.col(i) = (cx - c(xp)) / h;
        } else {
            J.col(i).setZero();
        }
        xp(i) = x(i);
    }
    if (!J.allFinite()) throw NonFiniteDerivative("constraint Jacobian is not finite");
    return J;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Eval {
    Eigen::VectorXd x;
    double f = 0;
    Eigen::VectorXd ce, ci;   // ci includes the linear rows
    bool ok = false;
};

struct Derivs {
    Eigen::VectorXd g;
    Eigen::MatrixXd Je, Ji;
};

class Sqp {
public:
    Sqp(const NlpProblem& p, const NlpSettings& s) : p_(p), s_(s) {
        n_ = p.n;
        lb_ = p.lb.size() ? p.lb : Eigen::VectorXd::Constant(n_, -kInf);
        ub_ = p.ub.size() ? p.ub : Eigen::VectorXd::Constant(n_, kInf);
        if (lb_.size() != n_ || ub_.size() != n_) throw ConfigError("NLP bound size mismatch");
        if ((lb_.array() > ub_.array()).any()) throw ConfigError("NLP bounds cross");
        if (!p.objective) throw ConfigError("NLP without objective");
        if (p.A_lin.rows() && (p.A_lin.cols() != n_ || p.b_lin.size() != p.A_lin.rows()))
            throw ConfigError("NLP linear constraint shape mismatch");
    }

    NlpSolution run() {
        Eigen::VectorXd x0 = p_.x0.size() == n_ ? p_.x0 : Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (!std::isfinite(x0(i))) x0(i) = 0;
            x0(i) = std::clamp(x0(i), lb_(i), ub_(i));
        }
        Eval cur = evaluate(x0);
        if (!cur.ok) throw SolverInfeasible("NLP objective or constraints fail at the initial point");
        Derivs dcur = derivatives(cur);
        const Eigen::Index me = cur.ce.size(), mi = cur.ci.size();

        double damping = 1e-6;
        Eigen::MatrixXd B = p_.hessian ? model_hessian(cur.x, damping) : Eigen::MatrixXd::Identity(n_, n_);
        double nu = 1.0;
        NlpSolution out;
        out.status = NlpStatus::IterLimit;
        Eigen::VectorXd lam_e = Eigen::VectorXd::Zero(me), lam_i = Eigen::VectorXd::Zero(mi);
        int stalled = 0;
        double best_violation = kInf;
        bool fresh_hessian = true;

        for (int it = 1; it <= s_.max_iter; ++it) {
            out.iterations = it;
            bool elastic = false;
            Eigen::VectorXd d = step(cur, dcur, B, nu, lam_e, lam_i, elastic);

            const double kkt = kkt_residual(cur, dcur, lam_e, lam_i);
            const double viol = max_violation(cur);
            NlpIteration rec{it, cur.f, merit(cur, nu), d.lpNorm<Eigen::Infinity>(), kkt, viol, 0.0, elastic};
            if (kkt <= s_.tol) {
                if (s_.trace) s_.trace(rec);
                out.status = NlpStatus::Converged;
                break;
            }

            // Infeasibility: violation stuck above tolerance while the QP needs slack.
            if (elastic && viol > s_.tol) {
                if (viol < 0.99 * best_violation) {
                    best_violation = viol;
                    stalled = 0;
                } else if (++stalled >= 8) {
                    if (s_.trace) s_.trace(rec);
                    out.status = NlpStatus::Infeasible;
                    break;
                }
            }

            const double need = std::max(me ? lam_e.lpNorm<Eigen::Infinity>() : 0.0,
                                         mi ? lam_i.lpNorm<Eigen::Infinity>() : 0.0);
            while (nu < 1.1 * need + 1e-10) nu *= 2;

            const double phi0 = merit(cur, nu);
            const double D = dcur.g.dot(d) + nu * (linear_violation(cur, dcur, d) - l1_violation(cur));
            double alpha = 1.0;
            Eval trial;
            bool accepted = false;
            if (D < 0) {
                for (int ls = 0; ls < 40; ++ls) {
                    trial = evaluate(clip(cur.x + alpha * d));
                    if (trial.ok && merit(trial, nu) <= phi0 + 1e-4 * alpha * D) {
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
            rec.alpha = accepted ? alpha : 0.0;
            rec.merit = phi0;
            if (s_.trace) s_.trace(rec);
            if (!accepted) {
                if (p_.hessian) {
                    // Levenberg-style damping of the model Hessian.
                    if (damping > 1e6) break;
                    damping *= 100;
                    B = model_hessian(cur.x, damping);
                    continue;
                }
                if (fresh_hessian) break;   // no descent even with B = I
                B.setIdentity();
                fresh_hessian = true;
                continue;
            }

            Derivs dnew = derivatives(trial);
            if (p_.hessian) {
                // Short accepted steps mean the model curvature is too weak.
                damping = alpha < 0.5 ? std::min(1e6, damping * 10) : alpha == 1.0 ? std::max(1e-6, damping / 10) : damping;
                cur = std::move(trial);
                dcur = std::move(dnew);
                B = model_hessian(cur.x, damping);
                continue;
            }
            const Eigen::VectorXd sk = trial.x - cur.x;
            Eigen::VectorXd yk = dnew.g - dcur.g;
            if (me) yk += (dnew.Je - dcur.Je).transpose() * lam_e;
            if (mi) yk += (dnew.Ji - dcur.Ji).transpose() * lam_i;
            bfgs_update(B, sk, yk);
            fresh_hessian = false;
            cur = std::move(trial);
            dcur = std::move(dnew);
        }

        out.x = cur.x;
        out.objective = cur.f;
        out.lambda_eq = lam_e;
        out.lambda_in = lam_i;
        out.violation = max_violation(cur);
        out.kkt_residual = kkt_residual(cur, dcur, lam_e, lam_i);
        if (out.status != NlpStatus::Converged && out.kkt_residual <= s_.tol) out.status = NlpStatus::Converged;
        if (out.status == NlpStatus::IterLimit && out.violation > std::max(s_.tol, 1e-6) && best_violation < kInf)
            out.status = NlpStatus::Infeasible;
        return out;
    }

private:
    Eigen::VectorXd clip(Eigen::VectorXd x) const {
        for (Eigen::Index i = 0; i < n_; ++i) x(i) = std::clamp(x(i), lb_(i), ub_(i));
        return x;
    }

    Eval evaluate(const Eigen::VectorXd& x) const {
        Eval e;
        e.x = x;
        try {
            e.f = p_.objective(x);
            e.ce = p_.eq ? p_.eq(x) : Eigen::VectorXd();
            const Eigen::VectorXd ci = p_.ineq ? p_.ineq(x) : Eigen::VectorXd();
            const Eigen::Index ml = p_.A_lin.rows();
            e.ci.resize(ci.size() + ml);
            e.ci.head(ci.size()) = ci;
            if (ml) e.ci.tail(ml) = p_.A_lin * x - p_.b_lin;
            e.ok = std::isfinite(e.f) && e.ce.allFinite() && e.ci.allFinite();
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::Model) throw;
            e.ok = false;   // trial left the model's domain
        }
        return e;
    }

    Derivs derivatives(const Eval& e) const {
        Derivs d;
        d.g = p_.gradient ? p_.gradient(e.x) : fd_gradient(p_.objective, e.x, e.f, lb_, ub_, s_.h_rel);
        if (p_.eq) {
            d.Je = p_.eq_jacobian ? p_.eq_jacobian(e.x) : fd_jacobian(p_.eq, e.x, e.ce, lb_, ub_, s_.h_rel);
        } else {
            d.Je.resize(0, n_);
        }
        const Eigen::Index mn = e.ci.size() - p_.A_lin.rows();
        d.Ji.resize(e.ci.size(), n_);
        if (p_.ineq) {
            const Eigen::VectorXd cn = e.ci.head(mn);
            d.Ji.topRows(mn) = p_.ineq_jacobian ? p_.ineq_jacobian(e.x) : fd_jacobian(p_.ineq, e.x, cn, lb_, ub_, s_.h_rel);
        }
        if (p_.A_lin.rows()) d.Ji.bottomRows(p_.A_lin.rows()) = p_.A_lin;
        return d;
    }

    static double l1_violation(const Eval& e) {
        return e.ce.lpNorm<1>() + e.ci.cwiseMax(0.0).sum();
    }
    static double max_violation(const Eval& e) {
        double v = e.ce.size() ? e.ce.lpNorm<Eigen::Infinity>() : 0.0;
        if (e.ci.size()) v = std::max(v, e.ci.maxCoeff());
        return std::max(v, 0.0);
    }
    static double linear_violation(const Eval& e, const Derivs& d, const Eigen::VectorXd& step) {
        double v = 0;
        if (e.ce.size()) v += (e.ce + d.Je * step).lpNorm<1>();
        if (e.ci.size()) v += (e.ci + d.Ji * step).cwiseMax(0.0).sum();
        return v;
    }
    static double merit(const Eval& e, double nu) { return e.f + nu * l1_violation(e); }

    double kkt_residual(const Eval& e, const Derivs& d, const Eigen::VectorXd& le, const Eigen::VectorXd& li) const {
        Eigen::VectorXd r = d.g;
        if (le.size()) r += d.Je.transpose() * le;
        if (li.size()) r += d.Ji.transpose() * li;
        const Eigen::VectorXd proj = e.x - clip(e.x - r);
        double stat = proj.size() ? proj.lpNorm<Eigen::Infinity>() : 0.0;
        stat /= std::max(1.0, d.g.size() ? d.g.lpNorm<Eigen::Infinity>() : 0.0);
        double comp = 0;
        for (Eigen::Index k = 0; k < li.size(); ++k) comp = std::max(comp, std::abs(li(k) * e.ci(k)));
        return std::max({stat, max_violation(e), comp});
    }

    Eigen::VectorXd step(const Eval& e, const Derivs& d, const Eigen::MatrixXd& B, double nu, Eigen::VectorXd& le,
                         Eigen::VectorXd& li, bool& elastic) const {
        const Eigen::Index me = e.ce.size(), mi = e.ci.size();
        QpProblem qp;
        qp.H = B;
        qp.g = d.g;
        qp.A_eq = d.Je;
        qp.b_eq = -e.ce;
        qp.A_in = d.Ji;
        qp.b_in = -e.ci;
        qp.lb = lb_ - e.x;
        qp.ub = ub_ - e.x;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (!std::isfinite(qp.lb(i))) qp.lb(i) = -1e20;
            if (!std::isfinite(qp.ub(i))) qp.ub(i) = 1e20;
        }
        QpResult r = solve_qp(qp);
        if (r.converged) {
            le = r.y_eq;
            li = r.z_in.cwiseMax(0.0);
            elastic = false;
            return r.x;
        }

        // Elastic QP: slacks v, w on equalities and t on inequalities, l1 priced.
        elastic = true;
        const Eigen::Index ne = n_ + 2 * me + mi;
        const double rho = std::max(10.0 * nu, 1.0);
        QpProblem el;
        el.H = Eigen::MatrixXd::Zero(ne, ne);
        el.H.topLeftCorner(n_, n_) = B;
        el.H.diagonal().tail(ne - n_).array() = 1e-8;
        el.g = Eigen::VectorXd::Constant(ne, rho);
        el.g.head(n_) = d.g;
        el.A_eq = Eigen::MatrixXd::Zero(me, ne);
        if (me) {
            el.A_eq.leftCols(n_) = d.Je;
            el.A_eq.block(0, n_, me, me) = -Eigen::MatrixXd::Identity(me, me);
            el.A_eq.block(0, n_ + me, me, me) = Eigen::MatrixXd::Identity(me, me);
        }
        el.b_eq = -e.ce;
        el.A_in = Eigen::MatrixXd::Zero(mi, ne);
        if (mi) {
            el.A_in.leftCols(n_) = d.Ji;
            el.A_in.rightCols(mi) = -Eigen::MatrixXd::Identity(mi, mi);
        }
        el.b_in = -e.ci;
        el.lb = Eigen::VectorXd::Zero(ne);
        el.ub = Eigen::VectorXd::Constant(ne, 1e20);
        el.lb.head(n_) = qp.lb;
        el.ub.head(n_) = qp.ub;
        QpSettings loose;
        loose.max_iter = 200;
        r = solve_qp(el, loose);
        if (!r.converged && !r.x.allFinite()) throw SolverInfeasible("elastic QP failed");
        le = r.y_eq;
        li = r.z_in.cwiseMax(0.0);
        return r.x.head(n_);
    }

    Eigen::MatrixXd model_hessian(const Eigen::VectorXd& x, double damping) const {
        Eigen::MatrixXd H = p_.hessian(x);
        if (H.rows() != n_ || H.cols() != n_ || !H.allFinite()) throw ConfigError("NLP Hessian model has bad shape");
        H = 0.5 * (H + H.transpose()).eval();
        const double scale = std::max(1e-8, H.diagonal().cwiseAbs().mean());
        H.diagonal().array() += damping * scale;
        return H;
    }

    static void bfgs_update(Eigen::MatrixXd& B, const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
        const Eigen::VectorXd Bs = B * s;
        const double sBs = s.dot(Bs);
        if (!(sBs > 1e-16)) return;
        double sy = s.dot(y);
        Eigen::VectorXd r = y;
        // Powell damping keeps B positive definite.
        if (sy < 0.2 * sBs) {
            const double theta = 0.8 * sBs / (sBs - sy);
            r = theta * y + (1 - theta) * Bs;
            sy = s.dot(r);
        }
        if (!(sy > 1e-16)) return;
        B += r * r.transpose() / sy - Bs * Bs.transpose() / sBs;
        if (!B.allFinite()) B.setIdentity();
    }

    const NlpProblem& p_;
    const NlpSettings& s_;
    Eigen::Index n_ = 0;
    Eigen::VectorXd lb_, ub_;
};

}  // namespace

NlpSolution solve(const NlpProblem& p, const NlpSettings& s) {
    return Sqp(p, s).run();
}

}  // namespace gridsyn
