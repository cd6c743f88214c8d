#include "cadmm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cadmm {

namespace {

constexpr double kRegEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_diagonal(const Eigen::MatrixXd& M) {
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i)
            if (i != j && M(i, j) != 0.0) return false;
    return true;
}

/// Applies P^{-1} for a (possibly regularized) positive definite P, with a
/// cheap path when P is diagonal.
class CostOperator {
public:
    /// Returns false if P is not positive definite even after the +1e-9 I
    /// regularization allowance.
    bool init(Eigen::MatrixXd P, bool* regularized) {
        diagonal_ = is_diagonal(P);
        if (diagonal_) {
            diag_ = P.diagonal();
            if (diag_.minCoeff() < kRegEps) {
                diag_.array() += kRegEps;
                *regularized = true;
            }
            if (diag_.minCoeff() <= 0.0) return false;
            inv_diag_ = diag_.cwiseInverse();
            return true;
        }
        ldlt_.compute(P);
        const bool healthy = ldlt_.info() == Eigen::Success &&
                             ldlt_.vectorD().minCoeff() >= kRegEps;
        if (!healthy) {
            P.diagonal().array() += kRegEps;
            *regularized = true;
            ldlt_.compute(P);
            if (ldlt_.info() != Eigen::Success || ldlt_.vectorD().minCoeff() <= 0.0)
                return false;
        }
        return true;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (diagonal_) return inv_diag_.cwiseProduct(rhs);
        return ldlt_.solve(rhs);
    }

private:
    bool diagonal_ = false;
    Eigen::VectorXd diag_, inv_diag_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// Working set of constraint rows treated as equalities: the fixed equality
/// rows first, then the active inequalities in insertion order. Maintains
/// P^{-1}C' and the Schur complement S = C P^{-1} C' incrementally.
class WorkingSet {
public:
    WorkingSet(const QpProblem& prob, const CostOperator& cost)
        : prob_(prob), cost_(cost), n_(prob.n()), me_(prob.num_eq()) {
        const int cap = me_ + prob.num_in();
        cpt_.resize(n_, cap);
        s_.resize(cap, cap);
        for (int r = 0; r < me_; ++r) append_column(prob_.A_eq.row(r).transpose());
        refactor();
    }

    int size() const { return m_; }
    const std::vector<int>& active() const { return active_; }

    bool contains(int row) const {
        return std::find(active_.begin(), active_.end(), row) != active_.end();
    }

    void add(int row) {
        active_.push_back(row);
        append_column(prob_.A_in.row(row).transpose());
        refactor();
    }

    void remove_active(int pos) {
        const int col = me_ + pos;
        for (int j = col; j + 1 < m_; ++j) cpt_.col(j) = cpt_.col(j + 1);
        // shift S left/up over the removed row and column
        for (int j = col; j + 1 < m_; ++j) s_.col(j).head(m_) = s_.col(j + 1).head(m_);
        for (int i = col; i + 1 < m_; ++i) s_.row(i).head(m_ - 1) = s_.row(i + 1).head(m_ - 1);
        --m_;
        active_.erase(active_.begin() + pos);
        refactor();
    }

    /// Solves [P C'; C 0][x; y] = [top; bot].
    void solve_kkt(const Eigen::VectorXd& top, const Eigen::VectorXd& bot,
                   Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        const Eigen::VectorXd pinv_top = cost_.solve(top);
        if (m_ == 0) {
            x = pinv_top;
            y.resize(0);
            return;
        }
        const Eigen::VectorXd rhs =
            cpt_.leftCols(m_).transpose() * top - bot;  // C P^{-1} top - bot
        y = s_ldlt_.solve(rhs);
        x = pinv_top - cpt_.leftCols(m_) * y;
    }

    Eigen::VectorXd row_vector(int col_index) const { return cpt_.col(col_index); }

private:
    void append_column(const Eigen::VectorXd& a) {
        cpt_.col(m_) = cost_.solve(a);
        if (m_ > 0) {
            Eigen::VectorXd cross = cpt_.leftCols(m_).transpose() * a;
            s_.col(m_).head(m_) = cross;
            s_.row(m_).head(m_) = cross.transpose();
        }
        s_(m_, m_) = a.dot(cpt_.col(m_));
        ++m_;
    }

    void refactor() {
        if (m_ > 0) s_ldlt_.compute(s_.topLeftCorner(m_, m_));
    }

    const QpProblem& prob_;
    const CostOperator& cost_;
    int n_ = 0;
    int me_ = 0;
    int m_ = 0;                // columns currently in C (= me_ + active_.size())
    std::vector<int> active_;  // inequality rows, insertion order
    Eigen::MatrixXd cpt_;      // P^{-1} C'
    Eigen::MatrixXd s_;        // C P^{-1} C'
    Eigen::LDLT<Eigen::MatrixXd> s_ldlt_;
};

KktResiduals compute_residuals(const QpProblem& prob, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& eq_mult,
                               const Eigen::VectorXd& in_mult) {
    KktResiduals r;
    Eigen::VectorXd grad = prob.P * z + prob.q;
    if (prob.num_eq() > 0) grad += prob.A_eq.transpose() * eq_mult;
    if (prob.num_in() > 0) grad += prob.A_in.transpose() * in_mult;
    r.stationarity = grad.lpNorm<Eigen::Infinity>();
    r.eq = prob.num_eq() > 0
               ? (prob.A_eq * z - prob.b_eq).lpNorm<Eigen::Infinity>()
               : 0.0;
    if (prob.num_in() > 0) {
        const Eigen::VectorXd slack = prob.A_in * z - prob.b_in;
        r.ineq = std::max(0.0, slack.maxCoeff());
        r.comp = in_mult.cwiseProduct(slack).lpNorm<Eigen::Infinity>();
    }
    return r;
}

}  // namespace

void QpProblem::validate() const {
    const int nn = n();
    if (P.rows() != nn || P.cols() != nn)
        throw std::invalid_argument("QpProblem: P must be n x n");
    if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != nn))
        throw std::invalid_argument("QpProblem: equality block dimension mismatch");
    if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != nn))
        throw std::invalid_argument("QpProblem: inequality block dimension mismatch");
    if (!P.allFinite() || !q.allFinite() || !A_eq.allFinite() || !b_eq.allFinite() ||
        !A_in.allFinite() || !b_in.allFinite())
        throw std::invalid_argument("QpProblem: non-finite entry");
    const double scale = std::max(1.0, P.lpNorm<Eigen::Infinity>());
    if ((P - P.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
        throw std::invalid_argument("QpProblem: P is not symmetric");
}

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::MaxIters: return "max_iters";
        case QpStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

double KktResiduals::max() const {
    return std::max(std::max(stationarity, eq), std::max(ineq, comp));
}

double qp_objective(const QpProblem& prob, const Eigen::VectorXd& z) {
    return 0.5 * z.dot(prob.P * z) + prob.q.dot(z);
}

QpSolution solve_qp(const QpProblem& prob, double tol, int max_iters) {
    prob.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("solve_qp: tol must be positive");

    const int n = prob.n();
    const int me = prob.num_eq();
    const int mi = prob.num_in();

    QpSolution sol;
    sol.eq_mult = Eigen::VectorXd::Zero(me);
    sol.in_mult = Eigen::VectorXd::Zero(mi);

    CostOperator cost;
    if (!cost.init(prob.P, &sol.regularized))
        throw std::invalid_argument("solve_qp: P is not positive semidefinite");

    WorkingSet ws(prob, cost);

    // Start at the equality-constrained minimum.
    Eigen::VectorXd z, eq_mult;
    ws.solve_kkt(-prob.q, prob.b_eq, z, eq_mult);
    if (me > 0) {
        const double eq_res = (prob.A_eq * z - prob.b_eq).lpNorm<Eigen::Infinity>();
        const double eq_scale = std::max(1.0, prob.b_eq.lpNorm<Eigen::Infinity>());
        if (!z.allFinite() || eq_res > std::sqrt(tol) * eq_scale) {
            sol.status = QpStatus::Infeasible;
            sol.z = z.allFinite() ? z : Eigen::VectorXd::Zero(n);
            return sol;
        }
    }
    std::vector<double> u;  // multipliers of the active inequality rows

    const double feas_tol =
        tol * std::max(1.0, mi > 0 ? prob.b_in.lpNorm<Eigen::Infinity>() : 1.0);

    int iters = 0;
    auto finish = [&](QpStatus status) {
        sol.status = status;
        sol.z = z;
        sol.iterations = iters;
        sol.eq_mult = eq_mult.size() == me ? eq_mult : Eigen::VectorXd::Zero(me);
        sol.in_mult.setZero();
        for (size_t i = 0; i < ws.active().size(); ++i)
            sol.in_mult(ws.active()[i]) = u[i];
        sol.kkt = compute_residuals(prob, sol.z, sol.eq_mult, sol.in_mult);
        if (status == QpStatus::Optimal && sol.kkt.max() > tol)
            sol.status = QpStatus::MaxIters;
        return sol;
    };
    while (true) {
        if (iters >= max_iters) return finish(QpStatus::MaxIters);

        // Most violated inactive inequality; ties go to the lowest index.
        int p = -1;
        double worst = feas_tol;
        for (int k = 0; k < mi; ++k) {
            if (ws.contains(k)) continue;
            const double v = prob.A_in.row(k).dot(z) - prob.b_in(k);
            if (v > worst) {
                worst = v;
                p = k;
            }
        }
        if (p < 0) return finish(QpStatus::Optimal);

        const Eigen::VectorXd a = prob.A_in.row(p).transpose();
        double u_p = 0.0;

        // Drive constraint p to its boundary, dropping blockers on the way.
        while (true) {
            ++iters;
            if (iters > max_iters) return finish(QpStatus::MaxIters);

            Eigen::VectorXd dz, r;
            ws.solve_kkt(a, Eigen::VectorXd::Zero(ws.size()), dz, r);

            const double slack = prob.A_in.row(p).dot(z) - prob.b_in(p);
            const double kappa = a.dot(dz);
            const double kappa_scale = std::max(a.dot(cost.solve(a)), 1e-300);
            const bool dependent = kappa <= 1e-11 * kappa_scale;
            const double t_full = dependent ? kInf : slack / kappa;

            // Dual blocking step over active inequality multipliers.
            double t_block = kInf;
            int blocker = -1;
            for (size_t idx = 0; idx < ws.active().size(); ++idx) {
                const double rk = r(me + static_cast<int>(idx));
                if (rk > 1e-12) {
                    const double t = u[idx] / rk;
                    if (t < t_block) {
                        t_block = t;
                        blocker = static_cast<int>(idx);
                    }
                }
            }

            if (t_full == kInf && t_block == kInf)
                return finish(QpStatus::Infeasible);

            const double t = std::min(t_full, t_block);
            z -= t * dz;
            if (me > 0) eq_mult -= t * r.head(me);
            for (size_t idx = 0; idx < u.size(); ++idx)
                u[idx] -= t * r(me + static_cast<int>(idx));
            u_p += t;

            if (t_full <= t_block) {
                ws.add(p);
                u.push_back(u_p);
                break;
            }
            u.erase(u.begin() + blocker);
            ws.remove_active(blocker);
        }
    }
}

QpSolution brute_force_qp(const QpProblem& prob, double tol) {
    prob.validate();
    const int n = prob.n();
    const int me = prob.num_eq();
    const int mi = prob.num_in();
    if (mi > 20)
        throw std::invalid_argument("brute_force_qp: more than 20 inequality rows");

    const double feas_tol =
        tol * std::max(1.0, mi > 0 ? prob.b_in.lpNorm<Eigen::Infinity>() : 1.0);
    const double eq_tol =
        std::sqrt(tol) * std::max(1.0, me > 0 ? prob.b_eq.lpNorm<Eigen::Infinity>() : 1.0);

    QpSolution best;
    best.status = QpStatus::Infeasible;
    best.eq_mult = Eigen::VectorXd::Zero(me);
    best.in_mult = Eigen::VectorXd::Zero(mi);
    double best_obj = kInf;

    for (unsigned long mask = 0; mask < (1UL << mi); ++mask) {
        std::vector<int> act;
        for (int k = 0; k < mi; ++k)
            if (mask & (1UL << k)) act.push_back(k);
        const int ma = static_cast<int>(act.size());
        const int m = me + ma;

        // Dense KKT system with the selected rows as equalities.
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
        Eigen::VectorXd rhs(n + m);
        K.topLeftCorner(n, n) = prob.P;
        rhs.head(n) = -prob.q;
        if (me > 0) {
            K.block(n, 0, me, n) = prob.A_eq;
            K.block(0, n, n, me) = prob.A_eq.transpose();
            rhs.segment(n, me) = prob.b_eq;
        }
        for (int i = 0; i < ma; ++i) {
            K.row(n + me + i).head(n) = prob.A_in.row(act[i]);
            K.col(n + me + i).head(n) = prob.A_in.row(act[i]).transpose();
            rhs(n + me + i) = prob.b_in(act[i]);
        }

        const Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
        if (!sol.allFinite()) continue;
        const double solve_res = (K * sol - rhs).lpNorm<Eigen::Infinity>();
        if (solve_res > 1e-6 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) continue;

        const Eigen::VectorXd z = sol.head(n);
        if (me > 0 && (prob.A_eq * z - prob.b_eq).lpNorm<Eigen::Infinity>() > eq_tol)
            continue;
        bool feasible = true;
        for (int k = 0; k < mi && feasible; ++k)
            if (prob.A_in.row(k).dot(z) - prob.b_in(k) > feas_tol) feasible = false;
        if (!feasible) continue;

        const double obj = qp_objective(prob, z);
        if (best_obj == kInf ||
            obj < best_obj - 1e-12 * std::max(1.0, std::abs(best_obj))) {
            best_obj = obj;
            best.z = z;
            best.status = QpStatus::Optimal;
            best.eq_mult = sol.segment(n, me);
            best.in_mult.setZero();
            for (int i = 0; i < ma; ++i) best.in_mult(act[i]) = sol(n + me + i);
        }
    }

    if (best.status == QpStatus::Optimal)
        best.kkt = compute_residuals(prob, best.z, best.eq_mult, best.in_mult);
    return best;
}

}  // namespace cadmm
