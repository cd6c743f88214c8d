#ifndef CADMM_QP_HPP
#define CADMM_QP_HPP

#include <Eigen/Dense>
#include <string>

namespace cadmm {

/// Dense convex QP in canonical form:
///   min  1/2 z'Pz + q'z
///   s.t. A_eq z = b_eq,  A_in z <= b_in
struct QpProblem {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;
    Eigen::VectorXd b_in;

    int n() const { return static_cast<int>(q.size()); }
    int num_eq() const { return static_cast<int>(b_eq.size()); }
    int num_in() const { return static_cast<int>(b_in.size()); }

    /// Throws std::invalid_argument on inconsistent dimensions, non-finite
    /// entries, or an asymmetric P (tolerance 1e-10, scaled).
    void validate() const;
};

enum class QpStatus { Optimal, MaxIters, Infeasible };

const char* to_string(QpStatus s);

/// Infinity norms of the four KKT conditions at the returned point.
struct KktResiduals {
    double stationarity = 0.0;
    double eq = 0.0;
    double ineq = 0.0;
    double comp = 0.0;

    double max() const;
};

struct QpSolution {
    Eigen::VectorXd z;
    QpStatus status = QpStatus::MaxIters;
    KktResiduals kkt;
    Eigen::VectorXd eq_mult;  ///< multipliers of the equality rows
    Eigen::VectorXd in_mult;  ///< multipliers of the inequality rows (>= 0)
    int iterations = 0;
    bool regularized = false;  ///< true if P received the +1e-9 I bump
};

double qp_objective(const QpProblem& prob, const Eigen::VectorXd& z);

/// Dual active-set solve (Goldfarb-Idnani scheme). Deterministic for fixed
/// inputs: constraint selection always breaks ties toward the lowest row
/// index. status == Optimal guarantees every KKT residual <= tol.
QpSolution solve_qp(const QpProblem& prob, double tol = 1e-8, int max_iters = 20000);

/// Test oracle: enumerates every active set of the inequality rows, solves
/// the corresponding equality-constrained KKT system directly, and returns
/// the feasible candidate with the smallest objective. Independent of the
/// solve_qp code path. Requires m_i <= 20 and strictly convex P.
QpSolution brute_force_qp(const QpProblem& prob, double tol = 1e-8);

}  // namespace cadmm

#endif  // CADMM_QP_HPP
