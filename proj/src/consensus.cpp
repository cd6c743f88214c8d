#include "cadmm/consensus.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "cadmm/collision.hpp"

namespace cadmm {

namespace {

bool symmetric_within(const Eigen::MatrixXd& M, double tol) {
    if (M.rows() != M.cols()) return false;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return es.eigenvalues().minCoeff();
}

}  // namespace

CostParams CostParams::defaults(int d) {
    CostParams cp;
    cp.Q = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    cp.Q.topLeftCorner(d, d).setIdentity();
    cp.Q.bottomRightCorner(d, d) = 0.1 * Eigen::MatrixXd::Identity(d, d);
    cp.R = 0.01 * Eigen::MatrixXd::Identity(d, d);
    cp.Qf = 10.0 * cp.Q;
    return cp;
}

void CostParams::validate(int d) const {
    if (Q.rows() != 2 * d || Q.cols() != 2 * d) throw ConfigError("Q must be 2d x 2d");
    if (R.rows() != d || R.cols() != d) throw ConfigError("R must be d x d");
    if (Qf.rows() != 2 * d || Qf.cols() != 2 * d) throw ConfigError("Qf must be 2d x 2d");
    if (!symmetric_within(Q, 1e-9) || !symmetric_within(R, 1e-9) || !symmetric_within(Qf, 1e-9)) {
        throw ConfigError("cost weights must be symmetric");
    }
    if (min_eigenvalue(Q) < -1e-10) throw ConfigError("Q must be positive semidefinite");
    if (min_eigenvalue(Qf) < -1e-10) throw ConfigError("Qf must be positive semidefinite");
    if (min_eigenvalue(R) <= 0.0) throw ConfigError("R must be positive definite");
}

void AdmmConfig::validate() const {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    if (!(eps_primal > 0.0) || !(eps_dual > 0.0)) throw ConfigError("residual thresholds must be positive");
    if (max_inner_iters < 1) throw ConfigError("max_inner_iters must be at least 1");
    if (!(qp_tol > 0.0) || qp_max_iters < 1) throw ConfigError("invalid QP solver settings");
    if (!(slack_weight > 0.0) || !(slack_quadratic > 0.0)) throw ConfigError("slack penalties must be positive");
}

const char* family_name(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::Actuator: return "actuator";
        case ConstraintFamily::Bvc: return "bvc";
        case ConstraintFamily::Collision: return "collision";
    }
    return "unknown";
}

void AgentConstraints::validate(const BlockLayout& layout) const {
    const int n_b = layout.size();
    if (A_eq.rows() != b_eq.size()) throw ConfigError("equality rows and bounds disagree");
    if (A_eq.rows() > 0 && A_eq.cols() != n_b) throw ConfigError("equality rows must span the own block");
    for (const InequalityBlock& blk : ineq) {
        if (blk.A.rows() != blk.b.size()) throw ConfigError("inequality rows and bounds disagree");
        if (blk.A.rows() > 0 && blk.A.cols() != n_b) throw ConfigError("inequality rows must span the own block");
    }
}

int AgentConstraints::total_ineq_rows() const {
    int total = 0;
    for (const InequalityBlock& blk : ineq) total += static_cast<int>(blk.A.rows());
    return total;
}

InequalityBlock actuator_box(const BlockLayout& layout, double a_max) {
    if (!(a_max > 0.0)) throw ConfigError("a_max must be positive");
    const int rows = 2 * layout.d * layout.T;
    InequalityBlock blk;
    blk.family = ConstraintFamily::Actuator;
    blk.A = Eigen::MatrixXd::Zero(rows, layout.size());
    blk.b = Eigen::VectorXd::Constant(rows, a_max);
    int r = 0;
    for (int k = 0; k < layout.T; ++k) {
        const int uo = layout.input_offset(k);
        for (int a = 0; a < layout.d; ++a) {
            blk.A(r++, uo + a) = 1.0;
            blk.A(r++, uo + a) = -1.0;
        }
    }
    return blk;
}

double local_cost(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta,
                  const AgentState& ref, const CostParams& cp) {
    const BlockLayout& L = packing.block;
    const int off = packing.block_offset(i);
    const Eigen::VectorXd xr = ref.stacked();
    double cost = 0.0;
    for (int k = 0; k < L.T; ++k) {
        const Eigen::VectorXd dx = theta.segment(off + L.state_offset(k), L.state_dim()) - xr;
        cost += dx.dot(cp.Q * dx);
        const auto u = theta.segment(off + L.input_offset(k), L.d);
        cost += u.dot(cp.R * u);
    }
    const Eigen::VectorXd dxT = theta.segment(off + L.state_offset(L.T), L.state_dim()) - xr;
    cost += dxT.dot(cp.Qf * dxT);
    return cost;
}

void accumulate_tracking_quadratic(const BlockLayout& layout, const CostParams& cp,
                                   const AgentState& ref, int offset, Eigen::MatrixXd& P,
                                   Eigen::VectorXd& q) {
    const int sd = layout.state_dim();
    const Eigen::VectorXd xr = ref.stacked();
    const Eigen::VectorXd lin = -2.0 * (cp.Q * xr);
    const Eigen::VectorXd linT = -2.0 * (cp.Qf * xr);
    for (int k = 0; k < layout.T; ++k) {
        const int so = offset + layout.state_offset(k);
        P.block(so, so, sd, sd) += 2.0 * cp.Q;
        q.segment(so, sd) += lin;
        const int uo = offset + layout.input_offset(k);
        P.block(uo, uo, layout.d, layout.d) += 2.0 * cp.R;
    }
    const int soT = offset + layout.state_offset(layout.T);
    P.block(soT, soT, sd, sd) += 2.0 * cp.Qf;
    q.segment(soT, sd) += linT;
}

namespace {

/// Scaffolding shared by the reduced update and the full-size oracle
/// assembly: the consensus penalty and dual term written over the full
/// vector as (1/2) p_pen ||theta||^2 + q_full . theta + const.
struct PenaltyTerms {
    double p_pen = 0.0;
    Eigen::VectorXd q_full;
};

PenaltyTerms penalty_terms(const Eigen::VectorXd& theta_own, const NeighborView& neighbors,
                           const Eigen::VectorXd& lambda, double rho) {
    PenaltyTerms t;
    const int deg = static_cast<int>(neighbors.size());
    t.p_pen = 2.0 * rho * deg;
    t.q_full = lambda;
    if (deg > 0) {
        Eigen::VectorXd sum = static_cast<double>(deg) * theta_own;
        for (const auto& [j, payload] : neighbors) {
            (void)j;
            sum += *payload;
        }
        t.q_full.noalias() -= rho * sum;
    }
    return t;
}

void check_coupling_rows(const GlobalPacking& packing, int i, const std::vector<CouplingRow>& coupling) {
    const BlockLayout& L = packing.block;
    for (const CouplingRow& row : coupling) {
        if (row.neighbor == i || row.neighbor < 0 || row.neighbor >= packing.N) {
            throw std::invalid_argument("coupling row neighbor out of range");
        }
        if (row.step < 1 || row.step > L.T) throw std::invalid_argument("coupling row step out of range");
        if (row.own_coeff.size() != L.d || row.neighbor_coeff.size() != L.d) {
            throw std::invalid_argument("coupling row coefficient dimension mismatch");
        }
    }
}

}  // namespace

LocalCopy primal_update(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta_own,
                        const NeighborView& neighbors, const Eigen::VectorXd& lambda,
                        const AgentConstraints& cons, const std::vector<CouplingRow>& coupling,
                        bool allow_relaxation, const AdmmConfig& cfg, const CostParams& cp,
                        const AgentState& ref, PrimalUpdateInfo* info) {
    const BlockLayout& L = packing.block;
    const int n_b = L.size();
    const int full = packing.dim();
    const int off = packing.block_offset(i);
    if (theta_own.size() != full || lambda.size() != full) {
        throw std::invalid_argument("copy or dual length does not match the packing");
    }
    check_coupling_rows(packing, i, coupling);

    const PenaltyTerms pen = penalty_terms(theta_own, neighbors, lambda, cfg.rho);

    // Coordinates outside the own block enter the objective only through the
    // diagonal consensus penalty, so any of them not named by a coupling row
    // can be eliminated in closed form before the constrained solve.
    std::vector<int> retained;
    retained.reserve(n_b + coupling.size() * L.d);
    for (int c = 0; c < n_b; ++c) retained.push_back(off + c);
    for (const CouplingRow& row : coupling) {
        const int base = packing.position_index(row.neighbor, row.step);
        for (int a = 0; a < L.d; ++a) retained.push_back(base + a);
    }
    std::sort(retained.begin(), retained.end());
    retained.erase(std::unique(retained.begin(), retained.end()), retained.end());
    const int nret = static_cast<int>(retained.size());

    auto reduced_of = [&retained](int g) {
        return static_cast<int>(std::lower_bound(retained.begin(), retained.end(), g) -
                                retained.begin());
    };
    const int own_r0 = reduced_of(off);

    const auto& families = cons.ineq;
    // num_families/with_coupling carve out constraint subsets for the
    // infeasibility diagnosis; the main solve uses everything.
    auto build = [&](std::size_t num_families, bool with_coupling, bool with_slack) {
        const int n = nret + (with_slack ? 1 : 0);
        QpProblem p;
        p.P = Eigen::MatrixXd::Zero(n, n);
        p.q = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < nret; ++c) {
            p.P(c, c) = pen.p_pen;
            p.q(c) = pen.q_full(retained[c]);
        }
        accumulate_tracking_quadratic(L, cp, ref, own_r0, p.P, p.q);
        if (with_slack) {
            p.P(n - 1, n - 1) = 2.0 * cfg.slack_quadratic;
            p.q(n - 1) = cfg.slack_weight;
        }
        p.A_eq = Eigen::MatrixXd::Zero(cons.A_eq.rows(), n);
        if (cons.A_eq.rows() > 0) p.A_eq.block(0, own_r0, cons.A_eq.rows(), n_b) = cons.A_eq;
        p.b_eq = cons.b_eq;

        int total = 0;
        for (std::size_t f = 0; f < num_families; ++f) total += static_cast<int>(families[f].A.rows());
        if (with_coupling) total += static_cast<int>(coupling.size());
        if (with_slack) total += 1;
        p.A_in = Eigen::MatrixXd::Zero(total, n);
        p.b_in = Eigen::VectorXd::Zero(total);
        int r = 0;
        for (std::size_t f = 0; f < num_families; ++f) {
            const int rows = static_cast<int>(families[f].A.rows());
            if (rows > 0) {
                p.A_in.block(r, own_r0, rows, n_b) = families[f].A;
                p.b_in.segment(r, rows) = families[f].b;
            }
            r += rows;
        }
        if (with_coupling) {
            for (const CouplingRow& row : coupling) {
                const int g_own = packing.position_index(i, row.step);
                const int g_nb = packing.position_index(row.neighbor, row.step);
                const int r_nb = reduced_of(g_nb);
                for (int a = 0; a < L.d; ++a) {
                    p.A_in(r, own_r0 + (g_own - off) + a) = row.own_coeff(a);
                    p.A_in(r, r_nb + a) = row.neighbor_coeff(a);
                }
                p.b_in(r) = row.ub;
                if (with_slack) p.A_in(r, n - 1) = -1.0;
                ++r;
            }
        }
        if (with_slack) {
            p.A_in(r, n - 1) = -1.0;
            p.b_in(r) = 0.0;
        }
        return p;
    };

    auto diagnose = [&]() -> std::string {
        QpSolution probe = solve_qp(build(0, false, false), cfg.qp_tol, cfg.qp_max_iters);
        if (probe.status == QpStatus::Infeasible) return "dynamics equalities";
        for (std::size_t f = 0; f < families.size(); ++f) {
            probe = solve_qp(build(f + 1, false, false), cfg.qp_tol, cfg.qp_max_iters);
            if (probe.status == QpStatus::Infeasible) return family_name(families[f].family);
        }
        return "collision";
    };

    QpSolution sol = solve_qp(build(families.size(), true, false), cfg.qp_tol, cfg.qp_max_iters);
    bool relaxed = false;
    if (sol.status == QpStatus::Infeasible && allow_relaxation && !coupling.empty()) {
        sol = solve_qp(build(families.size(), true, true), cfg.qp_tol, cfg.qp_max_iters);
        relaxed = true;
    }
    if (sol.status == QpStatus::Infeasible) {
        throw AgentFailure(i, std::string("primal subproblem infeasible (family: ") + diagnose() + ")");
    }
    if (sol.status != QpStatus::Optimal) {
        throw AgentFailure(i, "primal QP did not reach tolerance (KKT residual " +
                                  std::to_string(sol.kkt.max()) + ")");
    }
    if (info != nullptr) {
        info->status = sol.status;
        info->relaxed = relaxed;
        info->qp_iterations = sol.iterations;
    }

    LocalCopy out;
    out.owner = i;
    if (pen.p_pen > 0.0) {
        out.theta = pen.q_full / (-pen.p_pen);
    } else {
        out.theta = theta_own;
    }
    for (int c = 0; c < nret; ++c) out.theta(retained[c]) = sol.z(c);
    return out;
}

QpProblem assemble_primal_qp(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta_own,
                             const NeighborView& neighbors, const Eigen::VectorXd& lambda,
                             const AgentConstraints& cons, const std::vector<CouplingRow>& coupling,
                             const AdmmConfig& cfg, const CostParams& cp, const AgentState& ref) {
    const BlockLayout& L = packing.block;
    const int n_b = L.size();
    const int full = packing.dim();
    const int off = packing.block_offset(i);
    if (theta_own.size() != full || lambda.size() != full) {
        throw std::invalid_argument("copy or dual length does not match the packing");
    }
    check_coupling_rows(packing, i, coupling);
    const PenaltyTerms pen = penalty_terms(theta_own, neighbors, lambda, cfg.rho);

    QpProblem p;
    p.P = pen.p_pen * Eigen::MatrixXd::Identity(full, full);
    p.q = pen.q_full;
    accumulate_tracking_quadratic(L, cp, ref, off, p.P, p.q);

    p.A_eq = Eigen::MatrixXd::Zero(cons.A_eq.rows(), full);
    if (cons.A_eq.rows() > 0) p.A_eq.block(0, off, cons.A_eq.rows(), n_b) = cons.A_eq;
    p.b_eq = cons.b_eq;

    int total = cons.total_ineq_rows() + static_cast<int>(coupling.size());
    p.A_in = Eigen::MatrixXd::Zero(total, full);
    p.b_in = Eigen::VectorXd::Zero(total);
    int r = 0;
    for (const InequalityBlock& blk : cons.ineq) {
        const int rows = static_cast<int>(blk.A.rows());
        if (rows > 0) {
            p.A_in.block(r, off, rows, n_b) = blk.A;
            p.b_in.segment(r, rows) = blk.b;
        }
        r += rows;
    }
    for (const CouplingRow& row : coupling) {
        const int g_own = packing.position_index(i, row.step);
        const int g_nb = packing.position_index(row.neighbor, row.step);
        for (int a = 0; a < L.d; ++a) {
            p.A_in(r, g_own + a) = row.own_coeff(a);
            p.A_in(r, g_nb + a) = row.neighbor_coeff(a);
        }
        p.b_in(r) = row.ub;
        ++r;
    }
    return p;
}

DualState dual_update(const DualState& prev, const Eigen::VectorXd& theta_own_next,
                      const NeighborView& neighbors_next, double rho) {
    DualState next;
    next.owner = prev.owner;
    next.lambda = prev.lambda;
    for (const auto& [j, payload] : neighbors_next) {
        (void)j;
        next.lambda += rho * (theta_own_next - *payload);
    }
    return next;
}

ResidualRecord compute_residuals(int iter, const GlobalPacking& packing, const NeighborGraph& graph,
                                 const std::vector<LocalCopy>& copies,
                                 const std::vector<DualState>& duals_prev,
                                 const std::vector<DualState>& duals_next,
                                 const std::vector<AgentState>& refs, const CostParams& cp) {
    ResidualRecord rec;
    rec.iter = iter;
    for (int i = 0; i < packing.N; ++i) {
        for (int j = 0; j < graph.N; ++j) {
            if (!graph.edge(i, j)) continue;
            rec.primal = std::max(rec.primal, (copies[i].theta - copies[j].theta).norm());
        }
        rec.dual = std::max(rec.dual, (duals_next[i].lambda - duals_prev[i].lambda).norm());
        rec.global_objective += local_cost(packing, i, copies[i].theta, refs[i], cp);
    }
    return rec;
}

void ConsensusProblem::validate() const {
    if (packing.N < 1) throw ConfigError("need at least one agent");
    if (graph.N != packing.N) throw ConfigError("graph size does not match agent count");
    cfg.validate();
    cp.validate(packing.block.d);
    if (static_cast<int>(refs.size()) != packing.N) throw ConfigError("one reference per agent required");
    if (static_cast<int>(cons.size()) != packing.N) throw ConfigError("one constraint set per agent required");
    for (const AgentConstraints& c : cons) c.validate(packing.block);
    if (collision.has_value()) collision->validate();
    graph.require_connected();
}

Eigen::VectorXd straight_line_init(const GlobalPacking& packing,
                                   const std::vector<AgentState>& current,
                                   const std::vector<AgentState>& refs) {
    const BlockLayout& L = packing.block;
    if (static_cast<int>(current.size()) != packing.N || static_cast<int>(refs.size()) != packing.N) {
        throw std::invalid_argument("need one current state and one reference per agent");
    }
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(packing.dim());
    for (int a = 0; a < packing.N; ++a) {
        const int off = packing.block_offset(a);
        const Eigen::VectorXd p0 = current[a].position;
        const Eigen::VectorXd dp = refs[a].position - p0;
        for (int k = 0; k <= L.T; ++k) {
            const double alpha = static_cast<double>(k) / static_cast<double>(L.T);
            theta.segment(off + L.position_offset(k), L.d) = p0 + alpha * dp;
        }
    }
    return theta;
}

namespace {

struct IterationWorkspace {
    std::vector<LocalCopy> new_copies;
    std::vector<DualState> new_duals;
    std::vector<PrimalUpdateInfo> infos;
};

}  // namespace

AdmmResult run_admm(const ConsensusProblem& problem, std::vector<LocalCopy> copies,
                    std::vector<DualState> duals, SyncTransport& transport, bool threaded) {
    problem.validate();
    const GlobalPacking& packing = problem.packing;
    const NeighborGraph& graph = problem.graph;
    const AdmmConfig& cfg = problem.cfg;
    const int N = packing.N;
    if (static_cast<int>(copies.size()) != N || static_cast<int>(duals.size()) != N) {
        throw std::invalid_argument("need one copy and one dual per agent");
    }
    for (int a = 0; a < N; ++a) {
        if (copies[a].theta.size() != packing.dim() || duals[a].lambda.size() != packing.dim()) {
            throw std::invalid_argument("copy or dual length does not match the packing");
        }
        copies[a].owner = a;
        duals[a].owner = a;
    }
    if (transport.graph().N != N) throw std::invalid_argument("transport graph size mismatch");

    std::vector<std::vector<int>> nbrs(N);
    for (int a = 0; a < N; ++a) nbrs[a] = graph.neighbors(a);

    std::vector<LinearizationState> lin;
    if (problem.collision.has_value()) {
        lin.reserve(N);
        for (int a = 0; a < N; ++a) lin.emplace_back(a, packing.block.d, problem.lin_seed);
    }

    AdmmResult res;
    res.trace.push_back(compute_residuals(0, packing, graph, copies, duals, duals, problem.refs, problem.cp));

    IterationWorkspace ws;
    ws.new_copies.resize(N);
    ws.new_duals.resize(N);
    ws.infos.resize(N);

    auto primal_phase = [&](int a, const std::vector<SyncTransport::Inbox>& inboxes) {
        std::vector<CouplingRow> rows;
        if (problem.collision.has_value()) {
            rows = linearize_collision(packing, a, copies[a].theta, nbrs[a], *problem.collision, lin[a]);
        }
        ws.new_copies[a] = primal_update(packing, a, copies[a].theta, inboxes[a].messages,
                                         duals[a].lambda, problem.cons[a], rows,
                                         problem.collision.has_value(), cfg, problem.cp,
                                         problem.refs[a], &ws.infos[a]);
    };
    auto dual_phase = [&](int a, const std::vector<SyncTransport::Inbox>& inboxes) {
        ws.new_duals[a] = dual_update(duals[a], ws.new_copies[a].theta, inboxes[a].messages, cfg.rho);
    };
    // Runs after both phases; returns true when the stopping rule fires.
    // The thresholds must hold at two consecutive records: with identical
    // initial copies the residuals can hit exact zero one iteration before
    // the primal updates move again, and a single-record check would stop
    // there with the plans far from stationary.
    auto commit_iteration = [&](int iter) {
        ResidualRecord rec = compute_residuals(iter, packing, graph, ws.new_copies, duals,
                                               ws.new_duals, problem.refs, problem.cp);
        for (int a = 0; a < N; ++a) {
            rec.relaxed = rec.relaxed || ws.infos[a].relaxed;
            res.qp_iterations_total += ws.infos[a].qp_iterations;
        }
        const ResidualRecord& prev = res.trace.back();
        const bool prev_ok = prev.primal <= cfg.eps_primal && prev.dual <= cfg.eps_dual;
        copies.swap(ws.new_copies);
        duals.swap(ws.new_duals);
        res.trace.push_back(rec);
        return prev_ok && rec.primal <= cfg.eps_primal && rec.dual <= cfg.eps_dual;
    };
    auto make_outbox = [N](const std::vector<LocalCopy>& src) {
        std::vector<Eigen::VectorXd> outbox(N);
        for (int a = 0; a < N; ++a) outbox[a] = src[a].theta;
        return outbox;
    };

    int round = 0;
    if (!threaded) {
        for (int iter = 1; iter <= cfg.max_inner_iters; ++iter) {
            const auto in1 = transport.exchange(round++, make_outbox(copies));
            for (int a = 0; a < N; ++a) primal_phase(a, in1);
            const auto in2 = transport.exchange(round++, make_outbox(ws.new_copies));
            for (int a = 0; a < N; ++a) dual_phase(a, in2);
            res.iterations = iter;
            if (commit_iteration(iter)) {
                res.status = AdmmStatus::Converged;
                break;
            }
        }
        if (res.status != AdmmStatus::Converged) res.status = AdmmStatus::MaxIters;
    } else {
        struct Shared {
            int phase = 0;
            int iter = 0;
            bool stop = false;
            std::vector<SyncTransport::Inbox> in1, in2;
            std::exception_ptr error;
            std::mutex error_mutex;
        } shared;

        auto record_error = [&shared]() {
            std::lock_guard<std::mutex> lock(shared.error_mutex);
            if (!shared.error) shared.error = std::current_exception();
        };

        auto completion = [&]() noexcept {
            try {
                if (shared.error) {
                    shared.stop = true;
                } else if (shared.phase == 0) {
                    ++shared.iter;
                    if (shared.iter > cfg.max_inner_iters) {
                        shared.stop = true;
                        res.iterations = cfg.max_inner_iters;
                        res.status = AdmmStatus::MaxIters;
                    } else {
                        shared.in1 = transport.exchange(round++, make_outbox(copies));
                    }
                } else if (shared.phase == 1) {
                    shared.in2 = transport.exchange(round++, make_outbox(ws.new_copies));
                } else {
                    res.iterations = shared.iter;
                    if (commit_iteration(shared.iter)) {
                        shared.stop = true;
                        res.status = AdmmStatus::Converged;
                    }
                }
                shared.phase = (shared.phase + 1) % 3;
            } catch (...) {
                shared.error = std::current_exception();
                shared.stop = true;
            }
        };

        std::barrier sync(N, completion);
        auto worker = [&](int a) {
            while (true) {
                sync.arrive_and_wait();
                if (shared.stop) break;
                try {
                    primal_phase(a, shared.in1);
                } catch (...) {
                    record_error();
                    ws.new_copies[a] = copies[a];
                }
                sync.arrive_and_wait();
                if (shared.stop) break;
                dual_phase(a, shared.in2);
                sync.arrive_and_wait();
                if (shared.stop) break;
            }
        };

        std::vector<std::thread> threads;
        threads.reserve(N);
        for (int a = 0; a < N; ++a) threads.emplace_back(worker, a);
        for (std::thread& t : threads) t.join();
        if (shared.error) std::rethrow_exception(shared.error);
    }

    res.copies = std::move(copies);
    res.duals = std::move(duals);
    return res;
}

}  // namespace cadmm
