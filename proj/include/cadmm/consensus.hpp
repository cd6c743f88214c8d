#ifndef CADMM_CONSENSUS_HPP
#define CADMM_CONSENSUS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cadmm/dynamics.hpp"
#include "cadmm/network.hpp"
#include "cadmm/packing.hpp"
#include "cadmm/qp.hpp"
#include "cadmm/types.hpp"

namespace cadmm {

class LinearizationState;

/// Pairwise minimum-distance requirement ||p_i(k) - p_j(k)|| >= d_min for
/// every neighbor pair at steps k = 1..T (step 0 is fixed by the initial
/// condition). d_min = 0 disables the constraint entirely: no rows are
/// emitted and the iteration matches the unconstrained convex variant.
struct CollisionConstraintSpec {
    double d_min = 0.3;

    void validate() const;
};

/// Tracking cost weights shared by all agents. Q weighs state deviation at
/// steps 0..T-1, Qf at the terminal step, R the inputs. The cost carries no
/// 1/2 factor: L = sum (x-ref)'Q(x-ref) + u'Ru + terminal.
struct CostParams {
    Eigen::MatrixXd Q;   // 2d x 2d, PSD
    Eigen::MatrixXd R;   // d x d, PD
    Eigen::MatrixXd Qf;  // 2d x 2d, PSD

    static CostParams defaults(int d);
    void validate(int d) const;
};

struct AdmmConfig {
    double rho = 1.0;
    double eps_primal = 1e-3;  // absolute threshold on the consensus residual
    double eps_dual = 1e-3;    // absolute threshold on the dual-change residual
    int max_inner_iters = 5000;
    double qp_tol = 1e-8;
    int qp_max_iters = 20000;
    double slack_weight = 1e4;    // linear penalty on the relaxation slack
    double slack_quadratic = 1.0; // quadratic penalty keeping the slack bounded

    void validate() const;
};

/// Agent `owner`'s copy of the full decision vector (all agents' blocks).
struct LocalCopy {
    int owner = 0;
    Eigen::VectorXd theta;
};

/// Agent `owner`'s dual variable, same length as its copy.
struct DualState {
    int owner = 0;
    Eigen::VectorXd lambda;
};

struct ResidualRecord {
    int iter = 0;
    double primal = 0.0;  // max over i and neighbors j of ||theta_i - theta_j||
    double dual = 0.0;    // max over i of ||lambda_i' - lambda_i||
    double global_objective = 0.0;
    bool relaxed = false;  // some agent needed the slack this iteration
};

enum class ConstraintFamily { Actuator, Bvc, Collision };
const char* family_name(ConstraintFamily f);

/// One inequality family over the owner's block: A z_own <= b.
struct InequalityBlock {
    ConstraintFamily family = ConstraintFamily::Actuator;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

/// Per-agent constraint set. Equalities are the dynamics rows; inequality
/// families touch only the owner's block. Rows coupling the owner's block
/// with neighbor-copy blocks are passed separately as CouplingRow lists.
struct AgentConstraints {
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    std::vector<InequalityBlock> ineq;

    void validate(const BlockLayout& layout) const;
    int total_ineq_rows() const;
};

/// Linear inequality tying the owner's planned position at `step` to one
/// neighbor-copy block inside the same local vector:
///   own_coeff . p_own(step) + neighbor_coeff . p_neighbor(step) <= ub.
struct CouplingRow {
    int neighbor = 0;
    int step = 0;
    Eigen::VectorXd own_coeff;
    Eigen::VectorXd neighbor_coeff;
    double ub = 0.0;
};

struct AgentFailure : std::runtime_error {
    int agent;
    AgentFailure(int agent_id, const std::string& message)
        : std::runtime_error("agent " + std::to_string(agent_id) + ": " + message),
          agent(agent_id) {}
};

/// Inbox type shared with the transport: (sender, payload) pairs in
/// ascending sender order.
using NeighborView = std::vector<std::pair<int, const Eigen::VectorXd*>>;

/// Actuator limits as a per-axis box |u_k| <= a_max over the whole horizon.
InequalityBlock actuator_box(const BlockLayout& layout, double a_max);

/// Tracking cost of agent i evaluated on its own block of theta.
double local_cost(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta,
                  const AgentState& ref, const CostParams& cp);

/// Adds the quadratic form of the tracking cost for one block into (P, q) at
/// `offset`, using the 1/2 z'Pz + q'z convention (so P gets 2Q, 2R, 2Qf).
void accumulate_tracking_quadratic(const BlockLayout& layout, const CostParams& cp,
                                   const AgentState& ref, int offset, Eigen::MatrixXd& P,
                                   Eigen::VectorXd& q);

struct PrimalUpdateInfo {
    QpStatus status = QpStatus::Optimal;
    bool relaxed = false;
    int qp_iterations = 0;
};

/// One primal update: minimizes the local cost plus dual term plus consensus
/// penalty against the neighbor midpoints, subject to the agent's own
/// constraints and any coupling rows. Non-owner coordinates untouched by
/// constraints have a closed form and are eliminated before the QP solve.
/// Throws AgentFailure when the subproblem is infeasible (unless
/// allow_relaxation, which instead relaxes the coupling rows with one slack)
/// or the QP solver fails to reach tolerance.
LocalCopy primal_update(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta_own,
                        const NeighborView& neighbors, const Eigen::VectorXd& lambda,
                        const AgentConstraints& cons, const std::vector<CouplingRow>& coupling,
                        bool allow_relaxation, const AdmmConfig& cfg, const CostParams& cp,
                        const AgentState& ref, PrimalUpdateInfo* info = nullptr);

/// Same subproblem assembled over the full-length vector without any
/// elimination, for use as an oracle in tests.
QpProblem assemble_primal_qp(const GlobalPacking& packing, int i, const Eigen::VectorXd& theta_own,
                             const NeighborView& neighbors, const Eigen::VectorXd& lambda,
                             const AgentConstraints& cons, const std::vector<CouplingRow>& coupling,
                             const AdmmConfig& cfg, const CostParams& cp, const AgentState& ref);

/// lambda' = lambda + rho * sum_j (theta_own' - theta_j'), in ascending
/// neighbor order. Purely local arithmetic.
DualState dual_update(const DualState& prev, const Eigen::VectorXd& theta_own_next,
                      const NeighborView& neighbors_next, double rho);

/// Monitoring aggregate over all agents at one iteration.
ResidualRecord compute_residuals(int iter, const GlobalPacking& packing, const NeighborGraph& graph,
                                 const std::vector<LocalCopy>& copies,
                                 const std::vector<DualState>& duals_prev,
                                 const std::vector<DualState>& duals_next,
                                 const std::vector<AgentState>& refs, const CostParams& cp);

/// A consensus instance frozen for one inner solve. When `collision` is set
/// the nonconvex variant runs: each agent re-linearizes the min-distance
/// constraints about its own current copy every iteration.
struct ConsensusProblem {
    GlobalPacking packing;
    NeighborGraph graph;
    CostParams cp;
    AdmmConfig cfg;
    std::vector<AgentState> refs;
    std::vector<AgentConstraints> cons;
    std::optional<CollisionConstraintSpec> collision;
    std::uint64_t lin_seed = 0;

    void validate() const;
};

enum class AdmmStatus { Converged, MaxIters };

struct AdmmResult {
    std::vector<LocalCopy> copies;
    std::vector<DualState> duals;
    int iterations = 0;  // completed update rounds; trace has iterations + 1 records
    AdmmStatus status = AdmmStatus::MaxIters;
    std::vector<ResidualRecord> trace;
    long qp_iterations_total = 0;
};

/// Shared common start: straight-line position interpolation from each
/// agent's current position to its reference over the horizon, zero
/// velocities and inputs.
Eigen::VectorXd straight_line_init(const GlobalPacking& packing,
                                   const std::vector<AgentState>& current,
                                   const std::vector<AgentState>& refs);

/// Runs the consensus iteration to its stopping rule. Each iteration:
/// exchange copies, all agents update primals in lock-step from the
/// previous round's data, exchange again, all agents update duals, record
/// residuals. Stops when both residuals fall below their thresholds or at
/// max_inner_iters. `threaded` selects one worker thread per agent;
/// results are bit-identical to the serial loop.
AdmmResult run_admm(const ConsensusProblem& problem, std::vector<LocalCopy> copies,
                    std::vector<DualState> duals, SyncTransport& transport,
                    bool threaded = false);

}  // namespace cadmm

#endif  // CADMM_CONSENSUS_HPP
