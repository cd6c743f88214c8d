#ifndef CADMM_MPC_HPP
#define CADMM_MPC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cadmm/collision.hpp"
#include "cadmm/consensus.hpp"
#include "cadmm/dynamics.hpp"
#include "cadmm/network.hpp"

namespace cadmm {

enum class Variant { Convex, Nonconvex };
const char* variant_name(Variant v);

enum class MpcStopReason { GoalsReached, ObjectiveStalled, MaxOuterSteps };
const char* stop_reason_name(MpcStopReason r);

struct MpcConfig {
    double pos_tol = 0.05;
    double vel_tol = 0.05;
    double obj_tol = 1e-4;
    int obj_window = 5;
    int max_outer_steps = 200;
    bool warm_start = true;          // convex variant: shift last plans by one step
    bool noncvx_warm_start = false;  // nonconvex default: restart from the straight line
    bool threaded = false;

    void validate() const;
};

/// Everything needed to run the receding-horizon loop on one scenario.
struct MpcSetup {
    GlobalPacking packing;
    NeighborGraph graph;
    DiscreteLinearDynamics dyn;
    HorizonConfig horizon;
    CostParams cp;
    AdmmConfig admm;
    MpcConfig cfg;
    Variant variant = Variant::Convex;
    double d_min = 0.3;
    double a_max = 2.0;
    std::vector<AgentState> starts;
    std::vector<AgentState> goals;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StepTrace {
    int step = 0;
    int iterations = 0;
    AdmmStatus status = AdmmStatus::MaxIters;
    bool any_relaxed = false;
    double objective = 0.0;  // final recorded global objective of the inner solve
    std::vector<ResidualRecord> residuals;
    std::vector<Eigen::VectorXd> applied_inputs;  // one per agent, own first input
};

struct MpcState {
    int t = 0;
    std::vector<std::vector<AgentState>> history;  // per agent; history[a][0] is the start
    std::vector<AgentState> current;
    long cumulative_inner_iterations = 0;
    std::vector<StepTrace> traces;
    std::vector<LocalCopy> copies;  // last inner solution, feeds the warm start
    std::vector<DualState> duals;
};

/// Shifts every block of a plan vector one step forward, repeating the last
/// state and input.
Eigen::VectorXd shift_plan(const GlobalPacking& packing, const Eigen::VectorXd& theta);

MpcState init_mpc(const MpcSetup& setup);

/// Assembles the consensus problem for the current step: dynamics equalities
/// and actuator boxes always, cells from current positions for the convex
/// variant, the pairwise-distance coupling spec for the nonconvex one. Also
/// usable standalone for a single trajectory solve without the outer loop.
ConsensusProblem build_step_problem(const MpcSetup& setup, const MpcState& state);

/// One receding-horizon step: rebuild constraints from the current states
/// (fresh cells for the convex variant; the nonconvex variant re-linearizes
/// inside the solve), run the inner consensus iteration, apply each agent's
/// own first input, advance the dynamics. Throws AgentFailure without
/// touching `state` if the inner solve fails.
void mpc_step(const MpcSetup& setup, MpcState& state, SyncTransport& transport);

struct MpcRun {
    MpcState state;
    MpcStopReason stop = MpcStopReason::MaxOuterSteps;
    long messages_delivered = 0;
    std::vector<ReadRecord> locality_violations;
};

/// Runs mpc_step until all agents are at their goals (within pos_tol and
/// vel_tol), the objective stops decreasing over obj_window steps, or
/// max_outer_steps.
MpcRun run_mpc(const MpcSetup& setup);

/// Same loop over caller-owned state and transport, so the partial history
/// survives a thrown step failure.
MpcStopReason run_mpc_loop(const MpcSetup& setup, MpcState& state, SyncTransport& transport);

}  // namespace cadmm

#endif  // CADMM_MPC_HPP
