#include "cadmm/mpc.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cadmm/bvc.hpp"
#include "cadmm/rng.hpp"

namespace cadmm {

const char* variant_name(Variant v) {
    return v == Variant::Convex ? "convex" : "nonconvex";
}

const char* stop_reason_name(MpcStopReason r) {
    switch (r) {
        case MpcStopReason::GoalsReached: return "goals_reached";
        case MpcStopReason::ObjectiveStalled: return "objective_stalled";
        case MpcStopReason::MaxOuterSteps: return "max_outer_steps";
    }
    return "unknown";
}

void MpcConfig::validate() const {
    if (!(pos_tol > 0.0) || !(vel_tol > 0.0)) throw ConfigError("stop tolerances must be positive");
    if (!(obj_tol > 0.0)) throw ConfigError("obj_tol must be positive");
    if (obj_window < 1) throw ConfigError("obj_window must be at least 1");
    if (max_outer_steps < 1) throw ConfigError("max_outer_steps must be at least 1");
}

void MpcSetup::validate() const {
    horizon.validate();
    cfg.validate();
    admm.validate();
    cp.validate(packing.block.d);
    if (graph.N != packing.N) throw ConfigError("graph size does not match agent count");
    if (dyn.d != packing.block.d) throw ConfigError("dynamics dimension mismatch");
    if (dyn.dt != horizon.dt) throw ConfigError("dynamics sampling period mismatch");
    if (packing.block.T != horizon.T) throw ConfigError("horizon length mismatch");
    if (static_cast<int>(starts.size()) != packing.N || static_cast<int>(goals.size()) != packing.N) {
        throw ConfigError("need one start and one goal per agent");
    }
    for (const AgentState& s : starts) s.validate();
    for (const AgentState& g : goals) g.validate();
    if (!(d_min > 0.0)) throw ConfigError("d_min must be positive");
    if (!(a_max > 0.0)) throw ConfigError("a_max must be positive");
    graph.require_connected();
}

Eigen::VectorXd shift_plan(const GlobalPacking& packing, const Eigen::VectorXd& theta) {
    const BlockLayout& L = packing.block;
    if (theta.size() != packing.dim()) {
        throw std::invalid_argument("plan vector length does not match the packing");
    }
    Eigen::VectorXd out(theta.size());
    const int sd = L.state_dim();
    for (int a = 0; a < packing.N; ++a) {
        const int off = packing.block_offset(a);
        for (int k = 0; k < L.T; ++k) {
            out.segment(off + L.state_offset(k), sd) = theta.segment(off + L.state_offset(k + 1), sd);
        }
        out.segment(off + L.state_offset(L.T), sd) = theta.segment(off + L.state_offset(L.T), sd);
        for (int k = 0; k + 1 < L.T; ++k) {
            out.segment(off + L.input_offset(k), L.d) = theta.segment(off + L.input_offset(k + 1), L.d);
        }
        out.segment(off + L.input_offset(L.T - 1), L.d) =
            theta.segment(off + L.input_offset(L.T - 1), L.d);
    }
    return out;
}

MpcState init_mpc(const MpcSetup& setup) {
    setup.validate();
    MpcState state;
    state.history.resize(setup.packing.N);
    for (int a = 0; a < setup.packing.N; ++a) state.history[a].push_back(setup.starts[a]);
    state.current = setup.starts;
    return state;
}

ConsensusProblem build_step_problem(const MpcSetup& setup, const MpcState& state) {
    const GlobalPacking& packing = setup.packing;
    const int N = packing.N;
    const int d = packing.block.d;

    ConsensusProblem problem;
    problem.packing = packing;
    problem.graph = setup.graph;
    problem.cp = setup.cp;
    problem.cfg = setup.admm;
    problem.refs = setup.goals;
    problem.lin_seed = mix_seed(setup.seed, static_cast<std::uint64_t>(state.t));
    if (setup.variant == Variant::Nonconvex) {
        problem.collision = CollisionConstraintSpec{setup.d_min};
    }

    Eigen::MatrixXd positions(N, d);
    for (int a = 0; a < N; ++a) positions.row(a) = state.current[a].position.transpose();

    problem.cons.resize(N);
    for (int a = 0; a < N; ++a) {
        AgentConstraints& cons = problem.cons[a];
        auto [A_eq, b_eq] = stack_dynamics_constraints(setup.dyn, setup.horizon, state.current[a]);
        cons.A_eq = std::move(A_eq);
        cons.b_eq = std::move(b_eq);
        cons.ineq.push_back(actuator_box(packing.block, setup.a_max));
        if (setup.variant == Variant::Convex) {
            const BvcSet bvc =
                build_bvc(a, positions, setup.d_min / 2.0, setup.graph.neighbors(a));
            auto [A_in, b_in] = bvc_to_rows(bvc, setup.horizon, packing.block);
            cons.ineq.push_back(InequalityBlock{ConstraintFamily::Bvc, std::move(A_in), std::move(b_in)});
        }
    }
    return problem;
}

namespace {

bool warm_start_enabled(const MpcSetup& setup) {
    return setup.variant == Variant::Convex ? setup.cfg.warm_start : setup.cfg.noncvx_warm_start;
}

}  // namespace

void mpc_step(const MpcSetup& setup, MpcState& state, SyncTransport& transport) {
    const GlobalPacking& packing = setup.packing;
    const int N = packing.N;

    if (setup.variant == Variant::Convex) {
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j) {
                const double dist = (state.current[i].position - state.current[j].position).norm();
                if (dist < setup.d_min - 1e-9) {
                    throw std::runtime_error(
                        "convex step requires pairwise separation of at least d_min; pair (" +
                        std::to_string(i) + "," + std::to_string(j) + ") is at " +
                        std::to_string(dist));
                }
            }
        }
    }

    const ConsensusProblem problem = build_step_problem(setup, state);

    std::vector<LocalCopy> copies(N);
    std::vector<DualState> duals(N);
    if (warm_start_enabled(setup) && state.t > 0 && !state.copies.empty()) {
        for (int a = 0; a < N; ++a) {
            copies[a] = LocalCopy{a, shift_plan(packing, state.copies[a].theta)};
        }
    } else {
        const Eigen::VectorXd init = straight_line_init(packing, state.current, setup.goals);
        for (int a = 0; a < N; ++a) copies[a] = LocalCopy{a, init};
    }
    for (int a = 0; a < N; ++a) duals[a] = DualState{a, Eigen::VectorXd::Zero(packing.dim())};

    AdmmResult result = run_admm(problem, std::move(copies), std::move(duals), transport,
                                 setup.cfg.threaded);

    StepTrace trace;
    trace.step = state.t;
    trace.iterations = result.iterations;
    trace.status = result.status;
    trace.objective = result.trace.back().global_objective;
    for (const ResidualRecord& rec : result.trace) trace.any_relaxed = trace.any_relaxed || rec.relaxed;
    trace.residuals = std::move(result.trace);
    trace.applied_inputs.resize(N);

    for (int a = 0; a < N; ++a) {
        const int off = packing.block_offset(a);
        trace.applied_inputs[a] =
            result.copies[a].theta.segment(off + packing.block.input_offset(0), packing.block.d);
        const AgentState next = step(setup.dyn, state.current[a], trace.applied_inputs[a]);
        state.history[a].push_back(next);
        state.current[a] = next;
    }
    state.cumulative_inner_iterations += result.iterations;
    state.copies = std::move(result.copies);
    state.duals = std::move(result.duals);
    state.traces.push_back(std::move(trace));
    ++state.t;
}

namespace {

bool goals_reached(const MpcSetup& setup, const MpcState& state) {
    for (int a = 0; a < setup.packing.N; ++a) {
        const double pos_err = (state.current[a].position - setup.goals[a].position).norm();
        const double speed = state.current[a].velocity.norm();
        if (pos_err > setup.cfg.pos_tol || speed > setup.cfg.vel_tol) return false;
    }
    return true;
}

}  // namespace

MpcStopReason run_mpc_loop(const MpcSetup& setup, MpcState& state, SyncTransport& transport) {
    while (true) {
        if (goals_reached(setup, state)) return MpcStopReason::GoalsReached;
        const int t = state.t;
        if (t > setup.cfg.obj_window) {
            const double before = state.traces[t - 1 - setup.cfg.obj_window].objective;
            const double now = state.traces[t - 1].objective;
            if (before - now < setup.cfg.obj_tol) return MpcStopReason::ObjectiveStalled;
        }
        if (t >= setup.cfg.max_outer_steps) return MpcStopReason::MaxOuterSteps;
        mpc_step(setup, state, transport);
    }
}

MpcRun run_mpc(const MpcSetup& setup) {
    MpcRun run;
    run.state = init_mpc(setup);
    SyncTransport transport(setup.graph);
    run.stop = run_mpc_loop(setup, run.state, transport);
    run.messages_delivered = transport.messages_delivered();
    run.locality_violations = audit_locality(setup.graph, transport.trace());
    return run;
}

}  // namespace cadmm
