#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cadmm/bvc.hpp"
#include "cadmm/consensus.hpp"
#include "cadmm/dynamics.hpp"
#include "cadmm/network.hpp"
#include "cadmm/qp.hpp"
#include "cadmm/rng.hpp"

using namespace cadmm;

namespace {

AgentConstraints basic_constraints(const BlockLayout& layout, const HorizonConfig& cfg,
                                   const AgentState& x0, double a_max) {
    AgentConstraints cons;
    const DiscreteLinearDynamics dyn = build_dynamics(layout.d, cfg.dt);
    std::tie(cons.A_eq, cons.b_eq) = stack_dynamics_constraints(dyn, cfg, x0);
    cons.ineq.push_back(actuator_box(layout, a_max));
    return cons;
}

// Centralized joint problem over all blocks: the same costs and per-agent
// constraints assembled into one QP. Test oracle only.
QpProblem joint_qp(const GlobalPacking& packing, const std::vector<AgentState>& refs,
                   const std::vector<AgentConstraints>& cons, const CostParams& cp) {
    const int dim = packing.dim();
    QpProblem prob;
    prob.P = Eigen::MatrixXd::Zero(dim, dim);
    prob.q = Eigen::VectorXd::Zero(dim);

    int eq_rows = 0, in_rows = 0;
    for (int i = 0; i < packing.N; ++i) {
        accumulate_tracking_quadratic(packing.block, cp, refs[i], packing.block_offset(i),
                                      prob.P, prob.q);
        eq_rows += static_cast<int>(cons[i].A_eq.rows());
        in_rows += cons[i].total_ineq_rows();
    }
    prob.A_eq = Eigen::MatrixXd::Zero(eq_rows, dim);
    prob.b_eq = Eigen::VectorXd::Zero(eq_rows);
    prob.A_in = Eigen::MatrixXd::Zero(in_rows, dim);
    prob.b_in = Eigen::VectorXd::Zero(in_rows);
    int er = 0, ir = 0;
    for (int i = 0; i < packing.N; ++i) {
        const int off = packing.block_offset(i);
        const int ner = static_cast<int>(cons[i].A_eq.rows());
        prob.A_eq.block(er, off, ner, packing.block.size()) = cons[i].A_eq;
        prob.b_eq.segment(er, ner) = cons[i].b_eq;
        er += ner;
        for (const InequalityBlock& blk : cons[i].ineq) {
            const int nir = static_cast<int>(blk.A.rows());
            prob.A_in.block(ir, off, nir, packing.block.size()) = blk.A;
            prob.b_in.segment(ir, nir) = blk.b;
            ir += nir;
        }
    }
    return prob;
}

}  // namespace

TEST_CASE("default cost weights") {
    const CostParams cp = CostParams::defaults(3);
    REQUIRE(cp.Q.rows() == 6);
    CHECK(cp.Q(0, 0) == 1.0);
    CHECK(cp.Q(3, 3) == 0.1);
    CHECK(cp.Q(0, 3) == 0.0);
    CHECK(cp.R(1, 1) == 0.01);
    CHECK(cp.Qf(0, 0) == 10.0);
    CHECK_NOTHROW(cp.validate(3));

    CostParams bad = cp;
    bad.R.setZero();  // not positive definite
    CHECK_THROWS_AS(bad.validate(3), ConfigError);
    CHECK_THROWS_AS(cp.validate(2), ConfigError);
}

TEST_CASE("admm config validation") {
    AdmmConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    AdmmConfig bad = cfg;
    bad.rho = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.eps_primal = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.max_inner_iters = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("actuator box covers every input axis both ways") {
    const BlockLayout layout(2, 3);
    const InequalityBlock blk = actuator_box(layout, 1.5);
    CHECK(blk.family == ConstraintFamily::Actuator);
    REQUIRE(blk.A.rows() == 12);  // 2 rows per axis per step
    REQUIRE(blk.A.cols() == layout.size());
    CHECK((blk.b.array() == 1.5).all());

    Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.size());
    for (int k = 0; k < 3; ++k)
        z.segment(layout.input_offset(k), 2) = Eigen::Vector2d(1.5, -1.5);
    CHECK(((blk.A * z - blk.b).array() <= 1e-14).all());

    z(layout.input_offset(1) + 1) = -1.6;
    CHECK((blk.A * z - blk.b).maxCoeff() > 0.0);
    // states never appear in the rows
    Eigen::VectorXd states_only = Eigen::VectorXd::Zero(layout.size());
    for (int k = 0; k <= 3; ++k)
        states_only.segment(layout.state_offset(k), 4).setConstant(99.0);
    CHECK((blk.A * states_only).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(actuator_box(layout, 0.0), ConfigError);
}

TEST_CASE("tracking cost of one block, by hand") {
    const GlobalPacking packing(2, BlockLayout(2, 1));
    const CostParams cp = CostParams::defaults(2);
    const AgentState ref(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d::Zero());

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(packing.dim());
    const int off = packing.block_offset(1);
    const BlockLayout& L = packing.block;
    theta.segment(off + L.state_offset(0), 4) << 0.0, 0.0, 0.5, 0.0;   // x0
    theta.segment(off + L.state_offset(1), 4) << 0.5, 0.2, 0.0, 0.0;   // x1
    theta.segment(off + L.input_offset(0), 2) << 2.0, -1.0;            // u0

    // Q = diag(1,1,.1,.1): step 0 gives 1 + 0.1*0.25; R term 0.01*5;
    // Qf = 10 Q at x1: 10*(0.25 + 0.04)
    const double expect = (1.0 + 0.025) + 0.05 + 2.9;
    CHECK(local_cost(packing, 1, theta, ref, cp) == doctest::Approx(expect).epsilon(1e-12));

    // agent 0's block is untouched zeros: cost is the pure offset term
    const double offset_cost = 1.0 + 10.0;  // Q and Qf position error of 1
    CHECK(local_cost(packing, 0, theta, ref, cp) == doctest::Approx(offset_cost));
}

TEST_CASE("quadratic accumulation matches the scalar cost up to a constant") {
    const GlobalPacking packing(2, BlockLayout(3, 4));
    const CostParams cp = CostParams::defaults(3);
    const AgentState ref(Eigen::Vector3d(0.4, -0.2, 1.0), Eigen::Vector3d(0.1, 0.0, -0.1));

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(packing.dim(), packing.dim());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(packing.dim());
    accumulate_tracking_quadratic(packing.block, cp, ref, packing.block_offset(1), P, q);

    Rng rng(64);
    Eigen::VectorXd t1(packing.dim()), t2(packing.dim());
    for (int c = 0; c < packing.dim(); ++c) {
        t1(c) = rng.uniform(-1.0, 1.0);
        t2(c) = rng.uniform(-1.0, 1.0);
    }
    const double quad1 = 0.5 * t1.dot(P * t1) + q.dot(t1);
    const double quad2 = 0.5 * t2.dot(P * t2) + q.dot(t2);
    const double cost1 = local_cost(packing, 1, t1, ref, cp);
    const double cost2 = local_cost(packing, 1, t2, ref, cp);
    CHECK(quad1 - quad2 == doctest::Approx(cost1 - cost2).epsilon(1e-10));
}

TEST_CASE("dual update accumulates rho-weighted disagreements") {
    DualState prev;
    prev.owner = 0;
    prev.lambda = Eigen::Vector2d(1.0, -1.0);

    const Eigen::VectorXd own = Eigen::Vector2d(2.0, 0.0);
    const Eigen::VectorXd nb1 = Eigen::Vector2d(1.0, 0.0);
    const Eigen::VectorXd nb2 = Eigen::Vector2d(0.0, 4.0);
    NeighborView view = {{1, &nb1}, {2, &nb2}};

    const DualState next = dual_update(prev, own, view, 0.5);
    CHECK(next.owner == 0);
    // 1 + 0.5*((2-1) + (2-0)) = 2.5 ; -1 + 0.5*((0-0) + (0-4)) = -3
    CHECK(next.lambda(0) == doctest::Approx(2.5));
    CHECK(next.lambda(1) == doctest::Approx(-3.0));
}

TEST_CASE("residual record aggregates the worst disagreement per family") {
    const GlobalPacking packing(3, BlockLayout(2, 1));
    NeighborGraph g;
    g.N = 3;
    g.adj.assign(9, 0);
    g.adj[0 * 3 + 1] = g.adj[1 * 3 + 0] = 1;  // only edge 0-1; 2 is isolated
    g.adj[1 * 3 + 2] = g.adj[2 * 3 + 1] = 1;  // edge 1-2

    std::vector<LocalCopy> copies(3);
    for (int a = 0; a < 3; ++a) {
        copies[a].owner = a;
        copies[a].theta = Eigen::VectorXd::Zero(packing.dim());
    }
    copies[1].theta(0) = 3.0;  // edge 0-1 disagrees by 3
    copies[2].theta(0) = 2.0;  // edge 1-2 disagrees by sqrt(2) with the line below
    copies[2].theta(packing.position_index(2, 1)) = 1.0;  // inside agent 2's own block

    std::vector<DualState> prev(3), next(3);
    for (int a = 0; a < 3; ++a) {
        prev[a].owner = next[a].owner = a;
        prev[a].lambda = Eigen::VectorXd::Zero(packing.dim());
        next[a].lambda = Eigen::VectorXd::Zero(packing.dim());
    }
    next[2].lambda(4) = -0.75;

    const std::vector<AgentState> refs(3, AgentState::zero(2));
    const ResidualRecord rec =
        compute_residuals(7, packing, g, copies, prev, next, refs, CostParams::defaults(2));
    CHECK(rec.iter == 7);
    CHECK(rec.primal == doctest::Approx(3.0));
    CHECK(rec.dual == doctest::Approx(0.75));
    // only the terminal-position error of agent 2's own copy carries cost
    CHECK(rec.global_objective == doctest::Approx(10.0));
    CHECK_FALSE(rec.relaxed);
}

TEST_CASE("straight-line start interpolates positions only") {
    const GlobalPacking packing(2, BlockLayout(2, 4));
    std::vector<AgentState> current = {
        AgentState(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(9.0, 9.0)),
        AgentState(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d::Zero())};
    std::vector<AgentState> refs = {
        AgentState(Eigen::Vector2d(2.0, -2.0), Eigen::Vector2d::Zero()),
        AgentState(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d::Zero())};

    const Eigen::VectorXd theta = straight_line_init(packing, current, refs);
    const BlockLayout& L = packing.block;
    for (int k = 0; k <= 4; ++k) {
        const double a = k / 4.0;
        CHECK(theta(packing.position_index(0, k)) == doctest::Approx(2.0 * a));
        CHECK(theta(packing.position_index(0, k) + 1) == doctest::Approx(-2.0 * a));
        // stationary agent stays put
        CHECK(theta(packing.position_index(1, k)) == 1.0);
        // velocities are zeroed even when the current state moves
        CHECK(theta(packing.block_offset(0) + L.velocity_offset(k)) == 0.0);
        CHECK(theta(packing.block_offset(0) + L.velocity_offset(k) + 1) == 0.0);
    }
    for (int k = 0; k < 4; ++k)
        CHECK(theta(packing.block_offset(0) + L.input_offset(k)) == 0.0);

    current.pop_back();
    CHECK_THROWS_AS(straight_line_init(packing, current, refs), std::invalid_argument);
}

TEST_CASE("eliminated primal update equals the full assembled subproblem") {
    const int d = 2, T = 2, N = 3;
    const GlobalPacking packing(N, BlockLayout(d, T));
    const HorizonConfig cfg_h{T, 0.1};
    const CostParams cp = CostParams::defaults(d);
    AdmmConfig cfg;
    cfg.rho = 0.8;

    Rng rng(12);
    std::vector<AgentState> current, refs;
    for (int a = 0; a < N; ++a) {
        current.push_back(AgentState(
            Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
            Eigen::Vector2d::Zero()));
        refs.push_back(AgentState(
            Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
            Eigen::Vector2d::Zero()));
    }
    const AgentConstraints cons = basic_constraints(packing.block, cfg_h, current[0], 3.0);

    Eigen::VectorXd theta0 = straight_line_init(packing, current, refs);
    Eigen::VectorXd nb1 = theta0, nb2 = theta0;
    for (int c = 0; c < packing.dim(); ++c) {
        nb1(c) += 0.05 * rng.uniform(-1.0, 1.0);
        nb2(c) += 0.05 * rng.uniform(-1.0, 1.0);
    }
    NeighborView view = {{1, &nb1}, {2, &nb2}};
    Eigen::VectorXd lambda(packing.dim());
    for (int c = 0; c < packing.dim(); ++c) lambda(c) = 0.1 * rng.uniform(-1.0, 1.0);

    // one coupling row keeps agents 0 and 1 apart along x at step 1
    CouplingRow row;
    row.neighbor = 1;
    row.step = 1;
    row.own_coeff = Eigen::Vector2d(-1.0, 0.0);
    row.neighbor_coeff = Eigen::Vector2d(1.0, 0.0);
    row.ub = -0.1;
    const std::vector<CouplingRow> coupling = {row};

    const LocalCopy updated = primal_update(packing, 0, theta0, view, lambda, cons, coupling,
                                            /*allow_relaxation=*/false, cfg, cp, current[0]);

    const QpProblem full =
        assemble_primal_qp(packing, 0, theta0, view, lambda, cons, coupling, cfg, cp, current[0]);
    const QpSolution oracle = solve_qp(full);
    REQUIRE(oracle.status == QpStatus::Optimal);
    CHECK((updated.theta - oracle.z).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("own-block infeasibility raises, coupling rows can relax") {
    const int d = 2, T = 2;
    const GlobalPacking packing(2, BlockLayout(d, T));
    const HorizonConfig cfg_h{T, 0.1};
    const CostParams cp = CostParams::defaults(d);
    const AdmmConfig cfg;
    const AgentState x0 = AgentState::zero(d);

    // reachable set with a_max = 0.1 is centimeters; demand 5 m at step 1
    AgentConstraints cons = basic_constraints(packing.block, cfg_h, x0, 0.1);
    InequalityBlock far;
    far.family = ConstraintFamily::Bvc;
    far.A = Eigen::MatrixXd::Zero(1, packing.block.size());
    far.A(0, packing.block.position_offset(1)) = -1.0;
    far.b = Eigen::VectorXd::Constant(1, -5.0);
    cons.ineq.push_back(far);

    const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(packing.dim());
    const Eigen::VectorXd nb = theta0;
    NeighborView view = {{1, &nb}};
    const Eigen::VectorXd lambda = Eigen::VectorXd::Zero(packing.dim());

    CHECK_THROWS_AS(primal_update(packing, 0, theta0, view, lambda, cons, {},
                                  /*allow_relaxation=*/false, cfg, cp, x0),
                    AgentFailure);
    // relaxation only covers coupling rows, so this still fails
    CHECK_THROWS_AS(primal_update(packing, 0, theta0, view, lambda, cons, {},
                                  /*allow_relaxation=*/true, cfg, cp, x0),
                    AgentFailure);

    // the same demand as a coupling row is absorbed by the slack
    AgentConstraints plain = basic_constraints(packing.block, cfg_h, x0, 0.1);
    CouplingRow row;
    row.neighbor = 1;
    row.step = 1;
    row.own_coeff = Eigen::Vector2d(-1.0, 0.0);
    row.neighbor_coeff = Eigen::Vector2d::Zero();
    row.ub = -5.0;
    PrimalUpdateInfo info;
    const LocalCopy relaxed = primal_update(packing, 0, theta0, view, lambda, plain, {row},
                                            /*allow_relaxation=*/true, cfg, cp, x0, &info);
    CHECK(info.relaxed);
    CHECK(relaxed.theta.allFinite());
}

TEST_CASE("single agent converges to its solo tracking plan") {
    const int d = 2, T = 3;
    const GlobalPacking packing(1, BlockLayout(d, T));
    const HorizonConfig cfg_h{T, 0.1};

    ConsensusProblem problem;
    problem.packing = packing;
    problem.graph = NeighborGraph::fully_connected(1);
    problem.cp = CostParams::defaults(d);
    problem.cfg.rho = 1.0;
    problem.cfg.eps_primal = 1e-9;
    problem.cfg.eps_dual = 1e-9;
    problem.cfg.max_inner_iters = 50;
    const AgentState x0(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d::Zero());
    problem.refs = {AgentState(Eigen::Vector2d(0.5, -0.25), Eigen::Vector2d::Zero())};
    problem.cons = {basic_constraints(packing.block, cfg_h, x0, 2.0)};

    std::vector<LocalCopy> copies(1);
    copies[0].owner = 0;
    copies[0].theta = straight_line_init(packing, {x0}, problem.refs);
    std::vector<DualState> duals(1);
    duals[0].owner = 0;
    duals[0].lambda = Eigen::VectorXd::Zero(packing.dim());

    SyncTransport transport(problem.graph);
    const AdmmResult res = run_admm(problem, copies, duals, transport);
    CHECK(res.status == AdmmStatus::Converged);
    CHECK(res.iterations <= 3);
    REQUIRE(res.trace.size() == static_cast<std::size_t>(res.iterations) + 1);

    QpProblem solo = joint_qp(packing, problem.refs, problem.cons, problem.cp);
    const QpSolution oracle = solve_qp(solo);
    REQUIRE(oracle.status == QpStatus::Optimal);
    CHECK((res.copies[0].theta - oracle.z).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("two agents with cell constraints agree with the joint solve") {
    const int d = 2, T = 3, N = 2;
    const GlobalPacking packing(N, BlockLayout(d, T));
    const HorizonConfig cfg_h{T, 0.1};
    const double r_s = 0.15;

    std::vector<AgentState> current = {
        AgentState(Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d::Zero()),
        AgentState(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d::Zero())};
    std::vector<AgentState> refs = {
        AgentState(Eigen::Vector2d(1.0, 0.3), Eigen::Vector2d::Zero()),
        AgentState(Eigen::Vector2d(-1.0, -0.3), Eigen::Vector2d::Zero())};

    Eigen::MatrixXd positions(2, 2);
    positions.row(0) = current[0].position.transpose();
    positions.row(1) = current[1].position.transpose();

    ConsensusProblem problem;
    problem.packing = packing;
    problem.graph = NeighborGraph::fully_connected(N);
    problem.cp = CostParams::defaults(d);
    // the distance to the fixed point scales linearly with the thresholds,
    // so a 1e-4 match against the joint solve needs them well below that
    problem.cfg.rho = 1.0;
    problem.cfg.eps_primal = 1e-8;
    problem.cfg.eps_dual = 1e-8;
    problem.cfg.max_inner_iters = 5000;
    problem.refs = refs;
    for (int a = 0; a < N; ++a) {
        AgentConstraints cons = basic_constraints(packing.block, cfg_h, current[a], 4.0);
        const BvcSet cell = build_bvc(a, positions, r_s);
        InequalityBlock blk;
        blk.family = ConstraintFamily::Bvc;
        std::tie(blk.A, blk.b) = bvc_to_rows(cell, cfg_h, packing.block);
        cons.ineq.push_back(blk);
        problem.cons.push_back(cons);
    }

    const Eigen::VectorXd theta0 = straight_line_init(packing, current, refs);
    std::vector<LocalCopy> copies(N);
    std::vector<DualState> duals(N);
    for (int a = 0; a < N; ++a) {
        copies[a] = {a, theta0};
        duals[a] = {a, Eigen::VectorXd::Zero(packing.dim())};
    }

    SyncTransport transport(problem.graph);
    const AdmmResult res = run_admm(problem, copies, duals, transport);
    REQUIRE(res.status == AdmmStatus::Converged);

    // identical initial copies give a zero residual record before any update;
    // the stopping rule must not fire on it
    CHECK(res.trace[0].primal == 0.0);
    CHECK(res.iterations > 1);
    CHECK(transport.rounds_completed() == 2 * res.iterations);
    CHECK(res.qp_iterations_total > 0);

    const QpProblem joint = joint_qp(packing, refs, problem.cons, problem.cp);
    const QpSolution oracle = solve_qp(joint);
    REQUIRE(oracle.status == QpStatus::Optimal);

    for (int a = 0; a < N; ++a) {
        const int off = packing.block_offset(a);
        const Eigen::VectorXd own =
            res.copies[a].theta.segment(off, packing.block.size());
        const Eigen::VectorXd joint_block = oracle.z.segment(off, packing.block.size());
        CHECK((own - joint_block).cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("threaded execution is bit-identical to serial") {
    const int d = 2, T = 2, N = 3;
    const GlobalPacking packing(N, BlockLayout(d, T));
    const HorizonConfig cfg_h{T, 0.1};

    std::vector<AgentState> current, refs;
    Rng rng(88);
    for (int a = 0; a < N; ++a) {
        current.push_back(AgentState(
            Eigen::Vector2d(std::cos(2.1 * a), std::sin(2.1 * a)), Eigen::Vector2d::Zero()));
        refs.push_back(AgentState(-current[a].position, Eigen::Vector2d::Zero()));
    }

    ConsensusProblem problem;
    problem.packing = packing;
    problem.graph = NeighborGraph::fully_connected(N);
    problem.cp = CostParams::defaults(d);
    problem.cfg.rho = 0.7;
    problem.cfg.eps_primal = 1e-4;
    problem.cfg.eps_dual = 1e-4;
    problem.cfg.max_inner_iters = 400;
    problem.refs = refs;
    for (int a = 0; a < N; ++a)
        problem.cons.push_back(basic_constraints(packing.block, cfg_h, current[a], 3.0));
    // nonconvex coupling exercises the per-agent linearization state too
    problem.collision = CollisionConstraintSpec{0.2};
    problem.lin_seed = 5;

    const Eigen::VectorXd theta0 = straight_line_init(packing, current, refs);
    std::vector<LocalCopy> copies(N);
    std::vector<DualState> duals(N);
    for (int a = 0; a < N; ++a) {
        copies[a] = {a, theta0};
        duals[a] = {a, Eigen::VectorXd::Zero(packing.dim())};
    }

    SyncTransport t_serial(problem.graph);
    const AdmmResult serial = run_admm(problem, copies, duals, t_serial, false);
    SyncTransport t_threaded(problem.graph);
    const AdmmResult threaded = run_admm(problem, copies, duals, t_threaded, true);

    CHECK(serial.status == threaded.status);
    REQUIRE(serial.iterations == threaded.iterations);
    REQUIRE(serial.trace.size() == threaded.trace.size());
    for (std::size_t k = 0; k < serial.trace.size(); ++k) {
        CHECK(serial.trace[k].primal == threaded.trace[k].primal);
        CHECK(serial.trace[k].dual == threaded.trace[k].dual);
        CHECK(serial.trace[k].global_objective == threaded.trace[k].global_objective);
    }
    for (int a = 0; a < N; ++a) {
        CHECK(serial.copies[a].theta == threaded.copies[a].theta);
        CHECK(serial.duals[a].lambda == threaded.duals[a].lambda);
    }
    CHECK(audit_locality(problem.graph, t_serial.trace()).empty());
    CHECK(audit_locality(problem.graph, t_threaded.trace()).empty());
}

TEST_CASE("problem validation rejects inconsistent pieces") {
    ConsensusProblem problem;
    problem.packing = GlobalPacking(2, BlockLayout(2, 2));
    problem.graph = NeighborGraph::fully_connected(3);  // wrong size
    problem.cp = CostParams::defaults(2);
    problem.refs = {AgentState::zero(2), AgentState::zero(2)};
    problem.cons.resize(2);
    CHECK_THROWS_AS(problem.validate(), ConfigError);

    problem.graph = NeighborGraph::fully_connected(2);
    CHECK_NOTHROW(problem.validate());

    problem.refs.pop_back();
    CHECK_THROWS_AS(problem.validate(), ConfigError);
}
