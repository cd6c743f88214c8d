#include "cadmm/dynamics.hpp"

namespace cadmm {

DiscreteLinearDynamics build_dynamics(int d, double dt) {
    if (d != 2 && d != 3)
        throw ConfigError("build_dynamics: spatial dimension must be 2 or 3, got " +
                          std::to_string(d));
    if (!(dt > 0.0)) throw ConfigError("build_dynamics: dt must be positive");

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    DiscreteLinearDynamics dyn;
    dyn.d = d;
    dyn.dt = dt;
    dyn.A = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    dyn.A.topLeftCorner(d, d) = I;
    dyn.A.topRightCorner(d, d) = dt * I;
    dyn.A.bottomRightCorner(d, d) = I;
    dyn.B = Eigen::MatrixXd::Zero(2 * d, d);
    dyn.B.topRows(d) = 0.5 * dt * dt * I;
    dyn.B.bottomRows(d) = dt * I;
    return dyn;
}

AgentState step(const DiscreteLinearDynamics& dyn, const AgentState& x,
                const Eigen::VectorXd& u) {
    if (x.dim() != dyn.d || u.size() != dyn.d)
        throw std::invalid_argument("step: dimension mismatch with dynamics");
    const Eigen::VectorXd next = dyn.A * x.stacked() + dyn.B * u;
    return AgentState::from_stacked(next);
}

std::vector<AgentState> rollout(const DiscreteLinearDynamics& dyn, const AgentState& x0,
                                const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != dyn.d)
        throw std::invalid_argument("rollout: inputs must have d columns");
    const int T = static_cast<int>(inputs.rows());
    std::vector<AgentState> states;
    states.reserve(T + 1);
    states.push_back(x0);
    for (int k = 0; k < T; ++k)
        states.push_back(step(dyn, states.back(), inputs.row(k).transpose()));
    return states;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_dynamics_constraints(
    const DiscreteLinearDynamics& dyn, const HorizonConfig& cfg,
    const AgentState& x_init) {
    cfg.validate();
    if (x_init.dim() != dyn.d)
        throw std::invalid_argument("stack_dynamics_constraints: x_init dimension mismatch");

    const BlockLayout layout(dyn.d, cfg.T);
    const int nx = layout.state_dim();
    const int rows = nx * (cfg.T + 1);

    Eigen::MatrixXd A_eq = Eigen::MatrixXd::Zero(rows, layout.size());
    Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(rows);

    // Initial-condition block: x_0 = x_init.
    A_eq.block(0, layout.state_offset(0), nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
    b_eq.head(nx) = x_init.stacked();

    // Dynamics blocks: x_{k+1} - A x_k - B u_k = 0.
    for (int k = 0; k < cfg.T; ++k) {
        const int r = nx * (k + 1);
        A_eq.block(r, layout.state_offset(k + 1), nx, nx) =
            Eigen::MatrixXd::Identity(nx, nx);
        A_eq.block(r, layout.state_offset(k), nx, nx) = -dyn.A;
        A_eq.block(r, layout.input_offset(k), nx, dyn.d) = -dyn.B;
    }
    return {std::move(A_eq), std::move(b_eq)};
}

}  // namespace cadmm
