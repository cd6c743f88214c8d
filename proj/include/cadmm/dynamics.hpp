#ifndef CADMM_DYNAMICS_HPP
#define CADMM_DYNAMICS_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cadmm/packing.hpp"
#include "cadmm/types.hpp"

namespace cadmm {

/// Exact zero-order-hold discretization of the double integrator:
///   A = [[I, dt*I], [0, I]],  B = [[dt^2/2 * I], [dt * I]]
/// Identical for every agent (homogeneous fleet).
struct DiscreteLinearDynamics {
    Eigen::MatrixXd A;  ///< 2d x 2d
    Eigen::MatrixXd B;  ///< 2d x d
    double dt = 0.0;
    int d = 0;
};

/// Horizon length and sampling period shared by the whole fleet.
struct HorizonConfig {
    int T = 10;
    double dt = 0.1;

    void validate() const {
        if (T < 1) throw ConfigError("HorizonConfig: T must be >= 1");
        if (!(dt > 0.0)) throw ConfigError("HorizonConfig: dt must be positive");
    }
};

DiscreteLinearDynamics build_dynamics(int d, double dt);

/// One step of x' = A x + B u.
AgentState step(const DiscreteLinearDynamics& dyn, const AgentState& x,
                const Eigen::VectorXd& u);

/// Forward simulation: returns T+1 states starting at x0. `inputs` is T x d,
/// one input per row.
std::vector<AgentState> rollout(const DiscreteLinearDynamics& dyn, const AgentState& x0,
                                const Eigen::MatrixXd& inputs);

/// Stacked equality constraints A_eq z = b_eq over one agent block
/// z = [x_0..x_T, u_0..u_{T-1}] encoding x_0 = x_init and
/// x_{k+1} = A x_k + B u_k for k = 0..T-1. Row count is 2d*(T+1).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_dynamics_constraints(
    const DiscreteLinearDynamics& dyn, const HorizonConfig& cfg, const AgentState& x_init);

}  // namespace cadmm

#endif  // CADMM_DYNAMICS_HPP
