#ifndef CADMM_PACKING_HPP
#define CADMM_PACKING_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "cadmm/types.hpp"

namespace cadmm {

/// Layout of one agent's decision block over a horizon of T steps:
/// all states first, time-major, then all inputs:
///
///   z = [x_0, x_1, ..., x_T, u_0, ..., u_{T-1}],  x_k = [p_k; v_k]
///
/// Every module that touches the decision vector indexes through this struct;
/// the ordering is fixed project-wide.
struct BlockLayout {
    int d = 3;  ///< spatial dimension
    int T = 1;  ///< horizon length (steps)

    BlockLayout() = default;
    BlockLayout(int dim, int horizon) : d(dim), T(horizon) {
        if (d != 2 && d != 3) throw ConfigError("BlockLayout: d must be 2 or 3");
        if (T < 1) throw ConfigError("BlockLayout: T must be >= 1");
    }

    int state_dim() const { return 2 * d; }
    int num_states() const { return T + 1; }
    int num_inputs() const { return T; }
    int size() const { return state_dim() * (T + 1) + d * T; }

    /// Offset of state x_k within the block, k in [0, T].
    int state_offset(int k) const { return state_dim() * k; }
    /// Offset of the position part of x_k.
    int position_offset(int k) const { return state_offset(k); }
    /// Offset of the velocity part of x_k.
    int velocity_offset(int k) const { return state_offset(k) + d; }
    /// Offset of input u_k within the block, k in [0, T-1].
    int input_offset(int k) const { return state_dim() * (T + 1) + d * k; }

    /// Pack a state/input sequence into one block vector. states must have
    /// T+1 entries, inputs T rows.
    Eigen::VectorXd pack(const std::vector<AgentState>& states,
                         const Eigen::MatrixXd& inputs) const;

    /// Inverse of pack().
    std::pair<std::vector<AgentState>, Eigen::MatrixXd>
    unpack(const Eigen::VectorXd& block) const;
};

/// Layout of the global decision vector theta: N agent blocks in agent-major
/// order, each following BlockLayout.
struct GlobalPacking {
    int N = 1;
    BlockLayout block;

    GlobalPacking() = default;
    GlobalPacking(int agents, BlockLayout layout) : N(agents), block(layout) {
        if (N < 1) throw ConfigError("GlobalPacking: N must be >= 1");
    }

    int dim() const { return N * block.size(); }
    int block_offset(int agent) const { return agent * block.size(); }

    Eigen::Ref<const Eigen::VectorXd> agent_block(const Eigen::VectorXd& theta,
                                                  int agent) const {
        return theta.segment(block_offset(agent), block.size());
    }
    Eigen::Ref<Eigen::VectorXd> agent_block(Eigen::VectorXd& theta, int agent) const {
        return theta.segment(block_offset(agent), block.size());
    }

    /// Global index of the position of agent `i`'s planned state k.
    int position_index(int agent, int k) const {
        return block_offset(agent) + block.position_offset(k);
    }
};

}  // namespace cadmm

#endif  // CADMM_PACKING_HPP
