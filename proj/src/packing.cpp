#include "cadmm/packing.hpp"

namespace cadmm {

Eigen::VectorXd BlockLayout::pack(const std::vector<AgentState>& states,
                                  const Eigen::MatrixXd& inputs) const {
    if (static_cast<int>(states.size()) != T + 1)
        throw std::invalid_argument("BlockLayout::pack: need T+1 states");
    if (inputs.rows() != T || inputs.cols() != d)
        throw std::invalid_argument("BlockLayout::pack: inputs must be T x d");

    Eigen::VectorXd z(size());
    for (int k = 0; k <= T; ++k) {
        if (states[k].dim() != d)
            throw std::invalid_argument("BlockLayout::pack: state dimension mismatch");
        z.segment(position_offset(k), d) = states[k].position;
        z.segment(velocity_offset(k), d) = states[k].velocity;
    }
    for (int k = 0; k < T; ++k) z.segment(input_offset(k), d) = inputs.row(k).transpose();
    return z;
}

std::pair<std::vector<AgentState>, Eigen::MatrixXd>
BlockLayout::unpack(const Eigen::VectorXd& block) const {
    if (block.size() != size())
        throw std::invalid_argument("BlockLayout::unpack: bad block length");

    std::vector<AgentState> states;
    states.reserve(T + 1);
    for (int k = 0; k <= T; ++k)
        states.emplace_back(block.segment(position_offset(k), d),
                            block.segment(velocity_offset(k), d));
    Eigen::MatrixXd inputs(T, d);
    for (int k = 0; k < T; ++k)
        inputs.row(k) = block.segment(input_offset(k), d).transpose();
    return {std::move(states), std::move(inputs)};
}

}  // namespace cadmm
