#ifndef CADMM_TYPES_HPP
#define CADMM_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadmm {

/// Thrown for invalid configuration values (bad dimensions, non-positive
/// time steps, unreadable config files, ...). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Position/velocity state of one agent in d-dimensional space (d = 2 or 3).
struct AgentState {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;

    AgentState() = default;
    AgentState(Eigen::VectorXd p, Eigen::VectorXd v)
        : position(std::move(p)), velocity(std::move(v)) {}

    static AgentState zero(int dim) {
        return AgentState(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim));
    }

    int dim() const { return static_cast<int>(position.size()); }

    /// Stacked [position; velocity] vector of length 2d.
    Eigen::VectorXd stacked() const {
        Eigen::VectorXd x(position.size() + velocity.size());
        x << position, velocity;
        return x;
    }

    static AgentState from_stacked(const Eigen::VectorXd& x) {
        const int d = static_cast<int>(x.size()) / 2;
        return AgentState(x.head(d), x.tail(d));
    }

    void validate() const {
        const int d = dim();
        if (d != 2 && d != 3)
            throw ConfigError("AgentState: spatial dimension must be 2 or 3, got " +
                              std::to_string(d));
        if (velocity.size() != d)
            throw std::invalid_argument("AgentState: position/velocity length mismatch");
        if (!position.allFinite() || !velocity.allFinite())
            throw std::invalid_argument("AgentState: non-finite entry");
    }
};

}  // namespace cadmm

#endif  // CADMM_TYPES_HPP
