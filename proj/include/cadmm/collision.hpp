#ifndef CADMM_COLLISION_HPP
#define CADMM_COLLISION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cadmm/consensus.hpp"
#include "cadmm/packing.hpp"
#include "cadmm/rng.hpp"

namespace cadmm {

/// Per-agent store of the fallback directions used when a linearization
/// reference has coincident positions. Directions are drawn once per
/// (neighbor, step) from a run-seeded stream and reused afterwards, so
/// repeated linearizations are deterministic.
class LinearizationState {
public:
    LinearizationState(int owner, int dim, std::uint64_t run_seed)
        : owner_(owner), dim_(dim), rng_(mix_seed(run_seed, 41u, static_cast<std::uint64_t>(owner))) {}

    int owner() const { return owner_; }
    const Eigen::VectorXd& direction(int neighbor, int step);

private:
    int owner_;
    int dim_;
    Rng rng_;
    std::map<std::pair<int, int>, Eigen::VectorXd> directions_;
};

/// Supporting half-space of the min-distance set at the reference copy:
/// eta . (p_i(k) - p_j(k)) >= d_min with eta the normalized reference
/// difference. Any point satisfying the row satisfies the true constraint.
/// Rows are ordered neighbor-ascending, then step 1..T.
std::vector<CouplingRow> linearize_collision(const GlobalPacking& packing, int i,
                                             const Eigen::VectorXd& theta_ref,
                                             const std::vector<int>& neighbors,
                                             const CollisionConstraintSpec& spec,
                                             LinearizationState& lin);

/// Primal update of the nonconvex variant: re-linearizes about theta_own
/// and solves the resulting QP with relaxation enabled.
LocalCopy primal_update_noncvx(const GlobalPacking& packing, int i,
                               const Eigen::VectorXd& theta_own, const NeighborView& neighbors,
                               const Eigen::VectorXd& lambda, const AgentConstraints& cons,
                               const CollisionConstraintSpec& spec, LinearizationState& lin,
                               const AdmmConfig& cfg, const CostParams& cp, const AgentState& ref,
                               PrimalUpdateInfo* info = nullptr);

/// Exact distance margin for one pair at one instant (or plan step).
struct MarginRecord {
    int i = 0;
    int j = 0;
    int step = 0;
    double margin = 0.0;  // ||p_i - p_j|| - d_min
};

/// Margins for all pairs i < j at one instant; step field left at 0.
std::vector<MarginRecord> pairwise_margins(const Eigen::MatrixXd& positions, double d_min);

/// Exact nonlinear margins for every pair i < j and every step 0..T of a
/// full-length plan vector. Safety accounting uses this, never the
/// linearized rows.
std::vector<MarginRecord> check_true_feasibility(const GlobalPacking& packing,
                                                 const Eigen::VectorXd& theta, double d_min);

}  // namespace cadmm

#endif  // CADMM_COLLISION_HPP
