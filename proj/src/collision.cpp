#include "cadmm/collision.hpp"

#include <cmath>
#include <stdexcept>

namespace cadmm {

void CollisionConstraintSpec::validate() const {
    if (!(d_min >= 0.0) || !std::isfinite(d_min)) {
        throw ConfigError("d_min must be finite and nonnegative");
    }
}

const Eigen::VectorXd& LinearizationState::direction(int neighbor, int step) {
    auto key = std::make_pair(neighbor, step);
    auto it = directions_.find(key);
    if (it == directions_.end()) {
        it = directions_.emplace(key, rng_.unit_vector(dim_)).first;
    }
    return it->second;
}

std::vector<CouplingRow> linearize_collision(const GlobalPacking& packing, int i,
                                             const Eigen::VectorXd& theta_ref,
                                             const std::vector<int>& neighbors,
                                             const CollisionConstraintSpec& spec,
                                             LinearizationState& lin) {
    spec.validate();
    const BlockLayout& L = packing.block;
    if (theta_ref.size() != packing.dim()) {
        throw std::invalid_argument("reference copy length does not match the packing");
    }
    std::vector<CouplingRow> rows;
    if (spec.d_min == 0.0) return rows;  // constraint disabled, no rows at all
    rows.reserve(neighbors.size() * L.T);
    for (int j : neighbors) {
        if (j == i) throw std::invalid_argument("agent listed as its own neighbor");
        for (int k = 1; k <= L.T; ++k) {
            const auto pi = theta_ref.segment(packing.position_index(i, k), L.d);
            const auto pj = theta_ref.segment(packing.position_index(j, k), L.d);
            Eigen::VectorXd eta = pi - pj;
            const double norm = eta.norm();
            if (norm < 1e-9) {
                eta = lin.direction(j, k);
            } else {
                eta /= norm;
            }
            // eta.(p_i - p_j) >= d_min, written as -eta.p_i + eta.p_j <= -d_min.
            CouplingRow row;
            row.neighbor = j;
            row.step = k;
            row.own_coeff = -eta;
            row.neighbor_coeff = eta;
            row.ub = -spec.d_min;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

LocalCopy primal_update_noncvx(const GlobalPacking& packing, int i,
                               const Eigen::VectorXd& theta_own, const NeighborView& neighbors,
                               const Eigen::VectorXd& lambda, const AgentConstraints& cons,
                               const CollisionConstraintSpec& spec, LinearizationState& lin,
                               const AdmmConfig& cfg, const CostParams& cp, const AgentState& ref,
                               PrimalUpdateInfo* info) {
    std::vector<int> neighbor_ids;
    neighbor_ids.reserve(neighbors.size());
    for (const auto& [j, payload] : neighbors) {
        (void)payload;
        neighbor_ids.push_back(j);
    }
    const std::vector<CouplingRow> rows =
        linearize_collision(packing, i, theta_own, neighbor_ids, spec, lin);
    return primal_update(packing, i, theta_own, neighbors, lambda, cons, rows,
                         /*allow_relaxation=*/true, cfg, cp, ref, info);
}

std::vector<MarginRecord> pairwise_margins(const Eigen::MatrixXd& positions, double d_min) {
    const int N = static_cast<int>(positions.rows());
    std::vector<MarginRecord> out;
    out.reserve(static_cast<std::size_t>(N) * (N - 1) / 2);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            MarginRecord rec;
            rec.i = i;
            rec.j = j;
            rec.margin = (positions.row(i) - positions.row(j)).norm() - d_min;
            out.push_back(rec);
        }
    }
    return out;
}

std::vector<MarginRecord> check_true_feasibility(const GlobalPacking& packing,
                                                 const Eigen::VectorXd& theta, double d_min) {
    const BlockLayout& L = packing.block;
    if (theta.size() != packing.dim()) {
        throw std::invalid_argument("plan vector length does not match the packing");
    }
    std::vector<MarginRecord> out;
    out.reserve(static_cast<std::size_t>(packing.N) * (packing.N - 1) / 2 * (L.T + 1));
    for (int k = 0; k <= L.T; ++k) {
        for (int i = 0; i < packing.N; ++i) {
            for (int j = i + 1; j < packing.N; ++j) {
                const auto pi = theta.segment(packing.position_index(i, k), L.d);
                const auto pj = theta.segment(packing.position_index(j, k), L.d);
                MarginRecord rec;
                rec.i = i;
                rec.j = j;
                rec.step = k;
                rec.margin = (pi - pj).norm() - d_min;
                out.push_back(rec);
            }
        }
    }
    return out;
}

}  // namespace cadmm
