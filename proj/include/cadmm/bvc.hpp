#ifndef CADMM_BVC_HPP
#define CADMM_BVC_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cadmm/dynamics.hpp"
#include "cadmm/packing.hpp"

namespace cadmm {

/// Linear half-space {p : normal . p + offset <= 0}.
struct HalfSpace {
    Eigen::VectorXd normal;
    double offset = 0.0;

    double evaluate(const Eigen::VectorXd& p) const { return normal.dot(p) + offset; }
    bool contains(const Eigen::VectorXd& p, double tol = 0.0) const {
        return evaluate(p) <= tol;
    }
};

/// Buffered Voronoi cell of one agent: one half-space per other agent,
/// computed from the current position snapshot. The separating plane against
/// neighbor j is the perpendicular bisector of the segment p_i p_j shifted by
/// the buffer radius toward the owner, so that cells of different agents are
/// disjoint with clearance 2*r_s.
struct BvcSet {
    int owner = 0;
    std::vector<std::pair<int, HalfSpace>> halfspaces;  ///< (neighbor id, plane)
    bool infeasible_start = false;  ///< some pairwise distance was below 2*r_s

    bool contains(const Eigen::VectorXd& p, double tol = 0.0) const {
        for (const auto& [j, h] : halfspaces)
            if (!h.contains(p, tol)) return false;
        return true;
    }
};

/// Builds agent i's buffered Voronoi cell from the N x d matrix of current
/// positions. Positions closer than 2*r_s only set the infeasible_start flag;
/// the planes are still produced and the caller decides policy.
BvcSet build_bvc(int owner, const Eigen::MatrixXd& positions, double r_s);

/// Same, but retracts only against the listed neighbors (used with sparse
/// neighbor graphs; the pairwise guarantee then covers graph edges only).
BvcSet build_bvc(int owner, const Eigen::MatrixXd& positions, double r_s,
                 const std::vector<int>& neighbors);

/// Replicates every half-space of the cell over the planned positions
/// p_1..p_T of the owner's block (step 0 is pinned by the initial condition).
/// Rows are ordered neighbor-major, then by step; columns cover one agent
/// block. Row sense: A_in z <= b_in.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> bvc_to_rows(const BvcSet& bvc,
                                                        const HorizonConfig& cfg,
                                                        const BlockLayout& layout);

}  // namespace cadmm

#endif  // CADMM_BVC_HPP
