#include "cadmm/bvc.hpp"

namespace cadmm {

BvcSet build_bvc(int owner, const Eigen::MatrixXd& positions, double r_s) {
    const int N = static_cast<int>(positions.rows());
    std::vector<int> others;
    others.reserve(N > 0 ? N - 1 : 0);
    for (int j = 0; j < N; ++j) {
        if (j != owner) others.push_back(j);
    }
    return build_bvc(owner, positions, r_s, others);
}

BvcSet build_bvc(int owner, const Eigen::MatrixXd& positions, double r_s,
                 const std::vector<int>& neighbors) {
    const int N = static_cast<int>(positions.rows());
    const int d = static_cast<int>(positions.cols());
    if (owner < 0 || owner >= N) throw std::invalid_argument("build_bvc: bad owner id");
    if (!(r_s > 0.0)) throw ConfigError("build_bvc: r_s must be positive");

    BvcSet bvc;
    bvc.owner = owner;
    const Eigen::VectorXd pi = positions.row(owner).transpose();

    for (int j : neighbors) {
        if (j == owner || j < 0 || j >= N)
            throw std::invalid_argument("build_bvc: bad neighbor id");
        const Eigen::VectorXd pj = positions.row(j).transpose();
        const Eigen::VectorXd diff = pj - pi;  // p^j - p^i
        const double dist = diff.norm();
        if (dist < 2.0 * r_s) bvc.infeasible_start = true;
        if (dist == 0.0)
            throw std::invalid_argument("build_bvc: coincident agent positions");

        // (p - (p^i+p^j)/2) . (p^j - p^i) + r_s * ||p^i - p^j|| <= 0
        HalfSpace h;
        h.normal = diff;
        h.offset = -0.5 * (pi + pj).dot(diff) + r_s * dist;
        bvc.halfspaces.emplace_back(j, std::move(h));
        (void)d;
    }
    return bvc;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> bvc_to_rows(const BvcSet& bvc,
                                                        const HorizonConfig& cfg,
                                                        const BlockLayout& layout) {
    cfg.validate();
    const int T = cfg.T;
    const int d = layout.d;
    const int rows = static_cast<int>(bvc.halfspaces.size()) * T;

    Eigen::MatrixXd A_in = Eigen::MatrixXd::Zero(rows, layout.size());
    Eigen::VectorXd b_in = Eigen::VectorXd::Zero(rows);

    int r = 0;
    for (const auto& [j, h] : bvc.halfspaces) {
        if (h.normal.size() != d)
            throw std::invalid_argument("bvc_to_rows: half-space dimension mismatch");
        for (int k = 1; k <= T; ++k, ++r) {
            A_in.row(r).segment(layout.position_offset(k), d) = h.normal.transpose();
            b_in(r) = -h.offset;
        }
    }
    return {std::move(A_in), std::move(b_in)};
}

}  // namespace cadmm
