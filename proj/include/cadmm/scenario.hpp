#ifndef CADMM_SCENARIO_HPP
#define CADMM_SCENARIO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cadmm/consensus.hpp"
#include "cadmm/mpc.hpp"

namespace cadmm {

enum class GraphKind { FullyConnected, Radius };

/// Complete description of one experiment: fleet size, workspace, horizon,
/// weights, solver settings, and stop rules. Starts and goals stay empty
/// until generate_scenario() draws a concrete instance.
struct ScenarioConfig {
    int N = 5;
    int d = 3;
    Eigen::VectorXd box;  // per-axis workspace extents, sampling is centered at 0
    double d_min = 0.3;
    double min_displacement = 1.0;  // per-agent minimum start-to-goal distance
    std::uint64_t seed = 1;

    HorizonConfig horizon;

    // diagonal cost weights
    double q_pos = 1.0;
    double q_vel = 0.1;
    double r_input = 0.01;
    double qf_scale = 10.0;

    double rho = 1.0;
    double eps_base = 1e-3;  // residual threshold scale, multiplied by sqrt(N*n_b)
    int max_inner_iters = 5000;
    double qp_tol = 1e-8;
    int qp_max_iters = 20000;
    double slack_weight = 1e4;
    double slack_quadratic = 1.0;

    double a_max = 2.0;
    MpcConfig mpc;

    Variant variant = Variant::Convex;
    GraphKind graph = GraphKind::FullyConnected;
    double graph_radius = 10.0;

    // concrete instance, filled by generate_scenario
    std::vector<AgentState> starts;
    std::vector<AgentState> goals;

    bool concrete() const { return !starts.empty(); }
    void validate() const;

    BlockLayout layout() const { return BlockLayout(d, horizon.T); }
    GlobalPacking packing() const { return GlobalPacking(N, layout()); }
    CostParams cost_params() const;
    AdmmConfig admm_config() const;  // thresholds scaled by sqrt(N * n_b)
    NeighborGraph neighbor_graph() const;
    MpcSetup to_setup() const;  // requires a concrete instance
};

/// Draws starts and goals uniformly in the box, whole sets resampled until
/// all pairwise start distances and goal distances reach 2*d_min and every
/// agent moves at least min_displacement. Deterministic in the seed.
ScenarioConfig generate_scenario(const ScenarioConfig& base, std::uint64_t seed);

struct TrialMetrics {
    Variant variant = Variant::Convex;
    std::uint64_t scenario_seed = 0;
    int N = 0;
    double d_min = 0.0;

    bool failed = false;
    std::string error;
    MpcStopReason stop = MpcStopReason::MaxOuterSteps;
    bool goal_reached = false;
    int outer_steps = 0;
    long cumulative_iterations = 0;
    int stalled_solves = 0;  // inner solves stopped at max_inner_iters above threshold
    bool any_relaxed = false;
    double wall_time_s = 0.0;

    double min_executed_margin = 0.0;  // min over executed steps and pairs
    int violation_steps = 0;           // executed steps with any pair below d_min

    long messages_delivered = 0;
    std::size_t locality_violations = 0;

    // raw traces (summarized and dropped by monte_carlo)
    std::vector<ResidualRecord> residuals;              // concatenated per-step traces
    std::vector<std::vector<AgentState>> history;       // [agent][step]
    std::vector<std::vector<Eigen::VectorXd>> inputs;   // [agent][step]
};

/// Runs the receding-horizon loop on a concrete scenario and collects all
/// metrics. Failures are recorded in the result with the partial history
/// preserved, not thrown.
TrialMetrics run_trial(const ScenarioConfig& sc);

struct VariantSummary {
    Variant variant = Variant::Convex;
    int N = 0;
    int trials = 0;
    int failures = 0;
    double mean_iterations = 0.0;
    double median_iterations = 0.0;
    double stddev_iterations = 0.0;
    double step_violation_rate = 0.0;   // violating executed steps / executed steps
    double trial_violation_rate = 0.0;  // trials with any violation / completed trials
    double goal_rate = 0.0;
    double mean_outer_steps = 0.0;
    double mean_wall_time_s = 0.0;
};

struct TrialRow {
    int N = 0;
    Variant variant = Variant::Convex;
    int trial = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    bool goal_reached = false;
    long iterations = 0;
    int outer_steps = 0;
    double min_margin = 0.0;
    int violation_steps = 0;
    int stalled_solves = 0;
    double wall_time_s = 0.0;
    std::string error;
};

struct MonteCarloSummary {
    std::uint64_t base_seed = 0;
    int trials_requested = 0;
    std::vector<VariantSummary> rows;  // per (N, variant)
    struct Ratio {
        int N = 0;
        double convex_over_nonconvex = 0.0;
    };
    std::vector<Ratio> ratios;
    std::vector<TrialRow> trial_rows;
};

/// Paired Monte Carlo study: for every agent count and trial index, one
/// scenario seed drives both variants. Trial failures are excluded from the
/// averages and counted in the failure column.
MonteCarloSummary monte_carlo(const ScenarioConfig& base, int n_trials,
                              const std::vector<int>& agent_counts);

}  // namespace cadmm

#endif  // CADMM_SCENARIO_HPP
