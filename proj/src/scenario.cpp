#include "cadmm/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cadmm/rng.hpp"

namespace cadmm {

void ScenarioConfig::validate() const {
    if (N < 1) throw ConfigError("agents must be >= 1");
    if (d != 2 && d != 3) throw ConfigError("dim must be 2 or 3");
    if (box.size() != d) throw ConfigError("box must have one extent per axis");
    if ((box.array() <= 0.0).any()) throw ConfigError("box extents must be positive");
    if (!(d_min > 0.0)) throw ConfigError("d_min must be positive");
    if (min_displacement < 0.0) throw ConfigError("min_displacement must be nonnegative");
    horizon.validate();
    if (!(q_pos >= 0.0) || !(q_vel >= 0.0) || !(r_input > 0.0) || !(qf_scale >= 0.0)) {
        throw ConfigError("cost weights out of range");
    }
    admm_config().validate();
    mpc.validate();
    if (!(a_max > 0.0)) throw ConfigError("a_max must be positive");
    if (graph == GraphKind::Radius && !(graph_radius > 0.0)) {
        throw ConfigError("graph_radius must be positive");
    }
    if (concrete()) {
        if (static_cast<int>(starts.size()) != N || static_cast<int>(goals.size()) != N) {
            throw ConfigError("concrete scenario needs one start and one goal per agent");
        }
        auto check_points = [&](const std::vector<AgentState>& pts, const char* what) {
            for (int a = 0; a < N; ++a) {
                if (pts[a].position.size() != d || pts[a].velocity.size() != d) {
                    throw ConfigError(std::string(what) + " dimensions must match dim");
                }
                if ((pts[a].position.array().abs() > box.array() / 2.0 + 1e-12).any()) {
                    throw ConfigError(std::string(what) + " for agent " + std::to_string(a) +
                                      " lies outside the box");
                }
            }
            for (int i = 0; i < N; ++i) {
                for (int j = i + 1; j < N; ++j) {
                    const double dist = (pts[i].position - pts[j].position).norm();
                    if (dist < 2.0 * d_min - 1e-12) {
                        throw ConfigError(std::string(what) + " pair (" + std::to_string(i) + "," +
                                          std::to_string(j) + ") closer than 2*d_min");
                    }
                }
            }
        };
        check_points(starts, "start");
        check_points(goals, "goal");
    }
}

CostParams ScenarioConfig::cost_params() const {
    CostParams cp;
    cp.Q = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    cp.Q.topLeftCorner(d, d) = q_pos * Eigen::MatrixXd::Identity(d, d);
    cp.Q.bottomRightCorner(d, d) = q_vel * Eigen::MatrixXd::Identity(d, d);
    cp.R = r_input * Eigen::MatrixXd::Identity(d, d);
    cp.Qf = qf_scale * cp.Q;
    return cp;
}

AdmmConfig ScenarioConfig::admm_config() const {
    AdmmConfig cfg;
    cfg.rho = rho;
    const double scale = std::sqrt(static_cast<double>(packing().dim()));
    cfg.eps_primal = eps_base * scale;
    cfg.eps_dual = eps_base * scale;
    cfg.max_inner_iters = max_inner_iters;
    cfg.qp_tol = qp_tol;
    cfg.qp_max_iters = qp_max_iters;
    cfg.slack_weight = slack_weight;
    cfg.slack_quadratic = slack_quadratic;
    return cfg;
}

NeighborGraph ScenarioConfig::neighbor_graph() const {
    if (graph == GraphKind::FullyConnected || N == 1) {
        return NeighborGraph::fully_connected(N);
    }
    if (!concrete()) throw ConfigError("radius graph needs concrete start positions");
    Eigen::MatrixXd positions(N, d);
    for (int a = 0; a < N; ++a) positions.row(a) = starts[a].position.transpose();
    NeighborGraph g = NeighborGraph::from_radius(positions, graph_radius);
    g.require_connected();
    return g;
}

MpcSetup ScenarioConfig::to_setup() const {
    validate();
    if (!concrete()) throw ConfigError("scenario has no generated starts and goals yet");
    MpcSetup setup;
    setup.packing = packing();
    setup.graph = neighbor_graph();
    setup.dyn = build_dynamics(d, horizon.dt);
    setup.horizon = horizon;
    setup.cp = cost_params();
    setup.admm = admm_config();
    setup.cfg = mpc;
    setup.variant = variant;
    setup.d_min = d_min;
    setup.a_max = a_max;
    setup.starts = starts;
    setup.goals = goals;
    setup.seed = seed;
    return setup;
}

namespace {

bool pairwise_separated(const std::vector<Eigen::VectorXd>& points, double min_dist) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if ((points[i] - points[j]).norm() < min_dist) return false;
        }
    }
    return true;
}

std::vector<Eigen::VectorXd> sample_set(Rng& rng, int N, const Eigen::VectorXd& box) {
    std::vector<Eigen::VectorXd> points(N);
    for (int a = 0; a < N; ++a) {
        Eigen::VectorXd p(box.size());
        for (int axis = 0; axis < box.size(); ++axis) {
            p(axis) = rng.uniform(-0.5 * box(axis), 0.5 * box(axis));
        }
        points[a] = std::move(p);
    }
    return points;
}

}  // namespace

ScenarioConfig generate_scenario(const ScenarioConfig& base, std::uint64_t seed) {
    ScenarioConfig sc = base;
    sc.starts.clear();
    sc.goals.clear();
    sc.seed = seed;
    sc.validate();

    constexpr int kMaxRejections = 10000;
    Rng rng(mix_seed(seed, 17u));

    std::vector<Eigen::VectorXd> starts;
    int rejections = 0;
    while (true) {
        starts = sample_set(rng, sc.N, sc.box);
        if (pairwise_separated(starts, 2.0 * sc.d_min)) break;
        if (++rejections >= kMaxRejections) {
            throw ConfigError(
                "could not sample separated start positions; enlarge the box or reduce agents");
        }
    }

    std::vector<Eigen::VectorXd> goals;
    rejections = 0;
    while (true) {
        goals = sample_set(rng, sc.N, sc.box);
        bool ok = pairwise_separated(goals, 2.0 * sc.d_min);
        for (int a = 0; ok && a < sc.N; ++a) {
            if ((goals[a] - starts[a]).norm() < sc.min_displacement) ok = false;
        }
        if (ok) break;
        if (++rejections >= kMaxRejections) {
            throw ConfigError(
                "could not sample separated goal positions; enlarge the box or reduce agents");
        }
    }

    sc.starts.resize(sc.N);
    sc.goals.resize(sc.N);
    for (int a = 0; a < sc.N; ++a) {
        sc.starts[a] = AgentState{starts[a], Eigen::VectorXd::Zero(sc.d)};
        sc.goals[a] = AgentState{goals[a], Eigen::VectorXd::Zero(sc.d)};
    }
    return sc;
}

TrialMetrics run_trial(const ScenarioConfig& sc) {
    TrialMetrics tm;
    tm.variant = sc.variant;
    tm.scenario_seed = sc.seed;
    tm.N = sc.N;
    tm.d_min = sc.d_min;

    const MpcSetup setup = sc.to_setup();
    MpcState state = init_mpc(setup);
    SyncTransport transport(setup.graph);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        tm.stop = run_mpc_loop(setup, state, transport);
        tm.goal_reached = (tm.stop == MpcStopReason::GoalsReached);
    } catch (const std::exception& e) {
        tm.failed = true;
        tm.error = e.what();
    }
    tm.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    tm.outer_steps = state.t;
    tm.cumulative_iterations = state.cumulative_inner_iterations;
    for (const StepTrace& st : state.traces) {
        tm.any_relaxed = tm.any_relaxed || st.any_relaxed;
        if (st.status == AdmmStatus::MaxIters && !st.residuals.empty() &&
            st.residuals.back().primal > setup.admm.eps_primal) {
            ++tm.stalled_solves;
        }
        tm.residuals.insert(tm.residuals.end(), st.residuals.begin(), st.residuals.end());
    }

    tm.history = state.history;
    tm.inputs.assign(sc.N, {});
    for (int a = 0; a < sc.N; ++a) {
        tm.inputs[a].reserve(state.traces.size());
        for (const StepTrace& st : state.traces) tm.inputs[a].push_back(st.applied_inputs[a]);
    }

    tm.min_executed_margin = std::numeric_limits<double>::infinity();
    const int steps = state.t;
    for (int s = 0; s <= steps; ++s) {
        Eigen::MatrixXd positions(sc.N, sc.d);
        for (int a = 0; a < sc.N; ++a) positions.row(a) = state.history[a][s].position.transpose();
        bool violated = false;
        for (const MarginRecord& rec : pairwise_margins(positions, sc.d_min)) {
            tm.min_executed_margin = std::min(tm.min_executed_margin, rec.margin);
            violated = violated || rec.margin < 0.0;
        }
        if (violated) ++tm.violation_steps;
    }
    if (sc.N < 2) tm.min_executed_margin = std::numeric_limits<double>::infinity();

    tm.messages_delivered = transport.messages_delivered();
    tm.locality_violations = audit_locality(setup.graph, transport.trace()).size();
    return tm;
}

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

MonteCarloSummary monte_carlo(const ScenarioConfig& base, int n_trials,
                              const std::vector<int>& agent_counts) {
    if (n_trials < 1) throw ConfigError("need at least one trial");
    if (agent_counts.empty()) throw ConfigError("need at least one agent count");

    MonteCarloSummary summary;
    summary.base_seed = base.seed;
    summary.trials_requested = n_trials;

    for (int N : agent_counts) {
        double mean_iters_by_variant[2] = {0.0, 0.0};
        for (Variant variant : {Variant::Convex, Variant::Nonconvex}) {
            VariantSummary row;
            row.variant = variant;
            row.N = N;
            row.trials = n_trials;

            std::vector<double> iters, outer, wall;
            long violation_steps_total = 0;
            long executed_steps_total = 0;
            int violating_trials = 0;
            int completed = 0;
            int goal_reached = 0;

            for (int trial = 0; trial < n_trials; ++trial) {
                ScenarioConfig sc = base;
                sc.N = N;
                sc.variant = variant;
                // both variants share the scenario drawn from this seed
                const std::uint64_t scenario_seed =
                    mix_seed(base.seed, static_cast<std::uint64_t>(N),
                             static_cast<std::uint64_t>(trial));
                sc = generate_scenario(sc, scenario_seed);
                TrialMetrics tm = run_trial(sc);

                TrialRow tr;
                tr.N = N;
                tr.variant = variant;
                tr.trial = trial;
                tr.seed = scenario_seed;
                tr.failed = tm.failed;
                tr.goal_reached = tm.goal_reached;
                tr.iterations = tm.cumulative_iterations;
                tr.outer_steps = tm.outer_steps;
                tr.min_margin = tm.min_executed_margin;
                tr.violation_steps = tm.violation_steps;
                tr.stalled_solves = tm.stalled_solves;
                tr.wall_time_s = tm.wall_time_s;
                tr.error = tm.error;
                summary.trial_rows.push_back(std::move(tr));

                if (tm.failed) {
                    ++row.failures;
                    continue;
                }
                ++completed;
                iters.push_back(static_cast<double>(tm.cumulative_iterations));
                outer.push_back(static_cast<double>(tm.outer_steps));
                wall.push_back(tm.wall_time_s);
                violation_steps_total += tm.violation_steps;
                executed_steps_total += tm.outer_steps + 1;
                if (tm.violation_steps > 0) ++violating_trials;
                if (tm.goal_reached) ++goal_reached;
            }

            row.mean_iterations = mean_of(iters);
            row.median_iterations = median_of(iters);
            row.stddev_iterations = stddev_of(iters);
            row.step_violation_rate =
                executed_steps_total > 0
                    ? static_cast<double>(violation_steps_total) / executed_steps_total
                    : 0.0;
            row.trial_violation_rate =
                completed > 0 ? static_cast<double>(violating_trials) / completed : 0.0;
            row.goal_rate = completed > 0 ? static_cast<double>(goal_reached) / completed : 0.0;
            row.mean_outer_steps = mean_of(outer);
            row.mean_wall_time_s = mean_of(wall);
            mean_iters_by_variant[variant == Variant::Convex ? 0 : 1] = row.mean_iterations;
            summary.rows.push_back(row);
        }
        MonteCarloSummary::Ratio ratio;
        ratio.N = N;
        ratio.convex_over_nonconvex = mean_iters_by_variant[1] > 0.0
                                          ? mean_iters_by_variant[0] / mean_iters_by_variant[1]
                                          : 1.0;
        summary.ratios.push_back(ratio);
    }
    return summary;
}

}  // namespace cadmm
