#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cadmm/config_io.hpp"
#include "cadmm/metrics_io.hpp"
#include "cadmm/mpc.hpp"
#include "cadmm/scenario.hpp"

namespace {

using cadmm::ScenarioConfig;
using cadmm::TrialMetrics;
using cadmm::Variant;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string variant;   // empty = take from config
    std::string engine;    // empty = take from config
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void apply_overrides(ScenarioConfig& sc, const CommonArgs& args) {
    if (!args.variant.empty()) {
        sc.variant = (args.variant == "convex") ? Variant::Convex : Variant::Nonconvex;
    }
    if (!args.engine.empty()) sc.mpc.threaded = (args.engine == "threaded");
    if (args.seed_set) sc.seed = args.seed;
}

/// Configs with an explicit [agents] instance are used as-is; otherwise the
/// starts and goals are drawn from the config seed.
ScenarioConfig concrete_or_generated(const ScenarioConfig& base) {
    return base.concrete() ? base : cadmm::generate_scenario(base, base.seed);
}

int do_run(const CommonArgs& args) {
    ScenarioConfig base = cadmm::scenario_from_file(args.config_path);
    apply_overrides(base, args);
    const ScenarioConfig sc = concrete_or_generated(base);
    const TrialMetrics tm = cadmm::run_trial(sc);
    cadmm::export_trial(args.out_dir, sc, tm);
    std::cout << "variant=" << cadmm::variant_name(sc.variant)
              << " stop=" << (tm.failed ? "failed" : cadmm::stop_reason_name(tm.stop))
              << " outer_steps=" << tm.outer_steps
              << " iterations=" << tm.cumulative_iterations << "\n";
    if (tm.failed) {
        std::cerr << "trial failed: " << tm.error << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int do_compare(const CommonArgs& args) {
    ScenarioConfig base = cadmm::scenario_from_file(args.config_path);
    apply_overrides(base, args);
    const std::filesystem::path out(args.out_dir);
    std::filesystem::create_directories(out);

    nlohmann::ordered_json j;
    j["kind"] = "compare";
    j["seed"] = base.seed;
    bool any_failed = false;
    long iters[2] = {0, 0};
    for (Variant variant : {Variant::Convex, Variant::Nonconvex}) {
        ScenarioConfig sc = base;
        sc.variant = variant;
        sc = concrete_or_generated(sc);  // identical scenario both times
        const TrialMetrics tm = cadmm::run_trial(sc);
        const std::string name = cadmm::variant_name(variant);
        cadmm::export_trial((out / name).string(), sc, tm);
        nlohmann::ordered_json r;
        r["failed"] = tm.failed;
        r["stop"] = cadmm::stop_reason_name(tm.stop);
        r["goal_reached"] = tm.goal_reached;
        r["outer_steps"] = tm.outer_steps;
        r["cumulative_iterations"] = tm.cumulative_iterations;
        r["min_executed_margin"] =
            std::isfinite(tm.min_executed_margin) ? nlohmann::ordered_json(tm.min_executed_margin)
                                                  : nlohmann::ordered_json(nullptr);
        r["violation_steps"] = tm.violation_steps;
        r["stalled_solves"] = tm.stalled_solves;
        j[name] = r;
        any_failed = any_failed || tm.failed;
        iters[variant == Variant::Convex ? 0 : 1] = tm.cumulative_iterations;
        std::cout << name << ": stop=" << (tm.failed ? "failed" : cadmm::stop_reason_name(tm.stop))
                  << " iterations=" << tm.cumulative_iterations
                  << " min_margin=" << tm.min_executed_margin << "\n";
    }
    j["iteration_ratio_convex_over_nonconvex"] =
        iters[1] > 0 ? static_cast<double>(iters[0]) / iters[1] : 1.0;
    std::ofstream summary(out / "summary.json");
    summary << j.dump(2) << '\n';
    return any_failed ? kExitRuntime : kExitOk;
}

int do_montecarlo(const CommonArgs& args, int trials, const std::vector<int>& agents) {
    ScenarioConfig base = cadmm::scenario_from_file(args.config_path);
    apply_overrides(base, args);
    if (base.concrete()) {
        throw cadmm::ConfigError(
            "montecarlo needs a randomized config; remove the explicit [agents] instance");
    }
    const cadmm::MonteCarloSummary summary = cadmm::monte_carlo(base, trials, agents);
    std::filesystem::create_directories(args.out_dir);
    cadmm::write_montecarlo_summary_json(
        (std::filesystem::path(args.out_dir) / "summary.json").string(), summary);
    for (const auto& row : summary.rows) {
        std::cout << "N=" << row.N << " variant=" << cadmm::variant_name(row.variant)
                  << " mean_iterations=" << row.mean_iterations << " goal_rate=" << row.goal_rate
                  << " failures=" << row.failures << "\n";
    }
    for (const auto& ratio : summary.ratios) {
        std::cout << "N=" << ratio.N
                  << " iteration_ratio_convex_over_nonconvex=" << ratio.convex_over_nonconvex
                  << "\n";
    }
    return kExitOk;
}

/// One inner consensus solve of the first-step problem, without the
/// receding-horizon loop. Exports the full residual trace plus the planned
/// (not executed) trajectories each agent owns at the end.
int do_solve(const CommonArgs& args) {
    ScenarioConfig base = cadmm::scenario_from_file(args.config_path);
    apply_overrides(base, args);
    const ScenarioConfig sc = concrete_or_generated(base);
    const cadmm::MpcSetup setup = sc.to_setup();
    const cadmm::MpcState state = cadmm::init_mpc(setup);
    const cadmm::ConsensusProblem problem = cadmm::build_step_problem(setup, state);

    const int N = setup.packing.N;
    const Eigen::VectorXd init =
        cadmm::straight_line_init(setup.packing, state.current, setup.goals);
    std::vector<cadmm::LocalCopy> copies(N);
    std::vector<cadmm::DualState> duals(N);
    for (int a = 0; a < N; ++a) {
        copies[a] = cadmm::LocalCopy{a, init};
        duals[a] = cadmm::DualState{a, Eigen::VectorXd::Zero(setup.packing.dim())};
    }
    cadmm::SyncTransport transport(setup.graph);
    const cadmm::AdmmResult result =
        cadmm::run_admm(problem, std::move(copies), std::move(duals), transport, sc.mpc.threaded);

    // Each agent flies the block it owns; neighbor copies are scaffolding.
    std::vector<std::vector<cadmm::AgentState>> plans(N);
    std::vector<std::vector<Eigen::VectorXd>> inputs(N);
    for (int a = 0; a < N; ++a) {
        const Eigen::VectorXd block = setup.packing.agent_block(result.copies[a].theta, a);
        auto [states, u] = setup.packing.block.unpack(block);
        plans[a] = std::move(states);
        for (int k = 0; k < u.rows(); ++k) inputs[a].emplace_back(u.row(k).transpose());
    }
    double min_planned = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; N > 1 && k < plans[0].size(); ++k) {
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j) {
                min_planned =
                    std::min(min_planned, (plans[i][k].position - plans[j][k].position).norm());
            }
        }
    }

    const std::filesystem::path out(args.out_dir);
    std::filesystem::create_directories(out);
    cadmm::write_residuals_csv((out / "residuals.csv").string(), result.trace);
    cadmm::write_distances_csv((out / "distances.csv").string(), plans);
    cadmm::write_trajectories_csv((out / "trajectories.csv").string(), plans, inputs);

    const cadmm::ResidualRecord& last = result.trace.back();
    const bool converged = result.status == cadmm::AdmmStatus::Converged;
    nlohmann::ordered_json j;
    j["kind"] = "solve";
    j["variant"] = cadmm::variant_name(sc.variant);
    j["seed"] = sc.seed;
    j["agents"] = N;
    j["dim"] = setup.packing.dim();
    j["rho"] = problem.cfg.rho;
    j["eps_primal"] = problem.cfg.eps_primal;
    j["eps_dual"] = problem.cfg.eps_dual;
    j["iterations"] = result.iterations;
    j["status"] = converged ? "converged" : "max_inner_iters";
    j["final_primal"] = last.primal;
    j["final_dual"] = last.dual;
    j["final_objective"] = last.global_objective;
    j["min_planned_distance"] =
        std::isfinite(min_planned) ? nlohmann::ordered_json(min_planned)
                                   : nlohmann::ordered_json(nullptr);
    j["qp_iterations_total"] = result.qp_iterations_total;
    j["messages_delivered"] = transport.messages_delivered();
    j["locality_violations"] = cadmm::audit_locality(setup.graph, transport.trace()).size();
    std::ofstream summary(out / "summary.json");
    summary << j.dump(2) << '\n';

    std::cout << "variant=" << cadmm::variant_name(sc.variant)
              << " status=" << (converged ? "converged" : "max_inner_iters")
              << " iterations=" << result.iterations << " final_primal=" << last.primal
              << " final_dual=" << last.dual << " objective=" << last.global_objective
              << " min_planned_distance=" << min_planned << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed multi-robot trajectory optimization runner"};
    app.require_subcommand(1);

    CommonArgs args;
    int trials = 40;
    std::vector<int> agents{3, 5};

    auto add_common = [&](CLI::App* cmd, bool with_variant) {
        cmd->add_option("--config", args.config_path, "scenario config file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", args.out_dir, "output directory")->required();
        cmd->add_option("--seed", args.seed, "override the config seed")
            ->each([&](const std::string&) { args.seed_set = true; });
        cmd->add_option("--engine", args.engine, "serial or threaded")
            ->check(CLI::IsMember({"serial", "threaded"}));
        if (with_variant) {
            cmd->add_option("--variant", args.variant, "convex or nonconvex")
                ->check(CLI::IsMember({"convex", "nonconvex"}));
        }
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one scenario and export metrics");
    add_common(run_cmd, true);

    CLI::App* mc_cmd = app.add_subcommand("montecarlo", "paired Monte Carlo study over both variants");
    add_common(mc_cmd, false);
    mc_cmd->add_option("--trials", trials, "trials per agent count")->check(CLI::PositiveNumber);
    mc_cmd->add_option("--agents", agents, "agent counts to sweep")->delimiter(',');

    CLI::App* cmp_cmd = app.add_subcommand("compare", "run both variants on the identical scenario");
    add_common(cmp_cmd, false);

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "single inner solve of the first-step problem");
    add_common(solve_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return do_run(args);
        if (mc_cmd->parsed()) return do_montecarlo(args, trials, agents);
        if (cmp_cmd->parsed()) return do_compare(args);
        if (solve_cmd->parsed()) return do_solve(args);
    } catch (const cadmm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
