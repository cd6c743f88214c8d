#include "cadmm/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cadmm {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

/// JSON has no representation for infinities; report them as null.
ordered_json json_number(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

void write_residuals_csv(const std::string& path, const std::vector<ResidualRecord>& records) {
    std::ofstream out = open_out(path);
    out << "iter,primal,dual,objective\n";
    for (const ResidualRecord& r : records) {
        out << r.iter << ',' << fmt(r.primal) << ',' << fmt(r.dual) << ','
            << fmt(r.global_objective) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResidualRecord> read_residuals_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "iter,primal,dual,objective") {
        throw std::runtime_error(path + ": unexpected residuals header");
    }
    std::vector<ResidualRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw std::runtime_error(path + ": malformed row: " + line);
        ResidualRecord r;
        r.iter = std::stoi(f[0]);
        r.primal = std::stod(f[1]);
        r.dual = std::stod(f[2]);
        r.global_objective = std::stod(f[3]);
        records.push_back(r);
    }
    return records;
}

void write_distances_csv(const std::string& path,
                         const std::vector<std::vector<AgentState>>& history) {
    std::ofstream out = open_out(path);
    out << "step,pair_i,pair_j,distance\n";
    if (history.empty()) return;
    const int N = static_cast<int>(history.size());
    const std::size_t steps = history[0].size();
    for (const auto& h : history) {
        if (h.size() != steps) throw std::invalid_argument("uneven history lengths");
    }
    for (std::size_t s = 0; s < steps; ++s) {
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j) {
                const double dist =
                    (history[i][s].position - history[j][s].position).norm();
                out << s << ',' << i << ',' << j << ',' << fmt(dist) << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<DistanceRow> read_distances_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "step,pair_i,pair_j,distance") {
        throw std::runtime_error(path + ": unexpected distances header");
    }
    std::vector<DistanceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw std::runtime_error(path + ": malformed row: " + line);
        DistanceRow r;
        r.step = std::stoi(f[0]);
        r.pair_i = std::stoi(f[1]);
        r.pair_j = std::stoi(f[2]);
        r.distance = std::stod(f[3]);
        rows.push_back(r);
    }
    return rows;
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<std::vector<AgentState>>& history,
                            const std::vector<std::vector<Eigen::VectorXd>>& inputs) {
    std::ofstream out = open_out(path);
    if (history.empty()) {
        out << "step,agent\n";
        return;
    }
    const int N = static_cast<int>(history.size());
    const int d = static_cast<int>(history[0][0].position.size());
    const char* axes = "xyz";
    out << "step,agent";
    for (int a = 0; a < d; ++a) out << ",p" << axes[a];
    for (int a = 0; a < d; ++a) out << ",v" << axes[a];
    for (int a = 0; a < d; ++a) out << ",u" << axes[a];
    out << '\n';

    const std::size_t steps = history[0].size();
    for (std::size_t s = 0; s < steps; ++s) {
        for (int agent = 0; agent < N; ++agent) {
            out << s << ',' << agent;
            const AgentState& x = history[agent][s];
            for (int a = 0; a < d; ++a) out << ',' << fmt(x.position(a));
            for (int a = 0; a < d; ++a) out << ',' << fmt(x.velocity(a));
            // the input applied while leaving step s; the final state has none
            const bool has_input = s < inputs[agent].size();
            for (int a = 0; a < d; ++a) {
                out << ',' << (has_input ? fmt(inputs[agent][s](a)) : fmt(0.0));
            }
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

ordered_json scenario_json(const ScenarioConfig& sc) {
    ordered_json j;
    j["agents"] = sc.N;
    j["dim"] = sc.d;
    j["box"] = std::vector<double>(sc.box.data(), sc.box.data() + sc.box.size());
    j["d_min"] = sc.d_min;
    j["T"] = sc.horizon.T;
    j["dt"] = sc.horizon.dt;
    j["a_max"] = sc.a_max;
    j["rho"] = sc.rho;
    j["eps_base"] = sc.eps_base;
    j["max_inner_iters"] = sc.max_inner_iters;
    j["variant"] = variant_name(sc.variant);
    j["seed"] = sc.seed;
    if (sc.concrete()) {
        auto points = [](const std::vector<AgentState>& states) {
            ordered_json arr = ordered_json::array();
            for (const AgentState& s : states) {
                arr.push_back(std::vector<double>(s.position.data(),
                                                  s.position.data() + s.position.size()));
            }
            return arr;
        };
        j["starts"] = points(sc.starts);
        j["goals"] = points(sc.goals);
    }
    return j;
}

}  // namespace

void write_trial_summary_json(const std::string& path, const ScenarioConfig& sc,
                              const TrialMetrics& tm) {
    ordered_json j;
    j["kind"] = "trial";
    j["scenario"] = scenario_json(sc);
    j["failed"] = tm.failed;
    j["error"] = tm.error;
    j["stop"] = stop_reason_name(tm.stop);
    j["goal_reached"] = tm.goal_reached;
    j["outer_steps"] = tm.outer_steps;
    j["cumulative_iterations"] = tm.cumulative_iterations;
    j["stalled_solves"] = tm.stalled_solves;
    j["any_relaxed"] = tm.any_relaxed;
    j["min_executed_margin"] = json_number(tm.min_executed_margin);
    j["violation_steps"] = tm.violation_steps;
    j["messages_delivered"] = tm.messages_delivered;
    j["locality_violations"] = tm.locality_violations;
    j["wall_time_s"] = tm.wall_time_s;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_montecarlo_summary_json(const std::string& path, const MonteCarloSummary& summary) {
    ordered_json j;
    j["kind"] = "montecarlo";
    j["base_seed"] = summary.base_seed;
    j["trials_requested"] = summary.trials_requested;
    j["rows"] = ordered_json::array();
    for (const VariantSummary& row : summary.rows) {
        ordered_json r;
        r["N"] = row.N;
        r["variant"] = variant_name(row.variant);
        r["trials"] = row.trials;
        r["failures"] = row.failures;
        r["mean_iterations"] = row.mean_iterations;
        r["median_iterations"] = row.median_iterations;
        r["stddev_iterations"] = row.stddev_iterations;
        r["step_violation_rate"] = row.step_violation_rate;
        r["trial_violation_rate"] = row.trial_violation_rate;
        r["goal_rate"] = row.goal_rate;
        r["mean_outer_steps"] = row.mean_outer_steps;
        r["mean_wall_time_s"] = row.mean_wall_time_s;
        j["rows"].push_back(r);
    }
    j["iteration_ratios"] = ordered_json::array();
    for (const auto& ratio : summary.ratios) {
        ordered_json r;
        r["N"] = ratio.N;
        r["convex_over_nonconvex"] = ratio.convex_over_nonconvex;
        j["iteration_ratios"].push_back(r);
    }
    j["trials"] = ordered_json::array();
    for (const TrialRow& tr : summary.trial_rows) {
        ordered_json r;
        r["N"] = tr.N;
        r["variant"] = variant_name(tr.variant);
        r["trial"] = tr.trial;
        r["seed"] = tr.seed;
        r["failed"] = tr.failed;
        r["goal_reached"] = tr.goal_reached;
        r["iterations"] = tr.iterations;
        r["outer_steps"] = tr.outer_steps;
        r["min_margin"] = json_number(tr.min_margin);
        r["violation_steps"] = tr.violation_steps;
        r["stalled_solves"] = tr.stalled_solves;
        r["wall_time_s"] = tr.wall_time_s;
        r["error"] = tr.error;
        j["trials"].push_back(r);
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void export_trial(const std::string& dir, const ScenarioConfig& sc, const TrialMetrics& tm) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_residuals_csv((base / "residuals.csv").string(), tm.residuals);
    write_distances_csv((base / "distances.csv").string(), tm.history);
    write_trajectories_csv((base / "trajectories.csv").string(), tm.history, tm.inputs);
    write_trial_summary_json((base / "summary.json").string(), sc, tm);
}

}  // namespace cadmm
