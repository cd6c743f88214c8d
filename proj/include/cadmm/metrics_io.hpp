#ifndef CADMM_METRICS_IO_HPP
#define CADMM_METRICS_IO_HPP

#include <string>
#include <vector>

#include "cadmm/scenario.hpp"

namespace cadmm {

/// Exported file schemas (headers are stable and covered by tests):
///   residuals.csv     iter,primal,dual,objective
///   distances.csv     step,pair_i,pair_j,distance
///   trajectories.csv  step,agent,px,py[,pz],vx,vy[,vz],ux,uy[,uz]
/// Doubles are printed with "%.17g" so a re-parse reproduces them exactly.

void write_residuals_csv(const std::string& path, const std::vector<ResidualRecord>& records);
std::vector<ResidualRecord> read_residuals_csv(const std::string& path);

struct DistanceRow {
    int step = 0;
    int pair_i = 0;
    int pair_j = 0;
    double distance = 0.0;
};

void write_distances_csv(const std::string& path,
                         const std::vector<std::vector<AgentState>>& history);
std::vector<DistanceRow> read_distances_csv(const std::string& path);

void write_trajectories_csv(const std::string& path,
                            const std::vector<std::vector<AgentState>>& history,
                            const std::vector<std::vector<Eigen::VectorXd>>& inputs);

/// summary.json for a single run.
void write_trial_summary_json(const std::string& path, const ScenarioConfig& sc,
                              const TrialMetrics& tm);

/// summary.json for a Monte Carlo study.
void write_montecarlo_summary_json(const std::string& path, const MonteCarloSummary& summary);

/// Writes residuals.csv, distances.csv, trajectories.csv, and summary.json
/// into `dir` (created if needed) for one finished trial.
void export_trial(const std::string& dir, const ScenarioConfig& sc, const TrialMetrics& tm);

}  // namespace cadmm

#endif  // CADMM_METRICS_IO_HPP
