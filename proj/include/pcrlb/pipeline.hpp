#pragma once

#include "pcrlb/analysis.hpp"
#include "pcrlb/config.hpp"
#include "pcrlb/csv.hpp"
#include "pcrlb/pim.hpp"
#include "pcrlb/smc.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pcrlb {

inline constexpr const char* kVersion = "0.1.0";

// Run-directory layout. Column orders of every CSV below are stable.
namespace layout {
inline constexpr const char* ensemble = "ensemble.csv";
inline constexpr const char* bound = "bound.csv";
inline constexpr const char* bound_matrices = "bound_matrices.csv";
inline constexpr const char* bound_summary = "bound_summary.json";
inline constexpr const char* estimates_dir = "estimates";
inline constexpr const char* reference_dir = "reference";
inline constexpr const char* estimates = "estimates.csv";
inline constexpr const char* identify_manifest = "identify.json";
inline constexpr const char* analysis = "analysis.csv";
inline constexpr const char* bias = "bias.csv";
inline constexpr const char* analysis_summary = "analysis_summary.json";
inline constexpr const char* manifest = "manifest.json";
}  // namespace layout

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "PCRLB_OUTPUT_ROOT";

// --out / "output" if set, else $PCRLB_OUTPUT_ROOT/<model>-seed<seed>, else
// ./pcrlb-runs/<model>-seed<seed>.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

// trajectory,t,x_1..x_n,theta_1..theta_q,u_1..u_n,y_1..y_m; one row per
// (trajectory, t) with t = 0..T. y is empty at t = 0 and u at t = T.
std::string ensemble_csv(const TrajectoryEnsemble& ensemble);
TrajectoryEnsemble parse_ensemble(const CsvTable& table, Index state_dim, Index param_dim, Index meas_dim);

// t,L_diag_1..L_diag_q,cond_Jx,regularization_events
std::string bound_csv(const BoundSeries& bound);
// t,L_1_1,L_1_2,...,L_q_q (row-major)
std::string bound_matrices_csv(const BoundSeries& bound);
BoundSeries parse_bound_matrices(const CsvTable& table, Index param_dim);

// run_index,t,theta_hat_1..theta_hat_q,ess,resampled_flag for t = 1..T
std::string estimates_csv(Index run, const IdentifyResult& result);
// run_index,t,theta_ref_1..q,std_err_1..q for t = 0..T
std::string reference_csv(Index run, const ReferenceMean& ref);

struct StageReport {
  std::string stage;
  std::vector<std::filesystem::path> files;
  std::vector<Index> failed_runs;
  Index processed_runs = 0;
  double seconds = 0.0;
};

// Module 1: ensemble simulation and PCRLB recursion.
StageReport cmd_bound(const RunConfig& cfg);
// Module 2: identifier and reference posterior means per run; resumable.
StageReport cmd_identify(const RunConfig& cfg);
// Module 3: MSE, biases, classification.
StageReport cmd_analyze(const RunConfig& cfg);
std::vector<StageReport> cmd_all(const RunConfig& cfg);

std::string list_models_text();

// 0 success, 2 config error, 3 numerical failure, 4 IO error.
int exit_code_for(const std::exception& e);

}  // namespace pcrlb
