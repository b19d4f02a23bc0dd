#pragma once

#include "pcrlb/model.hpp"
#include "pcrlb/registry.hpp"
#include "pcrlb/smc.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcrlb {

// Everything a pipeline run depends on. Loaded from a JSON file; CLI flags
// override individual keys.
//
//   {
//     "model": "benchmark-eq13"            // or {"name": ..., overrides...}
//     "mc_runs": 100, "horizon": 300, "particles": 2000,
//     "reference": {"multiplier": 20, "replicates": 5},
//     "schedule": {"mode": "shrinkage", "discount": 0.98},
//     "epsilon": 0.01, "alpha": 0.001, "rho": 0.7,
//     "seed": 42, "output": "runs/bench", "workers": 0
//   }
//
// Model overrides: "coefficients" (registry-specific), "process_noise",
// "meas_noise" (number or matrix), "prior_mean", "prior_cov" (matrix) or
// "prior_var" (vector), and "input" ({"kind": "zero" | "prbs" | "values"}).
struct RunConfig {
  nlohmann::json model = nullptr;
  Index mc_runs = 100;
  Index horizon = 300;
  Index particles = 2000;
  Index reference_multiplier = 20;
  Index reference_replicates = 5;
  AdaSchedule schedule = AdaSchedule::shrinkage();
  std::vector<double> epsilon{0.01};
  std::vector<double> alpha{0.001};
  double rho = 0.7;
  std::uint64_t seed = 42;
  std::string output;
  unsigned workers = 0;

  std::string model_name() const;
  // Throws ConfigError naming the offending field.
  SsmModel build_model() const;
  void validate() const;

  // Schedule with a constant-decay covariance expanded to var * I_q.
  AdaSchedule schedule_for(Index q) const;

  // Per-parameter tolerances, broadcasting scalars to q entries.
  Vector epsilon_for(Index q) const;
  Vector alpha_for(Index q) const;

  // Canonical form of every result-affecting key (excludes output and workers).
  nlohmann::json canonical() const;
  std::string hash() const;

 private:
  SsmModel build_model_impl() const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace pcrlb
