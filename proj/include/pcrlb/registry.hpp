#pragma once

#include "pcrlb/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace pcrlb {

// Named coefficient overrides for registry models (e.g. {"a", 0.9}).
using Coefficients = std::map<std::string, double>;

// Univariate nonlinear benchmark
//   x' = a x + x / (b + x^2) + u + v,   y = c x + d x^2 + w
// with theta = [a b c d], Q = R = 1e-3, z_m = [1 0.7 0.6 0.5 0.4],
// z_c = 0.01 I, and a PRBS input of amplitude 0.5. Parameters need b > 0.
SsmModel make_benchmark_model();

// Scalar linear-Gaussian model with known coefficients (q = 0):
//   x' = a x + u + v,  y = c x + w.
// Coefficients: a (0.8), c (1), Q (0.1), R (0.1), m0 (0), P0 (1).
SsmModel make_linear_gaussian_1d(const Coefficients& overrides = {});

// Conjugate toy for the parameter posterior: y_t = theta + w_t with an
// irrelevant white-noise state. Coefficients: R (1), theta_mean (0),
// theta_var (1), Q (1).
SsmModel make_conjugate_mean_model(const Coefficients& overrides = {});

std::vector<std::string> model_names();
std::string model_summary(const std::string& name);

// Throws ConfigError for unknown names or coefficients.
SsmModel make_model(const std::string& name, const Coefficients& overrides = {});

}  // namespace pcrlb
