#pragma once

#include "pcrlb/linalg.hpp"
#include "pcrlb/model.hpp"
#include "pcrlb/pim.hpp"
#include "pcrlb/smc.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcrlb {

// Monte-Carlo MSE matrices for t = 1..T.
struct MseSeries {
  std::vector<Matrix> mse;
  std::vector<double> trace;
  Index runs = 0;

  Index horizon() const { return static_cast<Index>(mse.size()); }
};

// truths: q x M. estimates[j]: q x T (column t-1 = estimate at t).
// Each entry is reduced in sorted order, so permuting runs leaves the result
// bit-identical.
MseSeries mse_mc(const Matrix& truths, const std::vector<Matrix>& estimates);

struct ReferenceMean {
  // q x (T+1); column 0 is the prior mean.
  Matrix mean;
  // Standard error of the replicate average, same shape.
  Matrix std_error;
  Index particles = 0;
  Index replicates = 0;
  std::string provenance;
};

struct ReferenceOptions {
  Index particles = 40000;
  Index replicates = 5;
  AdaSchedule schedule = AdaSchedule::shrinkage();
};

// High-fidelity stand-in for the exact posterior mean: the average of
// independent large-N filter runs. Replicate r uses substream
// (seed, reference, run_index, r).
ReferenceMean reference_posterior_mean(const SsmModel& model, const Matrix& measurements, const Matrix& inputs,
                                       const ReferenceOptions& options, std::uint64_t seed, Index run_index);

// reference - estimate, column-aligned.
Matrix conditional_bias(const Matrix& reference, const Matrix& estimate);

struct BiasRecord {
  // conditional[j] is q x T.
  std::vector<Matrix> conditional;
  // q x T mean over runs.
  Matrix unconditional;
  std::string provenance;
};

// references[j] may carry a leading t = 0 column; it is dropped to align with
// estimates[j] (q x T).
BiasRecord make_bias_record(const std::vector<Matrix>& references, const std::vector<Matrix>& estimates,
                            std::string provenance);

struct PsdGap {
  double trace_gap = 0.0;
  double min_eigenvalue = 0.0;
};

// Diagnostics of P - L for t = 1..T; bound entry t is aligned with mse entry
// t-1. Negative eigenvalues are reported, never clipped.
std::vector<PsdGap> psd_gap(const MseSeries& mse, const BoundSeries& bound);

struct VerdictStep {
  Index t = 0;
  Vector fraction_within;
  Vector mean_bias;
  Vector abs_mean_bias;
  std::vector<bool> eps_unbiased_param;
  std::vector<bool> alpha_unbiased;
  bool eps_unbiased = false;
  bool eps_mmse = false;
  bool eps_efficient = false;
  PsdGap gap;
  bool psd_warning = false;
};

struct Verdict {
  std::vector<VerdictStep> steps;
};

struct Tolerances {
  Vector epsilon;
  Vector alpha;
  double rho = 0.7;
};

Verdict classify(const MseSeries& mse, const BoundSeries& bound, const BiasRecord& biases, const Tolerances& tol);

// MSE decomposition on the conjugate toy y_t = theta + w_t.
struct DecompositionSetup {
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double noise_var = 1.0;
  Index horizon = 10;
  Index runs = 1000;
  double offset = 0.0;
  // 0: estimator is the exact posterior mean plus offset. Otherwise the
  // shrinkage identifier with this many particles, plus offset.
  Index particles = 0;
};

struct DecompositionResult {
  // Per t = 1..T.
  std::vector<double> mse;
  std::vector<double> mean_posterior_var;
  std::vector<double> mean_bias_sq;
  std::vector<double> residual;
  std::vector<double> std_error;
};

DecompositionResult decomposition_check(const DecompositionSetup& setup, std::uint64_t seed);

}  // namespace pcrlb
