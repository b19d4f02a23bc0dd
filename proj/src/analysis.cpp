#include "pcrlb/analysis.hpp"

#include "pcrlb/errors.hpp"
#include "pcrlb/registry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcrlb {

namespace {

// Sum in ascending order so the result does not depend on input order.
double canonical_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

void require_aligned(const std::vector<Matrix>& runs, Index rows, Index cols, const char* what) {
  for (const Matrix& m : runs)
    if (m.rows() != rows || m.cols() != cols) throw ConfigError(std::string(what) + ": shape mismatch across runs");
}

}  // namespace

MseSeries mse_mc(const Matrix& truths, const std::vector<Matrix>& estimates) {
  const Index runs = truths.cols();
  const Index q = truths.rows();
  if (runs < 1) throw ConfigError("mse_mc: need at least one run");
  if (static_cast<Index>(estimates.size()) != runs) throw ConfigError("mse_mc: truths and estimates disagree on M");
  const Index horizon = estimates.front().cols();
  require_aligned(estimates, q, horizon, "mse_mc");

  MseSeries out;
  out.runs = runs;
  out.mse.reserve(static_cast<std::size_t>(horizon));
  std::vector<double> terms(static_cast<std::size_t>(runs));
  Matrix errors(q, runs);
  for (Index t = 0; t < horizon; ++t) {
    for (Index j = 0; j < runs; ++j) errors.col(j) = truths.col(j) - estimates[static_cast<std::size_t>(j)].col(t);
    Matrix p(q, q);
    for (Index a = 0; a < q; ++a) {
      for (Index b = a; b < q; ++b) {
        for (Index j = 0; j < runs; ++j) terms[static_cast<std::size_t>(j)] = errors(a, j) * errors(b, j);
        p(a, b) = p(b, a) = canonical_sum(terms) / static_cast<double>(runs);
      }
    }
    out.trace.push_back(p.trace());
    out.mse.push_back(std::move(p));
  }
  return out;
}

ReferenceMean reference_posterior_mean(const SsmModel& model, const Matrix& measurements, const Matrix& inputs,
                                       const ReferenceOptions& options, std::uint64_t seed, Index run_index) {
  if (options.particles < 1 || options.replicates < 1)
    throw ConfigError("reference: particles and replicates must be >= 1");
  const Index q = model.param_dim;
  const Index horizon = measurements.cols();
  const Vector prior_theta = model.prior.mean().tail(q);

  std::vector<Matrix> replicas;
  for (Index r = 0; r < options.replicates; ++r) {
    Engine engine = substream(seed, Stream::reference, static_cast<std::uint64_t>(run_index),
                              static_cast<std::uint64_t>(r));
    try {
      const IdentifyResult res = identify(model, measurements, inputs, options.particles, options.schedule, engine);
      Matrix full(q, horizon + 1);
      full.col(0) = prior_theta;
      full.rightCols(horizon) = res.estimates;
      replicas.push_back(std::move(full));
    } catch (const DegeneracyError& e) {
      std::ostringstream msg;
      msg << "reference filter degenerated (run " << run_index << ", replicate " << r << "): " << e.what();
      throw DegeneracyError(msg.str(), e.time_index());
    }
  }

  ReferenceMean ref;
  const double count = static_cast<double>(options.replicates);
  ref.mean = Matrix::Zero(q, horizon + 1);
  for (const Matrix& r : replicas) ref.mean += r;
  ref.mean /= count;
  ref.std_error = Matrix::Zero(q, horizon + 1);
  if (options.replicates > 1) {
    for (const Matrix& r : replicas) ref.std_error.array() += (r - ref.mean).array().square();
    ref.std_error = (ref.std_error.array() / (count - 1.0) / count).sqrt().matrix();
  }
  ref.particles = options.particles;
  ref.replicates = options.replicates;
  std::ostringstream prov;
  prov << "reference-smc(particles=" << options.particles << ", replicates=" << options.replicates
       << ", schedule=" << options.schedule.describe() << ")";
  ref.provenance = prov.str();
  return ref;
}

Matrix conditional_bias(const Matrix& reference, const Matrix& estimate) {
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
    throw ConfigError("conditional_bias: sequences are not aligned");
  return reference - estimate;
}

BiasRecord make_bias_record(const std::vector<Matrix>& references, const std::vector<Matrix>& estimates,
                            std::string provenance) {
  if (references.size() != estimates.size() || estimates.empty())
    throw ConfigError("bias record: references and estimates disagree on run count");
  BiasRecord rec;
  rec.provenance = std::move(provenance);
  const Index q = estimates.front().rows();
  const Index horizon = estimates.front().cols();
  require_aligned(estimates, q, horizon, "bias record");
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    const Matrix& ref = references[j];
    const Matrix aligned = ref.cols() == horizon + 1 ? Matrix(ref.rightCols(horizon)) : ref;
    rec.conditional.push_back(conditional_bias(aligned, estimates[j]));
  }
  rec.unconditional.resize(q, horizon);
  std::vector<double> terms(estimates.size());
  for (Index t = 0; t < horizon; ++t)
    for (Index i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < estimates.size(); ++j) terms[j] = rec.conditional[j](i, t);
      rec.unconditional(i, t) = canonical_sum(terms) / static_cast<double>(estimates.size());
    }
  return rec;
}

std::vector<PsdGap> psd_gap(const MseSeries& mse, const BoundSeries& bound) {
  if (bound.size() < mse.horizon() + 1) throw ConfigError("psd_gap: bound series shorter than MSE series");
  std::vector<PsdGap> out;
  out.reserve(mse.mse.size());
  for (Index t = 1; t <= mse.horizon(); ++t) {
    const Matrix diff = mse.mse[static_cast<std::size_t>(t - 1)] - bound.bounds[static_cast<std::size_t>(t)];
    out.push_back({diff.trace(), min_eigenvalue(diff)});
  }
  return out;
}

Verdict classify(const MseSeries& mse, const BoundSeries& bound, const BiasRecord& biases, const Tolerances& tol) {
  if (biases.conditional.empty()) throw ConfigError("classify: no runs");
  const Index q = biases.unconditional.rows();
  const Index horizon = biases.unconditional.cols();
  if (mse.horizon() != horizon) throw ConfigError("classify: MSE and bias series are not aligned");
  if (tol.epsilon.size() != q || tol.alpha.size() != q) throw ConfigError("classify: tolerance vectors must have q entries");
  const std::vector<PsdGap> gaps = psd_gap(mse, bound);
  const double runs = static_cast<double>(biases.conditional.size());

  Verdict verdict;
  verdict.steps.reserve(static_cast<std::size_t>(horizon));
  for (Index t = 0; t < horizon; ++t) {
    VerdictStep step;
    step.t = t + 1;
    step.fraction_within = Vector::Zero(q);
    step.mean_bias = biases.unconditional.col(t);
    step.abs_mean_bias = step.mean_bias.cwiseAbs();
    step.eps_unbiased = true;
    for (Index i = 0; i < q; ++i) {
      Index inside = 0;
      for (const Matrix& b : biases.conditional)
        if (std::abs(b(i, t)) <= tol.epsilon(i)) ++inside;
      step.fraction_within(i) = static_cast<double>(inside) / runs;
      const bool eps_ok = step.fraction_within(i) >= tol.rho;
      const bool all_within = inside == static_cast<Index>(biases.conditional.size());
      step.eps_unbiased_param.push_back(eps_ok);
      step.alpha_unbiased.push_back(step.abs_mean_bias(i) <= tol.alpha(i) || all_within);
      step.eps_unbiased = step.eps_unbiased && eps_ok;
    }
    step.eps_mmse = step.eps_unbiased;
    step.eps_efficient = step.eps_unbiased;
    step.gap = gaps[static_cast<std::size_t>(t)];
    step.psd_warning = step.gap.min_eigenvalue < 0.0;
    verdict.steps.push_back(std::move(step));
  }
  return verdict;
}

DecompositionResult decomposition_check(const DecompositionSetup& setup, std::uint64_t seed) {
  if (setup.runs < 2 || setup.horizon < 1) throw ConfigError("decomposition_check: need runs >= 2 and horizon >= 1");
  const Index horizon = setup.horizon;
  const auto runs = static_cast<std::size_t>(setup.runs);

  SsmModel model;
  if (setup.particles > 0)
    model = make_conjugate_mean_model(
        {{"R", setup.noise_var}, {"theta_mean", setup.prior_mean}, {"theta_var", setup.prior_var}});

  // d_j = (theta - estimate)^2 - V* - (B*)^2 per run and step.
  std::vector<std::vector<double>> err_sq(static_cast<std::size_t>(horizon), std::vector<double>(runs));
  auto v_star = err_sq, b_sq = err_sq, d = err_sq;

  for (std::size_t j = 0; j < runs; ++j) {
    Engine engine = substream(seed, Stream::simulation, j);
    const double theta = setup.prior_mean + std::sqrt(setup.prior_var) * standard_normal(engine);
    Matrix ys(1, horizon);
    for (Index t = 0; t < horizon; ++t) ys(0, t) = theta + std::sqrt(setup.noise_var) * standard_normal(engine);

    Matrix smc_estimates;
    if (setup.particles > 0) {
      Engine filter_engine = substream(seed, Stream::identify, j);
      smc_estimates =
          identify(model, ys, Matrix::Zero(1, horizon), setup.particles, AdaSchedule::shrinkage(), filter_engine).estimates;
    }

    double sum_y = 0.0;
    for (Index t = 0; t < horizon; ++t) {
      sum_y += ys(0, t);
      const double precision = 1.0 / setup.prior_var + static_cast<double>(t + 1) / setup.noise_var;
      const double post_var = 1.0 / precision;
      const double post_mean = post_var * (setup.prior_mean / setup.prior_var + sum_y / setup.noise_var);
      const double base = setup.particles > 0 ? smc_estimates(0, t) : post_mean;
      const double estimate = base + setup.offset;
      const double bias = post_mean - estimate;
      const auto tt = static_cast<std::size_t>(t);
      err_sq[tt][j] = (theta - estimate) * (theta - estimate);
      v_star[tt][j] = post_var;
      b_sq[tt][j] = bias * bias;
      d[tt][j] = err_sq[tt][j] - post_var - bias * bias;
    }
  }

  DecompositionResult out;
  const double m = static_cast<double>(runs);
  for (std::size_t t = 0; t < static_cast<std::size_t>(horizon); ++t) {
    out.mse.push_back(canonical_sum(err_sq[t]) / m);
    out.mean_posterior_var.push_back(canonical_sum(v_star[t]) / m);
    out.mean_bias_sq.push_back(canonical_sum(b_sq[t]) / m);
    const double mean_d = canonical_sum(d[t]) / m;
    double ss = 0.0;
    for (double v : d[t]) ss += (v - mean_d) * (v - mean_d);
    out.residual.push_back(out.mse.back() - (out.mean_posterior_var.back() + out.mean_bias_sq.back()));
    out.std_error.push_back(std::sqrt(ss / (m - 1.0)) / std::sqrt(m));
  }
  return out;
}

}  // namespace pcrlb
