#include "pcrlb/smc.hpp"

#include "pcrlb/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pcrlb {

namespace {

constexpr int kSupportRedraws = 10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalizes log weights in place; returns false when all are -inf.
bool normalize_log_weights(Vector& log_w) {
  const double peak = log_w.maxCoeff();
  if (!std::isfinite(peak)) return false;
  const double total = (log_w.array() - peak).exp().sum();
  log_w.array() -= peak + std::log(total);
  return true;
}

Matrix weighted_cov(const Matrix& params, const Vector& mean, const Vector& w) {
  const Matrix centered = params.colwise() - mean;
  return symmetrize(centered * w.asDiagonal() * centered.transpose());
}

}  // namespace

AdaSchedule AdaSchedule::shrinkage(double discount) {
  AdaSchedule s;
  s.mode = Mode::shrinkage;
  s.discount = discount;
  return s;
}

AdaSchedule AdaSchedule::constant_decay(Matrix initial_cov, double decay) {
  AdaSchedule s;
  s.mode = Mode::constant_decay;
  s.initial_cov = std::move(initial_cov);
  s.decay = decay;
  return s;
}

AdaSchedule AdaSchedule::none() { return constant_decay(Matrix(0, 0), 1.0); }

Matrix AdaSchedule::jitter_cov(Index t) const {
  if (initial_cov.size() == 0) return initial_cov;
  return std::pow(decay, static_cast<double>(t)) * initial_cov;
}

void AdaSchedule::validate(Index param_dim) const {
  if (mode == Mode::shrinkage) {
    if (!(discount > 0.9 && discount <= 1.0)) throw ConfigError("schedule.discount must lie in (0.9, 1]");
    return;
  }
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("schedule.decay must lie in (0, 1]");
  if (initial_cov.size() == 0) return;
  if (initial_cov.rows() != param_dim || initial_cov.cols() != param_dim)
    throw ConfigError("schedule.initial_cov must be q x q");
  if (min_eigenvalue(initial_cov) < -1e-12 * std::max(1.0, initial_cov.cwiseAbs().maxCoeff()))
    throw ConfigError("schedule.initial_cov must be positive semi-definite");
}

std::string AdaSchedule::describe() const {
  std::ostringstream out;
  if (mode == Mode::shrinkage) {
    out << "shrinkage(discount=" << discount << ")";
  } else if (initial_cov.size() == 0) {
    out << "none";
  } else {
    out << "constant-decay(decay=" << decay << ", initial_var_trace=" << initial_cov.trace() << ")";
  }
  return out.str();
}

Vector ParticleCloud::weights() const {
  Vector w = (log_weights.array() - log_weights.maxCoeff()).exp().matrix();
  return w / w.sum();
}

ExtendedState ParticleCloud::particle(Index i) const { return {states.col(i), params.col(i)}; }

double effective_sample_size(const Vector& weights) { return 1.0 / weights.squaredNorm(); }

ParticleCloud init_cloud(const Gaussian& prior, Index state_dim, Index count, Engine& engine) {
  if (count < 1) throw ConfigError("particles must be >= 1");
  Matrix z(prior.dim(), count);
  prior.sample_into(engine, z);
  ParticleCloud cloud;
  cloud.states = z.topRows(state_dim);
  cloud.params = z.bottomRows(prior.dim() - state_dim);
  cloud.log_weights = Vector::Constant(count, -std::log(static_cast<double>(count)));
  cloud.t = 0;
  cloud.ess = static_cast<double>(count);
  return cloud;
}

namespace {

// known_weights / known_mean: normalized weights of the incoming cloud and the
// matching parameter mean, when the caller already has them.
ParticleCloud propagate_impl(ParticleCloud cloud, const Vector& y, const Vector& u, const SsmModel& model,
                             const AdaSchedule& schedule, Index t, Engine& engine, const Vector* known_weights,
                             const Vector* known_mean) {
  const Index count = cloud.size();
  const Index n = model.state_dim;
  const Index q = model.param_dim;

  // (i) artificial parameter dynamics
  Matrix kernel_root;
  Vector shrink_target;
  double keep = 1.0;
  if (q > 0) {
    if (schedule.mode == AdaSchedule::Mode::shrinkage) {
      const double d = schedule.discount;
      keep = d;
      const Vector w = known_weights ? *known_weights : cloud.weights();
      const Vector mean = known_mean ? *known_mean : Vector(cloud.params * w);
      shrink_target = (1.0 - d) * mean;
      kernel_root = psd_sqrt((1.0 - d * d) * weighted_cov(cloud.params, mean, w));
    } else if (schedule.initial_cov.size() > 0) {
      kernel_root = psd_sqrt(schedule.jitter_cov(t - 1));
    }
  }
  const bool jitter = kernel_root.size() > 0 && kernel_root.cwiseAbs().maxCoeff() > 0.0;
  if (q > 0 && (jitter || keep != 1.0)) {
    Matrix noise(q, count);
    fill_standard_normal(engine, noise);
    Matrix moved = keep * cloud.params;
    if (shrink_target.size() > 0) moved.colwise() += shrink_target;
    Matrix proposal = moved;
    if (jitter) proposal += kernel_root * noise;
    if (model.param_support) {
      Vector e(q);
      for (Index i = 0; i < count; ++i) {
        if (model.in_support(proposal.col(i))) continue;
        bool ok = false;
        for (int r = 0; r < kSupportRedraws && !ok; ++r) {
          for (Index k = 0; k < q; ++k) e(k) = standard_normal(engine);
          proposal.col(i) = moved.col(i) + (jitter ? Vector(kernel_root * e) : Vector::Zero(q));
          ok = model.in_support(proposal.col(i));
        }
        if (!ok) {
          proposal.col(i) = cloud.params.col(i);
          cloud.log_weights(i) = kNegInf;
        }
      }
    }
    cloud.params = std::move(proposal);
  }

  // (ii) state propagation through x' = f(x, theta) + u + v
  Matrix next = model.transition(cloud.states, cloud.params, t - 1);
  next.colwise() += u;
  Matrix v(n, count);
  model.process_noise.at(t - 1).sample_into(engine, v);
  next += v;
  cloud.states = std::move(next);

  // (iii) measurement likelihood, in log space
  Matrix residual = -model.measurement(cloud.states, cloud.params, t);
  residual.colwise() += y;
  const Eigen::ArrayXd log_lik = model.measurement_noise.at(t).log_density_of_residuals(residual);
  for (Index i = 0; i < count; ++i) {
    const double ll = log_lik(i);
    cloud.log_weights(i) = std::isfinite(ll) && cloud.states.col(i).allFinite() ? cloud.log_weights(i) + ll : kNegInf;
  }
  if (!normalize_log_weights(cloud.log_weights)) {
    std::ostringstream msg;
    msg << "particle weights degenerated to zero at t=" << t;
    throw DegeneracyError(msg.str(), static_cast<long>(t));
  }
  // Already normalized, so no max-shift is needed here.
  cloud.ess = effective_sample_size(cloud.log_weights.array().exp().matrix());
  cloud.t = t;
  cloud.resampled = false;
  return cloud;
}

}  // namespace

ParticleCloud propagate_and_weight(ParticleCloud cloud, const Vector& y, const Vector& u, const SsmModel& model,
                                   const AdaSchedule& schedule, Index t, Engine& engine) {
  return propagate_impl(std::move(cloud), y, u, model, schedule, t, engine, nullptr, nullptr);
}

ParticleCloud ada_step(ParticleCloud cloud, const Vector& y, const Vector& u, const SsmModel& model,
                       const AdaSchedule& schedule, Index t, Engine& engine) {
  cloud = propagate_and_weight(std::move(cloud), y, u, model, schedule, t, engine);
  if (cloud.ess < 0.5 * static_cast<double>(cloud.size())) cloud = resample_systematic(std::move(cloud), engine);
  return cloud;
}

std::vector<Index> systematic_offspring(const Vector& weights, double u0) {
  const Index count = weights.size();
  std::vector<Index> offspring(static_cast<std::size_t>(count), 0);
  const double step = 1.0 / static_cast<double>(count);
  double cumulative = weights(0);
  Index i = 0;
  for (Index k = 0; k < count; ++k) {
    const double position = (u0 + static_cast<double>(k)) * step;
    while (position >= cumulative && i < count - 1) cumulative += weights(++i);
    ++offspring[static_cast<std::size_t>(i)];
  }
  return offspring;
}

namespace {

ParticleCloud resample_with(ParticleCloud cloud, const Vector& weights, Engine& engine) {
  const Index count = cloud.size();
  const std::vector<Index> offspring = systematic_offspring(weights, uniform01(engine));
  Matrix states(cloud.states.rows(), count);
  Matrix params(cloud.params.rows(), count);
  Index k = 0;
  for (Index i = 0; i < count; ++i) {
    for (Index c = 0; c < offspring[static_cast<std::size_t>(i)]; ++c, ++k) {
      states.col(k) = cloud.states.col(i);
      params.col(k) = cloud.params.col(i);
    }
  }
  cloud.states = std::move(states);
  cloud.params = std::move(params);
  cloud.log_weights.setConstant(-std::log(static_cast<double>(count)));
  cloud.ess = static_cast<double>(count);
  cloud.resampled = true;
  return cloud;
}

}  // namespace

ParticleCloud resample_systematic(ParticleCloud cloud, Engine& engine) {
  const Vector w = cloud.weights();
  return resample_with(std::move(cloud), w, engine);
}

Vector posterior_mean(const ParticleCloud& cloud) { return cloud.params * cloud.weights(); }

Vector posterior_state_mean(const ParticleCloud& cloud) { return cloud.states * cloud.weights(); }

Matrix posterior_param_cov(const ParticleCloud& cloud) {
  const Vector w = cloud.weights();
  return weighted_cov(cloud.params, cloud.params * w, w);
}

IdentifyResult identify(const SsmModel& model, const Matrix& measurements, const Matrix& inputs, Index particles,
                        const AdaSchedule& schedule, Engine& engine) {
  schedule.validate(model.param_dim);
  const Index horizon = measurements.cols();
  if (inputs.cols() < horizon) throw ConfigError("identify: fewer inputs than measurements");
  IdentifyResult result;
  result.estimates.resize(model.param_dim, horizon);
  result.ess.reserve(static_cast<std::size_t>(horizon));
  result.resampled.reserve(static_cast<std::size_t>(horizon));
  if (horizon == 0) return result;

  ParticleCloud cloud = init_cloud(model.prior, model.state_dim, particles, engine);
  Vector w, mean;
  bool reuse = false;
  for (Index t = 1; t <= horizon; ++t) {
    cloud = propagate_impl(std::move(cloud), measurements.col(t - 1), inputs.col(t - 1), model, schedule, t, engine,
                           reuse ? &w : nullptr, reuse ? &mean : nullptr);
    w = cloud.weights();
    mean = cloud.params * w;
    result.estimates.col(t - 1) = mean;
    result.ess.push_back(cloud.ess);
    const bool resample = cloud.ess < 0.5 * static_cast<double>(cloud.size());
    if (resample) cloud = resample_with(std::move(cloud), w, engine);
    result.resampled.push_back(resample);
    reuse = !resample;
  }
  return result;
}

}  // namespace pcrlb
