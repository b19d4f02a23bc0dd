#include "pcrlb/model.hpp"

#include "pcrlb/errors.hpp"
#include "pcrlb/parallel.hpp"

#include <algorithm>
#include <sstream>

namespace pcrlb {

namespace {

std::string describe_state(const ExtendedState& z) {
  std::ostringstream out;
  Eigen::IOFormat fmt(Eigen::StreamPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "[", "]");
  out << "x=" << z.x.transpose().format(fmt) << " theta=" << z.theta.transpose().format(fmt);
  return out.str();
}

void require_finite(const Matrix& value, const char* what, const ExtendedState& z, Index t) {
  if (value.allFinite()) return;
  std::ostringstream msg;
  msg << what << " produced a non-finite value at t=" << t << " for " << describe_state(z);
  throw ModelEvaluationError(msg.str(), static_cast<long>(t));
}

Matrix as_column(const Vector& v) { return Matrix(v); }

}  // namespace

Vector ExtendedState::stacked() const {
  Vector z(dim());
  z << x, theta;
  return z;
}

ExtendedState ExtendedState::split(const Vector& z, Index state_dim) {
  return {z.head(state_dim), z.tail(z.size() - state_dim)};
}

NoiseSequence::NoiseSequence(std::vector<Matrix> covariances) {
  if (covariances.empty()) throw ConfigError("noise sequence must hold at least one covariance");
  laws_.reserve(covariances.size());
  for (auto& c : covariances) {
    if (!laws_.empty() && c.rows() != laws_.front().dim())
      throw ConfigError("noise sequence covariances differ in dimension");
    laws_.push_back(Gaussian::zero_mean(std::move(c)));
  }
}

const Gaussian& NoiseSequence::at(Index t) const {
  if (laws_.empty()) throw ConfigError("noise sequence is empty");
  const auto i = std::clamp<Index>(t, 0, static_cast<Index>(laws_.size()) - 1);
  return laws_[static_cast<std::size_t>(i)];
}

InputSignal InputSignal::zero(Index dim) {
  InputSignal s;
  s.dim_ = dim;
  s.table_ = Matrix::Zero(dim, 1);
  s.periodic_ = true;
  s.description_ = "zero";
  return s;
}

InputSignal InputSignal::prbs(Index dim, double amplitude, Index hold, std::uint32_t seed) {
  if (hold < 1) throw ConfigError("input.hold must be >= 1");
  constexpr int period = 127;
  InputSignal s;
  s.dim_ = dim;
  s.hold_ = hold;
  s.periodic_ = true;
  s.table_.resize(dim, period);
  std::uint32_t reg = seed % period + 1;  // any nonzero 7-bit state
  for (int k = 0; k < period; ++k) {
    const std::uint32_t bit = ((reg >> 6) ^ (reg >> 5)) & 1u;  // x^7 + x^6 + 1
    reg = ((reg << 1) | bit) & 0x7fu;
    s.table_.col(k).setConstant(bit != 0 ? amplitude : -amplitude);
  }
  std::ostringstream d;
  d << "prbs(amplitude=" << amplitude << ", hold=" << hold << ", seed=" << seed << ")";
  s.description_ = d.str();
  return s;
}

InputSignal InputSignal::values(Matrix columns) {
  InputSignal s;
  s.dim_ = columns.rows();
  s.table_ = std::move(columns);
  s.periodic_ = false;
  s.description_ = "values";
  return s;
}

Vector InputSignal::at(Index t) const {
  if (table_.cols() == 0) return Vector::Zero(dim_);
  if (periodic_) return table_.col((t / hold_) % table_.cols());
  if (t < 0 || t >= table_.cols()) return Vector::Zero(dim_);
  return table_.col(t);
}

Matrix InputSignal::sequence(Index horizon) const {
  Matrix out(dim_, horizon);
  for (Index t = 0; t < horizon; ++t) out.col(t) = at(t);
  return out;
}

void SsmModel::validate() const {
  if (state_dim < 1) throw ConfigError("model.state_dim must be positive");
  if (param_dim < 0) throw ConfigError("model.param_dim must be non-negative");
  if (meas_dim < 1) throw ConfigError("model.meas_dim must be positive");
  if (!transition || !measurement) throw ConfigError("model " + name + " lacks transition or measurement map");
  if (process_noise.dim() != state_dim) throw ConfigError("model.process_noise dimension must equal state_dim");
  if (measurement_noise.dim() != meas_dim) throw ConfigError("model.meas_noise dimension must equal meas_dim");
  if (prior.dim() != extended_dim()) throw ConfigError("model.prior dimension must equal state_dim + param_dim");
  if (input.dim() != state_dim) throw ConfigError("model.input dimension must equal state_dim");
  if (static_cast<Index>(param_names.size()) != param_dim)
    throw ConfigError("model.param_names must list param_dim names");
}

std::vector<ExtendedState> sample_prior(const SsmModel& model, Index count, Engine& engine) {
  std::vector<ExtendedState> out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(count, 0)));
  for (Index i = 0; i < count; ++i)
    out.push_back(ExtendedState::split(model.prior.sample(engine), model.state_dim));
  return out;
}

Vector step_state(const SsmModel& model, const ExtendedState& z, const Vector& u, const Vector& v, Index t) {
  if (z.x.size() != model.state_dim || z.theta.size() != model.param_dim || u.size() != model.state_dim ||
      v.size() != model.state_dim)
    throw ConfigError("step_state: dimension mismatch");
  Matrix next = model.transition(as_column(z.x), as_column(z.theta), t);
  next.col(0) += u + v;
  require_finite(next, "transition", z, t);
  return next.col(0);
}

Vector step_measurement(const SsmModel& model, const ExtendedState& z, const Vector& w, Index t) {
  if (z.x.size() != model.state_dim || z.theta.size() != model.param_dim || w.size() != model.meas_dim)
    throw ConfigError("step_measurement: dimension mismatch");
  Matrix y = model.measurement(as_column(z.x), as_column(z.theta), t);
  y.col(0) += w;
  require_finite(y, "measurement", z, t);
  return y.col(0);
}

double log_transition_density(const SsmModel& model, const Vector& x_next, const ExtendedState& z, const Vector& u,
                              Index t) {
  const Vector mean = step_state(model, z, u, Vector::Zero(model.state_dim), t);
  return model.process_noise.at(t).log_density_of_residuals(x_next - mean)(0);
}

double log_measurement_density(const SsmModel& model, const Vector& y, const ExtendedState& z, Index t) {
  const Vector mean = step_measurement(model, z, Vector::Zero(model.meas_dim), t);
  return model.measurement_noise.at(t).log_density_of_residuals(y - mean)(0);
}

TrajectoryEnsemble simulate_ensemble(const SsmModel& model, Index count, Index horizon, std::uint64_t seed,
                                     unsigned workers) {
  if (count < 1) throw ConfigError("mc_runs must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  model.validate();

  const Index n = model.state_dim;
  const Index q = model.param_dim;
  const Index m = model.meas_dim;

  TrajectoryEnsemble ens;
  ens.count = count;
  ens.horizon = horizon;
  ens.master_seed = seed;
  ens.states.assign(static_cast<std::size_t>(count), Matrix(n, horizon + 1));
  ens.measurements.assign(static_cast<std::size_t>(count), Matrix(m, horizon));
  ens.params.resize(q, count);
  ens.inputs = model.input.sequence(horizon);

  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t j) {
    Engine engine = substream(seed, Stream::simulation, j);
    ExtendedState z = ExtendedState::split(model.prior.sample(engine), n);
    ens.params.col(static_cast<Index>(j)) = z.theta;
    Matrix& xs = ens.states[j];
    Matrix& ys = ens.measurements[j];
    xs.col(0) = z.x;
    for (Index t = 0; t < horizon; ++t) {
      try {
        const Vector v = model.process_noise.at(t).sample(engine);
        z.x = step_state(model, z, ens.inputs.col(t), v, t);
        const Vector w = model.measurement_noise.at(t + 1).sample(engine);
        ys.col(t) = step_measurement(model, z, w, t + 1);
      } catch (const ModelEvaluationError& e) {
        throw ModelEvaluationError("trajectory " + std::to_string(j) + ": " + e.what(), e.time_index());
      }
      xs.col(t + 1) = z.x;
    }
  });
  return ens;
}

}  // namespace pcrlb
