#pragma once

#include "pcrlb/gaussian.hpp"
#include "pcrlb/linalg.hpp"
#include "pcrlb/random.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pcrlb {

// Z_t = [x_t; theta_t].
struct ExtendedState {
  Vector x;
  Vector theta;

  Index dim() const { return x.size() + theta.size(); }
  Vector stacked() const;
  static ExtendedState split(const Vector& z, Index state_dim);
};

// First and second derivatives of a vector map h(x, theta) with respect to
// the stacked argument [x; theta]. `jacobian` is out_dim x (n + q);
// `hessians[k]` is the (n + q) x (n + q) Hessian of output k.
struct MapDerivatives {
  Matrix jacobian;
  std::vector<Matrix> hessians;
};

// Column-batched map: column j of the result is h(x.col(j), theta.col(j), t).
using BatchMap = std::function<Matrix(const Matrix& x, const Matrix& theta, Index t)>;
using DerivativeMap = std::function<MapDerivatives(const Vector& x, const Vector& theta, Index t)>;

// Per-step Gaussian noise laws. A sequence of length one is broadcast to all
// steps; longer sequences clamp at their last entry.
class NoiseSequence {
 public:
  NoiseSequence() = default;
  explicit NoiseSequence(std::vector<Matrix> covariances);
  static NoiseSequence constant(const Matrix& covariance) { return NoiseSequence({covariance}); }

  const Gaussian& at(Index t) const;
  Index dim() const { return laws_.empty() ? 0 : laws_.front().dim(); }
  Index length() const { return static_cast<Index>(laws_.size()); }

 private:
  std::vector<Gaussian> laws_;
};

// Deterministic input sequence u_t, added to the state update x_{t+1}.
class InputSignal {
 public:
  InputSignal() = default;

  static InputSignal zero(Index dim);
  // Maximal-length 7-bit LFSR sequence mapped to {-amplitude, +amplitude},
  // each bit held for `hold` steps. `seed` selects the nonzero start register.
  static InputSignal prbs(Index dim, double amplitude, Index hold, std::uint32_t seed);
  // Explicit values; column t is u_t. Steps beyond the end repeat zero.
  static InputSignal values(Matrix columns);

  Index dim() const { return dim_; }
  Vector at(Index t) const;
  // Columns u_0 .. u_{horizon-1}.
  Matrix sequence(Index horizon) const;
  const std::string& description() const { return description_; }

 private:
  Index dim_ = 0;
  Matrix table_;
  Index hold_ = 1;
  bool periodic_ = false;
  std::string description_ = "zero";
};

// Additive-noise nonlinear state-space model over the extended state:
//   x_{t+1} = f_t(x_t, theta) + u_t + v_t,   v_t ~ N(0, Q_t)
//   theta_{t+1} = theta_t
//   y_t = g_t(x_t, theta) + w_t,             w_t ~ N(0, R_t)
//   [x_0; theta_0] ~ N(z_m, z_c)
// The maps must be safe to call concurrently.
struct SsmModel {
  std::string name;
  Index state_dim = 0;
  Index param_dim = 0;
  Index meas_dim = 0;
  std::vector<std::string> param_names;

  BatchMap transition;
  BatchMap measurement;
  // Optional analytic derivatives; finite differences are used when empty.
  DerivativeMap transition_derivatives;
  DerivativeMap measurement_derivatives;
  // Optional support test for theta (e.g. b > 0). Empty means all of R^q.
  std::function<bool(const Eigen::Ref<const Vector>& theta)> param_support;

  NoiseSequence process_noise;
  NoiseSequence measurement_noise;
  Gaussian prior;
  InputSignal input;

  Index extended_dim() const { return state_dim + param_dim; }
  bool has_analytic_derivatives() const {
    return static_cast<bool>(transition_derivatives) && static_cast<bool>(measurement_derivatives);
  }
  bool in_support(const Eigen::Ref<const Vector>& theta) const {
    return !param_support || param_support(theta);
  }

  // Throws ConfigError on inconsistent dimensions or missing maps.
  void validate() const;
};

// M simulated trajectories over horizon T.
struct TrajectoryEnsemble {
  Index count = 0;
  Index horizon = 0;
  std::uint64_t master_seed = 0;
  // states[j] is n x (T+1); column t holds x_t.
  std::vector<Matrix> states;
  // q x M; column j holds the (constant) parameters of trajectory j.
  Matrix params;
  // measurements[j] is m x T; column t-1 holds y_t.
  std::vector<Matrix> measurements;
  // n x T; column t holds u_t (drives x_t -> x_{t+1}).
  Matrix inputs;

  // Substream index used for trajectory j.
  std::uint64_t trajectory_stream(Index j) const { return static_cast<std::uint64_t>(j); }
};

std::vector<ExtendedState> sample_prior(const SsmModel& model, Index count, Engine& engine);

// f_t(x, theta) + u + v. Throws ModelEvaluationError on non-finite output.
Vector step_state(const SsmModel& model, const ExtendedState& z, const Vector& u, const Vector& v, Index t);

// g_t(x, theta) + w.
Vector step_measurement(const SsmModel& model, const ExtendedState& z, const Vector& w, Index t);

// log N(x_next; f_t(x, theta) + u, Q_t).
double log_transition_density(const SsmModel& model, const Vector& x_next, const ExtendedState& z,
                              const Vector& u, Index t);

// log N(y; g_t(x, theta), R_t).
double log_measurement_density(const SsmModel& model, const Vector& y, const ExtendedState& z, Index t);

// Trajectory j draws from substream (seed, simulation, j); the result is
// bit-identical for any worker count.
TrajectoryEnsemble simulate_ensemble(const SsmModel& model, Index count, Index horizon, std::uint64_t seed,
                                     unsigned workers = 0);

}  // namespace pcrlb
