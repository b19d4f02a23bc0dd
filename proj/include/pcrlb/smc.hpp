#pragma once

#include "pcrlb/linalg.hpp"
#include "pcrlb/model.hpp"
#include "pcrlb/random.hpp"

#include <string>
#include <vector>

namespace pcrlb {

// Artificial dynamics for the static parameters.
//
// constant_decay: theta_{t+1} = theta_t + N(0, decay^t * initial_cov).
// shrinkage:      theta_{t+1} = discount * theta_t + (1 - discount) * mean
//                               + N(0, (1 - discount^2) * V_t),
//                 where mean and V_t are the weighted particle mean and
//                 covariance. The kernel keeps the first two moments.
struct AdaSchedule {
  enum class Mode { constant_decay, shrinkage };

  Mode mode = Mode::shrinkage;
  Matrix initial_cov;
  double decay = 0.97;
  double discount = 0.98;

  static AdaSchedule shrinkage(double discount = 0.98);
  static AdaSchedule constant_decay(Matrix initial_cov, double decay = 0.97);
  // Frozen parameters: no jitter at all.
  static AdaSchedule none();

  Matrix jitter_cov(Index t) const;
  void validate(Index param_dim) const;
  std::string describe() const;
};

// N weighted extended-state particles; column i of `states`/`params` is
// particle i.
struct ParticleCloud {
  Matrix states;
  Matrix params;
  Vector log_weights;
  Index t = 0;
  double ess = 0.0;
  bool resampled = false;

  Index size() const { return log_weights.size(); }
  // Normalized weights (sum to one).
  Vector weights() const;
  ExtendedState particle(Index i) const;
};

ParticleCloud init_cloud(const Gaussian& prior, Index state_dim, Index count, Engine& engine);

// Steps (i)-(iii) of ada_step without the resampling decision.
ParticleCloud propagate_and_weight(ParticleCloud cloud, const Vector& y, const Vector& u, const SsmModel& model,
                                   const AdaSchedule& schedule, Index t, Engine& engine);

// One filtering step to time t with measurement y_t: jitter parameters,
// propagate states with u_{t-1}, reweight by the measurement likelihood,
// and resample systematically when ESS < N/2.
ParticleCloud ada_step(ParticleCloud cloud, const Vector& y, const Vector& u, const SsmModel& model,
                       const AdaSchedule& schedule, Index t, Engine& engine);

// Offspring counts from systematic resampling with start offset u0 in [0, 1).
std::vector<Index> systematic_offspring(const Vector& weights, double u0);

ParticleCloud resample_systematic(ParticleCloud cloud, Engine& engine);

Vector posterior_mean(const ParticleCloud& cloud);
Vector posterior_state_mean(const ParticleCloud& cloud);
// Weighted parameter covariance.
Matrix posterior_param_cov(const ParticleCloud& cloud);

double effective_sample_size(const Vector& weights);

struct IdentifyResult {
  // Column t-1 holds theta_{t|t}, t = 1..T.
  Matrix estimates;
  std::vector<double> ess;
  std::vector<bool> resampled;
};

// Runs the filter over y_{1:T}. `measurements` is m x T (column t-1 = y_t);
// `inputs` is n x T (column t = u_t).
IdentifyResult identify(const SsmModel& model, const Matrix& measurements, const Matrix& inputs, Index particles,
                        const AdaSchedule& schedule, Engine& engine);

}  // namespace pcrlb
