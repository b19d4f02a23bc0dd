#pragma once

#include "pcrlb/linalg.hpp"
#include "pcrlb/model.hpp"

#include <cstdint>
#include <vector>

namespace pcrlb {

// Block posterior information matrix J_t^z = [[Jx, Jxtheta], [Jxtheta^T, Jtheta]].
struct PimState {
  Matrix jx;
  Matrix jxtheta;
  Matrix jtheta;
  Index t = 0;

  Matrix assembled() const;
};

// Expected negative Hessian blocks of log p(x_{t+1} | z_t) + log p(y_{t+1} | theta, x_{t+1})
// with respect to (x_t, theta, x_{t+1}).
struct HBlocks {
  Matrix h11, h12, h13, h22, h23, h33;
  Index t = 0;
  Index mc_count = 0;
};

// Per-step parameter bounds L_t^theta for t = 0..T.
struct BoundSeries {
  std::vector<Matrix> bounds;
  std::vector<double> cond_jx;
  std::vector<int> regularization_events;

  Index size() const { return static_cast<Index>(bounds.size()); }
  Vector diagonal(Index t) const { return bounds.at(static_cast<std::size_t>(t)).diagonal(); }
};

enum class HessianMethod {
  automatic,          // analytic when the model supplies derivatives
  finite_difference,  // always central differences
};

struct PcrlbOptions {
  HessianMethod method = HessianMethod::automatic;
  unsigned workers = 0;
};

struct PcrlbRun {
  BoundSeries bound;
  std::vector<PimState> pim;
};

// J_0 = z_c^{-1}, partitioned.
PimState initial_pim(const Gaussian& prior, Index state_dim);

// Negative Hessian of log p_t at one sample, ordered (x_t, theta, x_{t+1}).
Matrix log_pt_negative_hessian(const SsmModel& model, const Vector& x, const Vector& theta, const Vector& x_next,
                               const Vector& y_next, const Vector& u, Index t, HessianMethod method);

// Monte-Carlo average over the ensemble at step t -> t+1. Per-trajectory
// Hessians are combined by a fixed-topology pairwise reduction.
HBlocks estimate_h_blocks(const SsmModel& model, const TrajectoryEnsemble& ensemble, Index t,
                          const PcrlbOptions& options = {});

PimState pim_step(const PimState& j, const HBlocks& h, RegularizationLog* log = nullptr);

// L^theta = [Jtheta - Jxtheta^T Jx^{-1} Jxtheta]^{-1}.
Matrix extract_param_bound(const PimState& j, RegularizationLog* log = nullptr);

PcrlbRun run_pcrlb(const SsmModel& model, const TrajectoryEnsemble& ensemble, const PcrlbOptions& options = {});
PcrlbRun run_pcrlb(const SsmModel& model, Index count, Index horizon, std::uint64_t seed,
                   const PcrlbOptions& options = {});

}  // namespace pcrlb
