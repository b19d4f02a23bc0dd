#include "pcrlb/pim.hpp"

#include "pcrlb/errors.hpp"
#include "pcrlb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcrlb {

namespace {

struct NoisePrecisions {
  Matrix process;
  Matrix measurement;
};

NoisePrecisions precisions_at(const SsmModel& model, Index t) {
  return {model.process_noise.at(t).precision(), model.measurement_noise.at(t + 1).precision()};
}

// Ordering of the stacked Hessian argument: [x_t (n), theta (q), x_{t+1} (n)].
Matrix analytic_negative_hessian(const SsmModel& model, const NoisePrecisions& prec, const Vector& x,
                                 const Vector& theta, const Vector& x_next, const Vector& y_next, const Vector& u,
                                 Index t) {
  const Index n = model.state_dim;
  const Index q = model.param_dim;
  const Index m = model.meas_dim;
  const Index s = 2 * n + q;

  Matrix w = Matrix::Zero(s, s);

  // Transition term, residual r = x_{t+1} - f(x_t, theta) - u.
  const MapDerivatives fd = model.transition_derivatives(x, theta, t);
  const Vector f = model.transition(Matrix(x), Matrix(theta), t).col(0);
  const Vector rf = x_next - f - u;
  Matrix jr = Matrix::Zero(n, s);
  jr.leftCols(n + q) = -fd.jacobian;
  jr.rightCols(n) = Matrix::Identity(n, n);
  w += jr.transpose() * prec.process * jr;
  const Vector af = prec.process * rf;
  for (Index k = 0; k < n; ++k) w.topLeftCorner(n + q, n + q) -= af(k) * fd.hessians[static_cast<std::size_t>(k)];

  // Measurement term, residual r = y_{t+1} - g(x_{t+1}, theta). The map's
  // argument order (x, theta) is scattered into (x_{t+1}, theta) slots.
  const MapDerivatives gd = model.measurement_derivatives(x_next, theta, t + 1);
  const Vector g = model.measurement(Matrix(x_next), Matrix(theta), t + 1).col(0);
  const Vector rg = y_next - g;
  std::vector<Index> slot(static_cast<std::size_t>(n + q));
  for (Index i = 0; i < n; ++i) slot[static_cast<std::size_t>(i)] = n + q + i;
  for (Index i = 0; i < q; ++i) slot[static_cast<std::size_t>(n + i)] = n + i;
  Matrix jg = Matrix::Zero(m, s);
  for (Index c = 0; c < n + q; ++c) jg.col(slot[static_cast<std::size_t>(c)]) = -gd.jacobian.col(c);
  w += jg.transpose() * prec.measurement * jg;
  const Vector ag = prec.measurement * rg;
  for (Index k = 0; k < m; ++k) {
    const Matrix& hk = gd.hessians[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n + q; ++i)
      for (Index j = 0; j < n + q; ++j)
        w(slot[static_cast<std::size_t>(i)], slot[static_cast<std::size_t>(j)]) -= ag(k) * hk(i, j);
  }
  return symmetrize(w);
}

double fd_step(double v) { return std::max(std::abs(v), 1.0) * std::cbrt(std::numeric_limits<double>::epsilon()); }

Matrix finite_difference_negative_hessian(const SsmModel& model, const Vector& x, const Vector& theta,
                                          const Vector& x_next, const Vector& y_next, const Vector& u, Index t) {
  const Index n = model.state_dim;
  const Index q = model.param_dim;
  const Index s = 2 * n + q;

  auto log_pt = [&](const Vector& w) {
    const ExtendedState z{w.head(n), w.segment(n, q)};
    const ExtendedState z_next{w.tail(n), w.segment(n, q)};
    return log_transition_density(model, w.tail(n), z, u, t) + log_measurement_density(model, y_next, z_next, t + 1);
  };

  Vector base(s);
  base << x, theta, x_next;
  Vector steps(s);
  for (Index i = 0; i < s; ++i) steps(i) = fd_step(base(i));

  auto gradient = [&](const Vector& w) {
    Vector grad(s);
    for (Index i = 0; i < s; ++i) {
      Vector plus = w, minus = w;
      plus(i) += steps(i);
      minus(i) -= steps(i);
      grad(i) = (log_pt(plus) - log_pt(minus)) / (2.0 * steps(i));
    }
    return grad;
  };

  Matrix hess(s, s);
  for (Index j = 0; j < s; ++j) {
    Vector plus = base, minus = base;
    plus(j) += steps(j);
    minus(j) -= steps(j);
    hess.col(j) = (gradient(plus) - gradient(minus)) / (2.0 * steps(j));
  }
  return symmetrize(-hess);
}

Matrix negative_hessian(const SsmModel& model, const NoisePrecisions& prec, const Vector& x, const Vector& theta,
                        const Vector& x_next, const Vector& y_next, const Vector& u, Index t, HessianMethod method) {
  if (method == HessianMethod::automatic && model.has_analytic_derivatives())
    return analytic_negative_hessian(model, prec, x, theta, x_next, y_next, u, t);
  return finite_difference_negative_hessian(model, x, theta, x_next, y_next, u, t);
}

const char* block_name(Index row, Index col, Index n, Index q) {
  auto part = [&](Index i) { return i < n ? 0 : (i < n + q ? 1 : 2); };
  static const char* names[3][3] = {{"H11", "H12", "H13"}, {"H12", "H22", "H23"}, {"H13", "H23", "H33"}};
  return names[part(row)][part(col)];
}

}  // namespace

Matrix PimState::assembled() const {
  const Index n = jx.rows();
  const Index q = jtheta.rows();
  Matrix j(n + q, n + q);
  j.topLeftCorner(n, n) = jx;
  j.topRightCorner(n, q) = jxtheta;
  j.bottomLeftCorner(q, n) = jxtheta.transpose();
  j.bottomRightCorner(q, q) = jtheta;
  return j;
}

PimState initial_pim(const Gaussian& prior, Index state_dim) {
  if (state_dim < 1 || state_dim > prior.dim()) throw ConfigError("initial_pim: state_dim out of range");
  const Matrix info = prior.precision();
  const Index n = state_dim;
  const Index q = prior.dim() - n;
  PimState j;
  j.jx = info.topLeftCorner(n, n);
  j.jxtheta = info.topRightCorner(n, q);
  j.jtheta = info.bottomRightCorner(q, q);
  j.t = 0;
  return j;
}

Matrix log_pt_negative_hessian(const SsmModel& model, const Vector& x, const Vector& theta, const Vector& x_next,
                               const Vector& y_next, const Vector& u, Index t, HessianMethod method) {
  return negative_hessian(model, precisions_at(model, t), x, theta, x_next, y_next, u, t, method);
}

HBlocks estimate_h_blocks(const SsmModel& model, const TrajectoryEnsemble& ensemble, Index t,
                          const PcrlbOptions& options) {
  if (t < 0 || t >= ensemble.horizon) throw ConfigError("estimate_h_blocks: ensemble does not cover t and t+1");
  const Index n = model.state_dim;
  const Index q = model.param_dim;
  const Index s = 2 * n + q;
  const NoisePrecisions prec = precisions_at(model, t);

  std::vector<Matrix> samples(static_cast<std::size_t>(ensemble.count));
  parallel_for(samples.size(), options.workers, [&](std::size_t j) {
    const Matrix& xs = ensemble.states[j];
    const Index jj = static_cast<Index>(j);
    Matrix w = negative_hessian(model, prec, xs.col(t), ensemble.params.col(jj), xs.col(t + 1),
                                ensemble.measurements[j].col(t), ensemble.inputs.col(t), t, options.method);
    if (!w.allFinite()) {
      for (Index r = 0; r < s; ++r)
        for (Index c = 0; c < s; ++c)
          if (!std::isfinite(w(r, c))) {
            std::ostringstream msg;
            msg << "non-finite Hessian in block " << block_name(r, c, n, q) << " for trajectory " << j
                << " at t=" << t;
            throw NumericalError(msg.str());
          }
    }
    samples[j] = std::move(w);
  });

  const Matrix total = tree_reduce(std::move(samples), [](const Matrix& a, const Matrix& b) -> Matrix { return a + b; });
  const Matrix avg = total / static_cast<double>(ensemble.count);

  HBlocks h;
  h.h11 = symmetrize(avg.block(0, 0, n, n));
  h.h12 = avg.block(0, n, n, q);
  h.h13 = avg.block(0, n + q, n, n);
  h.h22 = symmetrize(avg.block(n, n, q, q));
  h.h23 = avg.block(n, n + q, q, n);
  h.h33 = symmetrize(avg.block(n + q, n + q, n, n));
  h.t = t;
  h.mc_count = ensemble.count;
  return h;
}

PimState pim_step(const PimState& j, const HBlocks& h, RegularizationLog* log) {
  const RegularizedCholesky chol(j.jx + h.h11, "J_x + H11", log);
  const Matrix coupling = j.jxtheta + h.h12;
  const Matrix solved_h13 = chol.solve(h.h13);
  const Matrix solved_coupling = chol.solve(coupling);

  PimState next;
  next.jx = symmetrize(h.h33 - h.h13.transpose() * solved_h13);
  next.jxtheta = h.h23.transpose() - h.h13.transpose() * solved_coupling;
  next.jtheta = symmetrize(j.jtheta + h.h22 - coupling.transpose() * solved_coupling);
  next.t = j.t + 1;
  return next;
}

Matrix extract_param_bound(const PimState& j, RegularizationLog* log) {
  const Index q = j.jtheta.rows();
  if (q == 0) return Matrix(0, 0);
  const RegularizedCholesky jx(j.jx, "J_x", log);
  const Matrix schur = j.jtheta - j.jxtheta.transpose() * jx.solve(j.jxtheta);
  const RegularizedCholesky sc(schur, "parameter Schur complement", log);
  return symmetrize(sc.inverse());
}

PcrlbRun run_pcrlb(const SsmModel& model, const TrajectoryEnsemble& ensemble, const PcrlbOptions& options) {
  model.validate();
  PcrlbRun run;
  const auto horizon = static_cast<std::size_t>(ensemble.horizon);
  run.pim.reserve(horizon + 1);
  run.bound.bounds.reserve(horizon + 1);

  auto record = [&](const PimState& j) {
    RegularizationLog log;
    run.bound.bounds.push_back(extract_param_bound(j, &log));
    run.bound.cond_jx.push_back(condition_number(j.jx));
    run.bound.regularization_events.push_back(log.events);
    run.pim.push_back(j);
  };

  PimState j = initial_pim(model.prior, model.state_dim);
  record(j);
  for (Index t = 0; t < ensemble.horizon; ++t) {
    const HBlocks h = estimate_h_blocks(model, ensemble, t, options);
    RegularizationLog log;
    j = pim_step(j, h, &log);
    record(j);
    run.bound.regularization_events.back() += log.events;
  }
  return run;
}

PcrlbRun run_pcrlb(const SsmModel& model, Index count, Index horizon, std::uint64_t seed,
                   const PcrlbOptions& options) {
  const TrajectoryEnsemble ensemble = simulate_ensemble(model, count, horizon, seed, options.workers);
  return run_pcrlb(model, ensemble, options);
}

}  // namespace pcrlb
