#include "doctest.h"

#include "pcrlb/errors.hpp"
#include "pcrlb/registry.hpp"
#include "pcrlb/smc.hpp"

#include <cmath>
#include <limits>

using namespace pcrlb;

namespace {

ParticleCloud cloud_with_weights(const Vector& w) {
  ParticleCloud c;
  c.states = Matrix::Zero(1, w.size());
  c.params = Matrix(1, w.size());
  for (Index i = 0; i < w.size(); ++i) c.params(0, i) = static_cast<double>(i);
  c.log_weights = w.array().log().matrix();
  c.ess = effective_sample_size(w);
  return c;
}

std::vector<Index> offspring_of(const std::vector<double>& w, double u0) {
  Vector v(static_cast<Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) v(static_cast<Index>(i)) = w[i];
  return systematic_offspring(v, u0);
}

}  // namespace

TEST_CASE("init_cloud") {
  const SsmModel m = make_benchmark_model();
  Engine eng = substream(1, Stream::test);
  const ParticleCloud four = init_cloud(m.prior, 1, 4, eng);
  CHECK(four.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(four.weights()(i) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(four.ess == 4.0);

  const ParticleCloud one = init_cloud(m.prior, 1, 1, eng);
  CHECK(one.weights()(0) == 1.0);
  CHECK(posterior_mean(one) == one.params.col(0));

  const ParticleCloud many = init_cloud(m.prior, 1, 10000, eng);
  Vector expected(4);
  expected << 0.7, 0.6, 0.5, 0.4;
  CHECK((many.params.rowwise().mean() - expected).cwiseAbs().maxCoeff() < 0.01);
  CHECK_THROWS_AS(init_cloud(m.prior, 1, 0, eng), ConfigError);
}

TEST_CASE("systematic offspring") {
  for (double u0 : {0.0, 0.2, 0.5, 0.99}) {
    const auto counts = offspring_of({0.5, 0.25, 0.25}, u0);
    // N = 3 slots for three weights; the N = 4 case pads a zero weight.
    Index total = 0;
    for (Index c : counts) total += c;
    CHECK(total == 3);
    const auto four = offspring_of({0.5, 0.25, 0.25, 0.0}, u0);
    CHECK(four == std::vector<Index>{2, 1, 1, 0});
  }
  for (double u0 : {0.0, 0.3, 0.999}) {
    CHECK(offspring_of({0.25, 0.25, 0.25, 0.25}, u0) == std::vector<Index>{1, 1, 1, 1});
    CHECK(offspring_of({0.0, 1.0, 0.0}, u0) == std::vector<Index>{0, 3, 0});
  }
}

TEST_CASE("resampling keeps the count and resets weights") {
  Vector w(5);
  w << 0.1, 0.4, 0.2, 0.05, 0.25;
  Engine eng = substream(2, Stream::test);
  const ParticleCloud r = resample_systematic(cloud_with_weights(w), eng);
  CHECK(r.size() == 5);
  CHECK(r.params.cols() == 5);
  CHECK(r.resampled);
  for (Index i = 0; i < 5; ++i) CHECK(r.weights()(i) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("resampling is unbiased for the posterior mean") {
  Vector w(6);
  w << 0.05, 0.3, 0.1, 0.25, 0.2, 0.1;
  const ParticleCloud c = cloud_with_weights(w);
  const double direct = posterior_mean(c)(0);
  Engine eng = substream(3, Stream::test);
  double sum = 0, sum_sq = 0;
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) {
    const double v = posterior_mean(resample_systematic(c, eng))(0);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / (draws - 1));
  CHECK(std::abs(mean - direct) < 3 * se + 1e-12);
}

TEST_CASE("weighted posterior mean") {
  ParticleCloud c;
  c.states = Matrix::Zero(1, 2);
  c.params = Matrix(1, 2);
  c.params << 0, 1;
  c.log_weights = Vector(2);
  c.log_weights << std::log(0.3), std::log(0.7);
  CHECK(posterior_mean(c)(0) == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("flat likelihood leaves the weights unchanged") {
  SsmModel m = make_benchmark_model();
  m.measurement_noise = NoiseSequence::constant(Matrix::Constant(1, 1, 1e30));
  Engine eng = substream(4, Stream::test);
  ParticleCloud c = init_cloud(m.prior, 1, 50, eng);
  Vector w = Vector::LinSpaced(50, 1.0, 2.0);
  w /= w.sum();
  c.log_weights = w.array().log().matrix();
  const ParticleCloud next = propagate_and_weight(c, Vector::Constant(1, 0.3), Vector::Zero(1), m,
                                                  AdaSchedule::none(), 1, eng);
  CHECK((next.weights() - w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frozen parameters never move") {
  const SsmModel m = make_benchmark_model();
  Engine eng = substream(5, Stream::test);
  const TrajectoryEnsemble e = simulate_ensemble(m, 1, 30, 5, 1);
  ParticleCloud c = init_cloud(m.prior, 1, 200, eng);
  for (const AdaSchedule& s : {AdaSchedule::none(), AdaSchedule::shrinkage(1.0),
                               AdaSchedule::constant_decay(Matrix::Zero(4, 4))}) {
    ParticleCloud run = c;
    for (Index t = 1; t <= 30; ++t) {
      run = ada_step(run, e.measurements[0].col(t - 1), e.inputs.col(t - 1), m, s, t, eng);
      // Every parameter column is one of the initial columns.
      for (Index i = 0; i < run.size(); ++i) {
        bool found = false;
        for (Index k = 0; k < c.size() && !found; ++k) found = run.params.col(i) == c.params.col(k);
        CHECK(found);
      }
    }
  }
}

TEST_CASE("weights stay normalized and ESS stays in range") {
  const SsmModel m = make_benchmark_model();
  const TrajectoryEnsemble e = simulate_ensemble(m, 1, 100, 6, 1);
  Engine eng = substream(6, Stream::test);
  ParticleCloud c = init_cloud(m.prior, 1, 500, eng);
  for (Index t = 1; t <= 100; ++t) {
    c = ada_step(c, e.measurements[0].col(t - 1), e.inputs.col(t - 1), m, AdaSchedule::shrinkage(), t, eng);
    const Vector w = c.weights();
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(c.ess >= 1.0 - 1e-9);
    CHECK(c.ess <= 500.0 + 1e-9);
    CHECK(c.size() == 500);
    CHECK((c.params.row(1).array() > 0.0).all());
  }
}

TEST_CASE("state mean tracks the Kalman filter") {
  const double a = 0.8, cc = 1.0, q = 0.1, r = 0.1;
  const SsmModel m = make_linear_gaussian_1d();
  const TrajectoryEnsemble e = simulate_ensemble(m, 1, 60, 7, 1);
  const Index n = 10000;
  Engine eng = substream(7, Stream::test);
  ParticleCloud c = init_cloud(m.prior, 1, n, eng);
  double mean = 0.0, var = 1.0;
  for (Index t = 1; t <= 60; ++t) {
    c = propagate_and_weight(c, e.measurements[0].col(t - 1), e.inputs.col(t - 1), m, AdaSchedule::none(), t, eng);
    const double pm = a * mean + e.inputs(0, t - 1);
    const double pv = a * a * var + q;
    const double gain = pv * cc / (cc * cc * pv + r);
    mean = pm + gain * (e.measurements[0](0, t - 1) - cc * pm);
    var = (1 - gain * cc) * pv;
    const double tol = 3.0 * std::sqrt(var) / std::sqrt(static_cast<double>(n) / 100.0);
    CHECK(std::abs(posterior_state_mean(c)(0) - mean) < tol);
    if (c.ess < 0.5 * static_cast<double>(n)) c = resample_systematic(c, eng);
  }
}

TEST_CASE("conjugate model estimates improve over time") {
  const SsmModel m = make_conjugate_mean_model({{"R", 0.1}});
  const TrajectoryEnsemble e = simulate_ensemble(m, 40, 100, 8, 1);
  double mse10 = 0, mse50 = 0, mse100 = 0;
  for (Index j = 0; j < 40; ++j) {
    Engine eng = substream(8, Stream::identify, static_cast<std::uint64_t>(j));
    const IdentifyResult r = identify(m, e.measurements[static_cast<std::size_t>(j)], e.inputs, 500,
                                      AdaSchedule::shrinkage(), eng);
    auto sq = [&](Index t) { return std::pow(r.estimates(0, t - 1) - e.params(0, j), 2); };
    mse10 += sq(10) / 40;
    mse50 += sq(50) / 40;
    mse100 += sq(100) / 40;
  }
  CHECK(mse50 < mse10);
  CHECK(mse100 < mse50);
}

TEST_CASE("identify edge cases and determinism") {
  const SsmModel m = make_benchmark_model();
  Engine eng = substream(9, Stream::test);
  const IdentifyResult empty = identify(m, Matrix(1, 0), Matrix(1, 0), 100, AdaSchedule::shrinkage(), eng);
  CHECK(empty.estimates.cols() == 0);
  CHECK(empty.ess.empty());

  const TrajectoryEnsemble e = simulate_ensemble(m, 1, 40, 9, 1);
  Engine e1 = substream(9, Stream::identify), e2 = substream(9, Stream::identify);
  const IdentifyResult a = identify(m, e.measurements[0], e.inputs, 300, AdaSchedule::shrinkage(), e1);
  const IdentifyResult b = identify(m, e.measurements[0], e.inputs, 300, AdaSchedule::shrinkage(), e2);
  CHECK(a.estimates == b.estimates);
  CHECK(a.ess == b.ess);
  CHECK(a.resampled == b.resampled);
  CHECK_THROWS_AS(identify(m, e.measurements[0], e.inputs, 300, AdaSchedule::shrinkage(0.5), e1), ConfigError);
}

TEST_CASE("degenerate weights are reported with the time index") {
  SsmModel m = make_benchmark_model();
  m.measurement_noise = NoiseSequence::constant(Matrix::Constant(1, 1, 1e-300));
  Engine eng = substream(10, Stream::test);
  Matrix ys = Matrix::Constant(1, 5, 1e6);
  try {
    identify(m, ys, Matrix::Zero(1, 5), 50, AdaSchedule::shrinkage(), eng);
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& err) {
    CHECK(err.time_index() == 1);
  }
}

TEST_CASE("constant-decay jitter covariance") {
  const AdaSchedule s = AdaSchedule::constant_decay(1e-2 * Matrix::Identity(2, 2), 0.97);
  CHECK(s.jitter_cov(0)(0, 0) == doctest::Approx(1e-2));
  CHECK(s.jitter_cov(10)(1, 1) == doctest::Approx(1e-2 * std::pow(0.97, 10)));
  CHECK(s.jitter_cov(10)(0, 1) == 0.0);
  CHECK_THROWS_AS(AdaSchedule::constant_decay(Matrix::Identity(3, 3)).validate(2), ConfigError);
  CHECK_THROWS_AS(AdaSchedule::constant_decay(-Matrix::Identity(2, 2)).validate(2), ConfigError);
}

TEST_CASE("benchmark d is identified within epsilon in most runs") {
  const SsmModel m = make_benchmark_model();
  const TrajectoryEnsemble e = simulate_ensemble(m, 100, 300, 42, 0);
  int inside = 0;
  for (Index j = 0; j < 100; ++j) {
    Engine eng = substream(42, Stream::identify, static_cast<std::uint64_t>(j));
    const IdentifyResult r = identify(m, e.measurements[static_cast<std::size_t>(j)], e.inputs, 2000,
                                      AdaSchedule::shrinkage(), eng);
    inside += std::abs(r.estimates(3, 299) - e.params(3, j)) <= 0.01;
  }
  MESSAGE("runs with |d_hat - d| <= 0.01: " << inside << " / 100");
  CHECK(inside >= 70);
}
