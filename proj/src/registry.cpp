#include "pcrlb/registry.hpp"

#include "pcrlb/errors.hpp"

#include <set>

namespace pcrlb {

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Coefficients merge(Coefficients defaults, const Coefficients& overrides, const std::string& model) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) throw ConfigError("model " + model + " has no coefficient '" + key + "'");
    it->second = value;
  }
  return defaults;
}

}  // namespace

SsmModel make_benchmark_model() {
  SsmModel model;
  model.name = "benchmark-eq13";
  model.state_dim = 1;
  model.param_dim = 4;
  model.meas_dim = 1;
  model.param_names = {"a", "b", "c", "d"};

  model.transition = [](const Matrix& x, const Matrix& theta, Index) -> Matrix {
    const auto xs = x.row(0).array();
    const auto a = theta.row(0).array();
    const auto b = theta.row(1).array();
    return (a * xs + xs / (b + xs.square())).matrix();
  };
  model.measurement = [](const Matrix& x, const Matrix& theta, Index) -> Matrix {
    const auto xs = x.row(0).array();
    const auto c = theta.row(2).array();
    const auto d = theta.row(3).array();
    return (c * xs + d * xs.square()).matrix();
  };

  // Variables ordered (x, a, b, c, d).
  model.transition_derivatives = [](const Vector& x, const Vector& theta, Index) {
    const double xv = x(0), a = theta(0), b = theta(1);
    const double den = b + xv * xv;
    const double den2 = den * den;
    const double den3 = den2 * den;
    MapDerivatives d;
    d.jacobian = Matrix::Zero(1, 5);
    d.jacobian(0, 0) = a + (b - xv * xv) / den2;
    d.jacobian(0, 1) = xv;
    d.jacobian(0, 2) = -xv / den2;
    Matrix h = Matrix::Zero(5, 5);
    h(0, 0) = 2.0 * xv * (xv * xv - 3.0 * b) / den3;
    h(0, 1) = h(1, 0) = 1.0;
    h(0, 2) = h(2, 0) = (3.0 * xv * xv - b) / den3;
    h(2, 2) = 2.0 * xv / den3;
    d.hessians = {h};
    return d;
  };
  model.measurement_derivatives = [](const Vector& x, const Vector& theta, Index) {
    const double xv = x(0), c = theta(2), dd = theta(3);
    MapDerivatives d;
    d.jacobian = Matrix::Zero(1, 5);
    d.jacobian(0, 0) = c + 2.0 * dd * xv;
    d.jacobian(0, 3) = xv;
    d.jacobian(0, 4) = xv * xv;
    Matrix h = Matrix::Zero(5, 5);
    h(0, 0) = 2.0 * dd;
    h(0, 3) = h(3, 0) = 1.0;
    h(0, 4) = h(4, 0) = 2.0 * xv;
    d.hessians = {h};
    return d;
  };
  model.param_support = [](const Eigen::Ref<const Vector>& theta) { return theta(1) > 0.0; };

  model.process_noise = NoiseSequence::constant(scalar(1e-3));
  model.measurement_noise = NoiseSequence::constant(scalar(1e-3));
  Vector zm(5);
  zm << 1.0, 0.7, 0.6, 0.5, 0.4;
  model.prior = Gaussian(zm, 0.01 * Matrix::Identity(5, 5));
  model.input = InputSignal::prbs(1, 0.5, 5, 1);
  return model;
}

SsmModel make_linear_gaussian_1d(const Coefficients& overrides) {
  const Coefficients c = merge({{"a", 0.8}, {"c", 1.0}, {"Q", 0.1}, {"R", 0.1}, {"m0", 0.0}, {"P0", 1.0}},
                               overrides, "linear-gaussian-1d");
  const double a = c.at("a");
  const double cc = c.at("c");

  SsmModel model;
  model.name = "linear-gaussian-1d";
  model.state_dim = 1;
  model.param_dim = 0;
  model.meas_dim = 1;
  model.transition = [a](const Matrix& x, const Matrix&, Index) -> Matrix { return a * x; };
  model.measurement = [cc](const Matrix& x, const Matrix&, Index) -> Matrix { return cc * x; };
  model.transition_derivatives = [a](const Vector&, const Vector&, Index) {
    return MapDerivatives{scalar(a), {scalar(0.0)}};
  };
  model.measurement_derivatives = [cc](const Vector&, const Vector&, Index) {
    return MapDerivatives{scalar(cc), {scalar(0.0)}};
  };
  model.process_noise = NoiseSequence::constant(scalar(c.at("Q")));
  model.measurement_noise = NoiseSequence::constant(scalar(c.at("R")));
  model.prior = Gaussian(Vector::Constant(1, c.at("m0")), scalar(c.at("P0")));
  model.input = InputSignal::zero(1);
  return model;
}

SsmModel make_conjugate_mean_model(const Coefficients& overrides) {
  const Coefficients c =
      merge({{"R", 1.0}, {"theta_mean", 0.0}, {"theta_var", 1.0}, {"Q", 1.0}}, overrides, "conjugate-mean-1d");

  SsmModel model;
  model.name = "conjugate-mean-1d";
  model.state_dim = 1;
  model.param_dim = 1;
  model.meas_dim = 1;
  model.param_names = {"theta"};
  model.transition = [](const Matrix& x, const Matrix&, Index) -> Matrix { return Matrix::Zero(1, x.cols()); };
  model.measurement = [](const Matrix&, const Matrix& theta, Index) -> Matrix { return theta; };
  model.transition_derivatives = [](const Vector&, const Vector&, Index) {
    return MapDerivatives{Matrix::Zero(1, 2), {Matrix::Zero(2, 2)}};
  };
  model.measurement_derivatives = [](const Vector&, const Vector&, Index) {
    Matrix j(1, 2);
    j << 0.0, 1.0;
    return MapDerivatives{j, {Matrix::Zero(2, 2)}};
  };
  model.process_noise = NoiseSequence::constant(scalar(c.at("Q")));
  model.measurement_noise = NoiseSequence::constant(scalar(c.at("R")));
  Vector zm(2);
  zm << 0.0, c.at("theta_mean");
  Matrix zc = Matrix::Zero(2, 2);
  zc(0, 0) = c.at("Q");
  zc(1, 1) = c.at("theta_var");
  model.prior = Gaussian(zm, zc);
  model.input = InputSignal::zero(1);
  return model;
}

std::vector<std::string> model_names() { return {"benchmark-eq13", "conjugate-mean-1d", "linear-gaussian-1d"}; }

std::string model_summary(const std::string& name) {
  if (name == "benchmark-eq13")
    return "x' = a x + x/(b + x^2) + u + v; y = c x + d x^2 + w; theta = [a b c d]";
  if (name == "linear-gaussian-1d") return "x' = a x + u + v; y = c x + w; known coefficients";
  if (name == "conjugate-mean-1d") return "y = theta + w; white-noise state";
  throw ConfigError("unknown model '" + name + "'");
}

SsmModel make_model(const std::string& name, const Coefficients& overrides) {
  if (name.empty()) throw ConfigError("model: name is missing");
  if (name == "benchmark-eq13") {
    if (!overrides.empty()) throw ConfigError("model benchmark-eq13 takes no coefficients");
    return make_benchmark_model();
  }
  if (name == "linear-gaussian-1d") return make_linear_gaussian_1d(overrides);
  if (name == "conjugate-mean-1d") return make_conjugate_mean_model(overrides);
  throw ConfigError("model: unknown model '" + name + "'");
}

}  // namespace pcrlb
