#include "pcrlb/config.hpp"

#include "pcrlb/csv.hpp"
#include "pcrlb/errors.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace pcrlb {

using nlohmann::json;

namespace {

Index positive_count(const json& doc, const char* key, Index fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError(std::string(key) + " must be a positive integer");
  return static_cast<Index>(v.get<long long>());
}

double number_field(const json& doc, const std::string& key) {
  if (!doc.is_number()) throw ConfigError(key + " must be a number");
  return doc.get<double>();
}

std::vector<double> tolerance_field(const json& doc, const std::string& key) {
  std::vector<double> out;
  if (doc.is_number()) {
    out.push_back(doc.get<double>());
  } else if (doc.is_array() && !doc.empty()) {
    for (const auto& v : doc) out.push_back(number_field(v, key));
  } else {
    throw ConfigError(key + " must be a number or a non-empty array");
  }
  for (double v : out)
    if (!(v > 0.0)) throw ConfigError(key + " entries must be positive");
  return out;
}

Vector vector_field(const json& doc, const std::string& key) {
  if (!doc.is_array()) throw ConfigError(key + " must be an array");
  Vector v(static_cast<Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) v(static_cast<Index>(i)) = number_field(doc[i], key);
  return v;
}

Matrix matrix_field(const json& doc, const std::string& key) {
  if (doc.is_number()) return Matrix::Constant(1, 1, doc.get<double>());
  if (!doc.is_array() || doc.empty()) throw ConfigError(key + " must be a number or a matrix");
  const auto rows = static_cast<Index>(doc.size());
  Matrix m(rows, rows);
  for (Index r = 0; r < rows; ++r) {
    const json& row = doc[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != rows) throw ConfigError(key + " must be square");
    for (Index c = 0; c < rows; ++c) m(r, c) = number_field(row[static_cast<std::size_t>(c)], key);
  }
  return m;
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

Vector broadcast(const std::vector<double>& values, Index q, const char* key) {
  if (values.size() == 1) return Vector::Constant(q, values.front());
  if (static_cast<Index>(values.size()) != q)
    throw ConfigError(std::string(key) + " must have one entry or one per parameter");
  return Eigen::Map<const Vector>(values.data(), q);
}

InputSignal input_from(const json& doc, Index dim) {
  if (!doc.is_object() || !doc.contains("kind")) throw ConfigError("model.input.kind is missing");
  reject_unknown(doc, {"kind", "amplitude", "hold", "seed", "values"}, "model.input");
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "zero") return InputSignal::zero(dim);
  if (kind == "prbs") {
    const double amplitude = doc.contains("amplitude") ? number_field(doc.at("amplitude"), "model.input.amplitude") : 0.5;
    const Index hold = doc.contains("hold") ? doc.at("hold").get<Index>() : 5;
    const auto seed = doc.contains("seed") ? doc.at("seed").get<std::uint32_t>() : 1u;
    return InputSignal::prbs(dim, amplitude, hold, seed);
  }
  if (kind == "values") {
    if (!doc.contains("values")) throw ConfigError("model.input.values is missing");
    const Vector v = vector_field(doc.at("values"), "model.input.values");
    if (dim != 1) throw ConfigError("model.input.values supports scalar inputs only");
    return InputSignal::values(v.transpose());
  }
  throw ConfigError("model.input.kind must be zero, prbs or values");
}

}  // namespace

std::string RunConfig::model_name() const {
  if (model.is_string()) return model.get<std::string>();
  if (model.is_object() && model.contains("name") && model.at("name").is_string())
    return model.at("name").get<std::string>();
  return {};
}

SsmModel RunConfig::build_model() const {
  try {
    return build_model_impl();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

SsmModel RunConfig::build_model_impl() const {
  const std::string name = model_name();
  if (name.empty()) throw ConfigError("model: name is missing");

  Coefficients coefficients;
  const json overrides = model.is_object() ? model : json::object();
  reject_unknown(overrides,
                 {"name", "coefficients", "process_noise", "meas_noise", "prior_mean", "prior_cov", "prior_var", "input"},
                 "model");
  if (overrides.contains("coefficients")) {
    for (auto it = overrides.at("coefficients").begin(); it != overrides.at("coefficients").end(); ++it)
      coefficients[it.key()] = number_field(it.value(), "model.coefficients." + it.key());
  }
  SsmModel m = make_model(name, coefficients);

  if (overrides.contains("process_noise"))
    m.process_noise = NoiseSequence::constant(matrix_field(overrides.at("process_noise"), "model.process_noise"));
  if (overrides.contains("meas_noise"))
    m.measurement_noise = NoiseSequence::constant(matrix_field(overrides.at("meas_noise"), "model.meas_noise"));
  if (overrides.contains("prior_mean") || overrides.contains("prior_cov") || overrides.contains("prior_var")) {
    Vector mean = overrides.contains("prior_mean") ? vector_field(overrides.at("prior_mean"), "model.prior_mean")
                                                   : m.prior.mean();
    Matrix cov = m.prior.covariance();
    if (overrides.contains("prior_cov")) cov = matrix_field(overrides.at("prior_cov"), "model.prior_cov");
    if (overrides.contains("prior_var"))
      cov = vector_field(overrides.at("prior_var"), "model.prior_var").asDiagonal();
    try {
      m.prior = Gaussian(mean, cov);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("model.prior: ") + e.what());
    }
  }
  if (overrides.contains("input")) m.input = input_from(overrides.at("input"), m.state_dim);
  m.validate();
  return m;
}

void RunConfig::validate() const {
  if (model_name().empty()) throw ConfigError("model: name is missing");
  if (mc_runs < 1 || horizon < 1 || particles < 1 || reference_multiplier < 1 || reference_replicates < 1)
    throw ConfigError("counts (mc_runs, horizon, particles, reference) must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  const SsmModel m = build_model();
  schedule_for(m.param_dim).validate(m.param_dim);
  epsilon_for(m.param_dim);
  alpha_for(m.param_dim);
}

AdaSchedule RunConfig::schedule_for(Index q) const {
  AdaSchedule s = schedule;
  if (s.mode == AdaSchedule::Mode::constant_decay && s.initial_cov.size() == 1)
    s.initial_cov = s.initial_cov(0, 0) * Matrix::Identity(q, q);
  return s;
}

Vector RunConfig::epsilon_for(Index q) const { return broadcast(epsilon, q, "epsilon"); }
Vector RunConfig::alpha_for(Index q) const { return broadcast(alpha, q, "alpha"); }

json RunConfig::canonical() const {
  json doc;
  doc["model"] = model;
  doc["mc_runs"] = mc_runs;
  doc["horizon"] = horizon;
  doc["particles"] = particles;
  doc["reference"] = {{"multiplier", reference_multiplier}, {"replicates", reference_replicates}};
  if (schedule.mode == AdaSchedule::Mode::shrinkage) {
    doc["schedule"] = {{"mode", "shrinkage"}, {"discount", schedule.discount}};
  } else {
    const double var = schedule.initial_cov.size() ? schedule.initial_cov(0, 0) : 0.0;
    doc["schedule"] = {{"mode", "constant-decay"}, {"initial_var", var}, {"decay", schedule.decay}};
  }
  doc["epsilon"] = epsilon;
  doc["alpha"] = alpha;
  doc["rho"] = rho;
  doc["seed"] = seed;
  return doc;
}

std::string RunConfig::hash() const { return sha256_hex(canonical().dump()); }

namespace {

RunConfig parse_config_impl(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"model", "mc_runs", "horizon", "particles", "reference", "schedule", "epsilon", "alpha", "rho", "seed",
                  "output", "workers"},
                 "config");
  RunConfig cfg;
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    if (!m.is_string() && !m.is_object()) throw ConfigError("model must be a name or an object");
    cfg.model = m;
  }
  cfg.mc_runs = positive_count(doc, "mc_runs", cfg.mc_runs);
  cfg.horizon = positive_count(doc, "horizon", cfg.horizon);
  cfg.particles = positive_count(doc, "particles", cfg.particles);
  if (doc.contains("reference")) {
    const json& r = doc.at("reference");
    reject_unknown(r, {"multiplier", "replicates"}, "reference");
    cfg.reference_multiplier = positive_count(r, "multiplier", cfg.reference_multiplier);
    cfg.reference_replicates = positive_count(r, "replicates", cfg.reference_replicates);
  }
  if (doc.contains("schedule")) {
    const json& s = doc.at("schedule");
    reject_unknown(s, {"mode", "discount", "decay", "initial_var"}, "schedule");
    const std::string mode = s.value("mode", "shrinkage");
    if (mode == "shrinkage") {
      cfg.schedule = AdaSchedule::shrinkage(s.contains("discount") ? number_field(s.at("discount"), "schedule.discount") : 0.98);
    } else if (mode == "constant-decay") {
      const double var = s.contains("initial_var") ? number_field(s.at("initial_var"), "schedule.initial_var") : 1e-2;
      const double decay = s.contains("decay") ? number_field(s.at("decay"), "schedule.decay") : 0.97;
      // initial_cov is sized once the model is known; keep a 1x1 seed here.
      cfg.schedule = AdaSchedule::constant_decay(Matrix::Constant(1, 1, var), decay);
    } else {
      throw ConfigError("schedule.mode must be shrinkage or constant-decay");
    }
  }
  if (doc.contains("epsilon")) cfg.epsilon = tolerance_field(doc.at("epsilon"), "epsilon");
  if (doc.contains("alpha")) cfg.alpha = tolerance_field(doc.at("alpha"), "alpha");
  if (doc.contains("rho")) cfg.rho = number_field(doc.at("rho"), "rho");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
  if (doc.contains("workers")) cfg.workers = doc.at("workers").get<unsigned>();
  return cfg;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  try {
    return parse_config_impl(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

}  // namespace pcrlb
