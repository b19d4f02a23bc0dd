#include "pcrlb/pipeline.hpp"

#include "pcrlb/errors.hpp"
#include "pcrlb/parallel.hpp"
#include "pcrlb/registry.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>

namespace pcrlb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  for (Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

std::string run_file(Index run, const char* ext) {
  std::ostringstream name;
  name << "run_" << std::setw(4) << std::setfill('0') << run << ext;
  return name.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Manifest entries are keyed by stage; each lists the files it produced.
void update_manifest(const fs::path& dir, const RunConfig& cfg, const StageReport& report) {
  const fs::path path = dir / layout::manifest;
  json manifest = json::object();
  if (fs::exists(path)) {
    try {
      manifest = json::parse(read_text_file(path));
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  manifest["tool"] = "pcrlb";
  manifest["version"] = kVersion;
  manifest["config_hash"] = cfg.hash();
  manifest["config"] = cfg.canonical();
  manifest["seed"] = cfg.seed;
  json files = json::array();
  for (const fs::path& f : report.files) {
    const std::string bytes = read_text_file(f);
    files.push_back({{"path", fs::relative(f, dir).generic_string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  manifest["stages"][report.stage] = {{"wall_clock_seconds", report.seconds}, {"files", files}};
  write_text_file(path, manifest.dump(2) + "\n");
}

TrajectoryEnsemble load_ensemble(const fs::path& dir, const SsmModel& model) {
  const fs::path path = dir / layout::ensemble;
  if (!fs::exists(path)) throw IoError("missing " + path.string() + " (run the bound stage first)");
  return parse_ensemble(read_csv(path), model.state_dim, model.param_dim, model.meas_dim);
}

Matrix parse_series(const CsvTable& table, const std::string& prefix, Index rows, Index expected_cols,
                    const std::string& origin) {
  const std::size_t t_col = table.column("t");
  std::vector<std::size_t> cols;
  for (const auto& name : numbered(prefix, rows)) cols.push_back(table.column(name));
  if (static_cast<Index>(table.rows.size()) != expected_cols)
    throw IoError(origin + ": expected " + std::to_string(expected_cols) + " rows, found " +
                  std::to_string(table.rows.size()));
  Matrix out(rows, expected_cols);
  const double t0 = table.number(0, t_col);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.number(r, t_col) != t0 + static_cast<double>(r)) throw IoError(origin + ": time column is not contiguous");
    for (Index i = 0; i < rows; ++i) out(i, static_cast<Index>(r)) = table.number(r, cols[static_cast<std::size_t>(i)]);
  }
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

fs::path resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output.empty()) return cfg.output;
  const std::string leaf = cfg.model_name() + "-seed" + std::to_string(cfg.seed);
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') return fs::path(root) / leaf;
  return fs::path("pcrlb-runs") / leaf;
}

std::string ensemble_csv(const TrajectoryEnsemble& ens) {
  const Index n = ens.states.empty() ? 0 : ens.states.front().rows();
  const Index q = ens.params.rows();
  const Index m = ens.measurements.empty() ? 0 : ens.measurements.front().rows();
  std::vector<std::string> header{"trajectory", "t"};
  append(header, numbered("x_", n));
  append(header, numbered("theta_", q));
  append(header, numbered("u_", n));
  append(header, numbered("y_", m));
  CsvWriter csv(header);
  for (Index j = 0; j < ens.count; ++j) {
    const Matrix& xs = ens.states[static_cast<std::size_t>(j)];
    const Matrix& ys = ens.measurements[static_cast<std::size_t>(j)];
    for (Index t = 0; t <= ens.horizon; ++t) {
      csv.cell(static_cast<std::int64_t>(j)).cell(static_cast<std::int64_t>(t));
      for (Index i = 0; i < n; ++i) csv.cell(xs(i, t));
      for (Index i = 0; i < q; ++i) csv.cell(ens.params(i, j));
      for (Index i = 0; i < n; ++i) t < ens.horizon ? csv.cell(ens.inputs(i, t)) : csv.empty();
      for (Index i = 0; i < m; ++i) t > 0 ? csv.cell(ys(i, t - 1)) : csv.empty();
      csv.end_row();
    }
  }
  return csv.str();
}

TrajectoryEnsemble parse_ensemble(const CsvTable& table, Index n, Index q, Index m) {
  const std::size_t traj_col = table.column("trajectory");
  const std::size_t t_col = table.column("t");
  auto cols = [&](const std::string& prefix, Index count) {
    std::vector<std::size_t> out;
    for (const auto& name : numbered(prefix, count)) out.push_back(table.column(name));
    return out;
  };
  const auto x_cols = cols("x_", n), th_cols = cols("theta_", q), u_cols = cols("u_", n), y_cols = cols("y_", m);

  Index count = 0, horizon = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    count = std::max<Index>(count, static_cast<Index>(table.number(r, traj_col)) + 1);
    horizon = std::max<Index>(horizon, static_cast<Index>(table.number(r, t_col)));
  }
  if (count < 1 || horizon < 1) throw IoError("ensemble csv is empty");
  if (static_cast<Index>(table.rows.size()) != count * (horizon + 1))
    throw IoError("ensemble csv does not hold M x (T+1) rows");

  TrajectoryEnsemble ens;
  ens.count = count;
  ens.horizon = horizon;
  ens.states.assign(static_cast<std::size_t>(count), Matrix(n, horizon + 1));
  ens.measurements.assign(static_cast<std::size_t>(count), Matrix(m, horizon));
  ens.params.resize(q, count);
  ens.inputs.resize(n, horizon);
  std::vector<int> seen(static_cast<std::size_t>(count * (horizon + 1)), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto j = static_cast<Index>(table.number(r, traj_col));
    const auto t = static_cast<Index>(table.number(r, t_col));
    if (j < 0 || t < 0 || seen[static_cast<std::size_t>(j * (horizon + 1) + t)]++)
      throw IoError("ensemble csv has a duplicate or invalid (trajectory, t) row");
    for (Index i = 0; i < n; ++i) ens.states[static_cast<std::size_t>(j)](i, t) = table.number(r, x_cols[static_cast<std::size_t>(i)]);
    if (t == 0)
      for (Index i = 0; i < q; ++i) ens.params(i, j) = table.number(r, th_cols[static_cast<std::size_t>(i)]);
    if (t < horizon && j == 0)
      for (Index i = 0; i < n; ++i) ens.inputs(i, t) = table.number(r, u_cols[static_cast<std::size_t>(i)]);
    if (t > 0)
      for (Index i = 0; i < m; ++i)
        ens.measurements[static_cast<std::size_t>(j)](i, t - 1) = table.number(r, y_cols[static_cast<std::size_t>(i)]);
  }
  return ens;
}

std::string bound_csv(const BoundSeries& bound) {
  const Index q = bound.bounds.empty() ? 0 : bound.bounds.front().rows();
  std::vector<std::string> header{"t"};
  append(header, numbered("L_diag_", q));
  header.push_back("cond_Jx");
  header.push_back("regularization_events");
  CsvWriter csv(header);
  for (Index t = 0; t < bound.size(); ++t) {
    csv.cell(static_cast<std::int64_t>(t));
    const Vector d = bound.diagonal(t);
    for (Index i = 0; i < q; ++i) csv.cell(d(i));
    csv.cell(bound.cond_jx[static_cast<std::size_t>(t)]);
    csv.cell(static_cast<std::int64_t>(bound.regularization_events[static_cast<std::size_t>(t)]));
    csv.end_row();
  }
  return csv.str();
}

std::string bound_matrices_csv(const BoundSeries& bound) {
  const Index q = bound.bounds.empty() ? 0 : bound.bounds.front().rows();
  std::vector<std::string> header{"t"};
  for (Index i = 1; i <= q; ++i)
    for (Index j = 1; j <= q; ++j) header.push_back("L_" + std::to_string(i) + "_" + std::to_string(j));
  CsvWriter csv(header);
  for (Index t = 0; t < bound.size(); ++t) {
    csv.cell(static_cast<std::int64_t>(t));
    const Matrix& l = bound.bounds[static_cast<std::size_t>(t)];
    for (Index i = 0; i < q; ++i)
      for (Index j = 0; j < q; ++j) csv.cell(l(i, j));
    csv.end_row();
  }
  return csv.str();
}

BoundSeries parse_bound_matrices(const CsvTable& table, Index q) {
  const std::size_t t_col = table.column("t");
  std::vector<std::size_t> cols;
  for (Index i = 1; i <= q; ++i)
    for (Index j = 1; j <= q; ++j) cols.push_back(table.column("L_" + std::to_string(i) + "_" + std::to_string(j)));
  const std::size_t steps = table.rows.size();
  BoundSeries bound;
  bound.bounds.assign(steps, Matrix());
  bound.cond_jx.assign(steps, std::numeric_limits<double>::quiet_NaN());
  bound.regularization_events.assign(steps, 0);
  std::vector<char> seen(steps, 0);
  for (std::size_t r = 0; r < steps; ++r) {
    const double t = table.number(r, t_col);
    const auto k = static_cast<std::size_t>(t);
    if (!(t >= 0.0) || static_cast<double>(k) != t || k >= steps || seen[k]++)
      throw IoError("bound matrices: time column is not a permutation of 0..T");
    Matrix l(q, q);
    for (Index i = 0; i < q; ++i)
      for (Index j = 0; j < q; ++j) l(i, j) = table.number(r, cols[static_cast<std::size_t>(i * q + j)]);
    bound.bounds[k] = std::move(l);
  }
  return bound;
}

std::string estimates_csv(Index run, const IdentifyResult& result) {
  const Index q = result.estimates.rows();
  std::vector<std::string> header{"run_index", "t"};
  append(header, numbered("theta_hat_", q));
  header.push_back("ess");
  header.push_back("resampled_flag");
  CsvWriter csv(header);
  for (Index t = 1; t <= result.estimates.cols(); ++t) {
    csv.cell(static_cast<std::int64_t>(run)).cell(static_cast<std::int64_t>(t));
    for (Index i = 0; i < q; ++i) csv.cell(result.estimates(i, t - 1));
    csv.cell(result.ess[static_cast<std::size_t>(t - 1)]);
    csv.cell(static_cast<std::int64_t>(result.resampled[static_cast<std::size_t>(t - 1)] ? 1 : 0));
    csv.end_row();
  }
  return csv.str();
}

std::string reference_csv(Index run, const ReferenceMean& ref) {
  const Index q = ref.mean.rows();
  std::vector<std::string> header{"run_index", "t"};
  append(header, numbered("theta_ref_", q));
  append(header, numbered("std_err_", q));
  CsvWriter csv(header);
  for (Index t = 0; t < ref.mean.cols(); ++t) {
    csv.cell(static_cast<std::int64_t>(run)).cell(static_cast<std::int64_t>(t));
    for (Index i = 0; i < q; ++i) csv.cell(ref.mean(i, t));
    for (Index i = 0; i < q; ++i) csv.cell(ref.std_error(i, t));
    csv.end_row();
  }
  return csv.str();
}

StageReport cmd_bound(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const SsmModel model = cfg.build_model();
  const fs::path dir = resolve_output_dir(cfg);

  const TrajectoryEnsemble ensemble = simulate_ensemble(model, cfg.mc_runs, cfg.horizon, cfg.seed, cfg.workers);
  PcrlbOptions options;
  options.workers = cfg.workers;
  const PcrlbRun run = run_pcrlb(model, ensemble, options);

  StageReport report;
  report.stage = "bound";
  auto emit = [&](const char* name, const std::string& text) {
    write_text_file(dir / name, text);
    report.files.push_back(dir / name);
  };
  emit(layout::ensemble, ensemble_csv(ensemble));
  emit(layout::bound, bound_csv(run.bound));
  emit(layout::bound_matrices, bound_matrices_csv(run.bound));

  json summary;
  summary["model"] = model.name;
  summary["param_names"] = model.param_names;
  summary["mc_runs"] = cfg.mc_runs;
  summary["horizon"] = cfg.horizon;
  summary["input"] = model.input.description();
  summary["final_bound_diagonal"] = vector_json(run.bound.diagonal(run.bound.size() - 1));
  int events = 0;
  for (int e : run.bound.regularization_events) events += e;
  summary["regularization_events"] = events;
  emit(layout::bound_summary, summary.dump(2) + "\n");

  report.seconds = seconds_since(start);
  update_manifest(dir, cfg, report);
  return report;
}

StageReport cmd_identify(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const SsmModel model = cfg.build_model();
  const fs::path dir = resolve_output_dir(cfg);
  const TrajectoryEnsemble ensemble = load_ensemble(dir, model);
  const AdaSchedule schedule = cfg.schedule_for(model.param_dim);
  ReferenceOptions ref_options;
  ref_options.particles = cfg.particles * cfg.reference_multiplier;
  ref_options.replicates = cfg.reference_replicates;
  ref_options.schedule = schedule;

  const fs::path est_dir = dir / layout::estimates_dir;
  const fs::path ref_dir = dir / layout::reference_dir;
  const fs::path stage_manifest = dir / layout::identify_manifest;
  const std::string hash = cfg.hash();
  if (fs::exists(stage_manifest)) {
    std::string previous;
    try {
      previous = json::parse(read_text_file(stage_manifest)).value("config_hash", "");
    } catch (const json::exception&) {
    }
    if (previous != hash) {
      fs::remove_all(est_dir);
      fs::remove_all(ref_dir);
    }
  }
  fs::create_directories(est_dir);
  fs::create_directories(ref_dir);

  std::vector<char> processed(static_cast<std::size_t>(ensemble.count), 0);
  parallel_for(static_cast<std::size_t>(ensemble.count), cfg.workers, [&](std::size_t j) {
    const auto run = static_cast<Index>(j);
    const fs::path est = est_dir / run_file(run, ".csv");
    const fs::path ref = ref_dir / run_file(run, ".csv");
    const fs::path failed = est_dir / run_file(run, ".failed");
    if ((fs::exists(est) && fs::exists(ref)) || fs::exists(failed)) return;
    processed[j] = 1;
    const Matrix& ys = ensemble.measurements[j];
    try {
      Engine engine = substream(cfg.seed, Stream::identify, j);
      const IdentifyResult result = identify(model, ys, ensemble.inputs, cfg.particles, schedule, engine);
      const ReferenceMean reference = reference_posterior_mean(model, ys, ensemble.inputs, ref_options, cfg.seed, run);
      write_text_file(ref, reference_csv(run, reference));
      write_text_file(est, estimates_csv(run, result));
    } catch (const DegeneracyError& e) {
      write_text_file(failed, std::string(e.what()) + "\n");
    }
  });

  StageReport report;
  report.stage = "identify";
  std::string combined;
  for (Index run = 0; run < ensemble.count; ++run) {
    const fs::path est = est_dir / run_file(run, ".csv");
    if (fs::exists(est_dir / run_file(run, ".failed"))) {
      report.failed_runs.push_back(run);
      continue;
    }
    const std::string text = read_text_file(est);
    combined += combined.empty() ? text : text.substr(text.find('\n') + 1);
    report.files.push_back(est);
    report.files.push_back(ref_dir / run_file(run, ".csv"));
  }
  for (char p : processed) report.processed_runs += p;
  if (!combined.empty()) {
    write_text_file(dir / layout::estimates, combined);
    report.files.push_back(dir / layout::estimates);
  }

  json meta;
  meta["config_hash"] = hash;
  meta["particles"] = cfg.particles;
  meta["schedule"] = schedule.describe();
  meta["reference"] = {{"particles", ref_options.particles},
                       {"replicates", ref_options.replicates},
                       {"provenance", "reference-smc(particles=" + std::to_string(ref_options.particles) +
                                          ", replicates=" + std::to_string(ref_options.replicates) +
                                          ", schedule=" + schedule.describe() + ")"}};
  meta["runs"] = ensemble.count;
  meta["failed_runs"] = report.failed_runs;
  write_text_file(stage_manifest, meta.dump(2) + "\n");
  report.files.push_back(stage_manifest);

  report.seconds = seconds_since(start);
  update_manifest(dir, cfg, report);
  return report;
}

StageReport cmd_analyze(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const SsmModel model = cfg.build_model();
  const Index q = model.param_dim;
  const fs::path dir = resolve_output_dir(cfg);
  const TrajectoryEnsemble ensemble = load_ensemble(dir, model);

  const fs::path bound_path = dir / layout::bound_matrices;
  if (!fs::exists(bound_path)) throw IoError("missing " + bound_path.string() + " (run the bound stage first)");
  const BoundSeries bound = parse_bound_matrices(read_csv(bound_path), q);
  if (bound.size() != ensemble.horizon + 1) throw IoError("bound series and ensemble horizons differ");

  std::string provenance = "reference-smc";
  const fs::path stage_manifest = dir / layout::identify_manifest;
  if (!fs::exists(stage_manifest)) throw IoError("missing " + stage_manifest.string() + " (run the identify stage first)");
  try {
    provenance = json::parse(read_text_file(stage_manifest)).at("reference").at("provenance").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(stage_manifest.string() + ": " + e.what());
  }

  std::vector<Index> runs;
  std::vector<Index> failed;
  std::vector<Matrix> estimates, references;
  for (Index run = 0; run < ensemble.count; ++run) {
    const fs::path est = dir / layout::estimates_dir / run_file(run, ".csv");
    const fs::path ref = dir / layout::reference_dir / run_file(run, ".csv");
    if (fs::exists(dir / layout::estimates_dir / run_file(run, ".failed"))) {
      failed.push_back(run);
      continue;
    }
    if (!fs::exists(est) || !fs::exists(ref)) throw IoError("missing identification output for run " + std::to_string(run));
    estimates.push_back(parse_series(read_csv(est), "theta_hat_", q, ensemble.horizon, est.string()));
    references.push_back(parse_series(read_csv(ref), "theta_ref_", q, ensemble.horizon + 1, ref.string()));
    runs.push_back(run);
  }
  if (runs.empty()) throw NumericalError("no completed identification runs to analyze");

  Matrix truths(q, static_cast<Index>(runs.size()));
  for (std::size_t k = 0; k < runs.size(); ++k) truths.col(static_cast<Index>(k)) = ensemble.params.col(runs[k]);

  const MseSeries mse = mse_mc(truths, estimates);
  const BiasRecord bias = make_bias_record(references, estimates, provenance);
  Tolerances tol;
  tol.epsilon = cfg.epsilon_for(q);
  tol.alpha = cfg.alpha_for(q);
  tol.rho = cfg.rho;
  const Verdict verdict = classify(mse, bound, bias, tol);

  std::vector<std::string> header{"t", "trace_P", "trace_L", "min_eig_gap"};
  append(header, numbered("frac_within_eps_", q));
  append(header, numbered("abs_mean_bias_", q));
  header.insert(header.end(), {"eps_efficient", "eps_unbiased", "eps_mmse"});
  append(header, numbered("alpha_unbiased_", q));
  append(header, numbered("mse_", q));
  append(header, numbered("bound_", q));
  append(header, numbered("mean_bias_", q));
  CsvWriter csv(header);
  std::vector<Index> mse_above(static_cast<std::size_t>(q), 0);
  for (const VerdictStep& step : verdict.steps) {
    const Matrix& p = mse.mse[static_cast<std::size_t>(step.t - 1)];
    const Matrix& l = bound.bounds[static_cast<std::size_t>(step.t)];
    csv.cell(static_cast<std::int64_t>(step.t)).cell(p.trace()).cell(l.trace()).cell(step.gap.min_eigenvalue);
    for (Index i = 0; i < q; ++i) csv.cell(step.fraction_within(i));
    for (Index i = 0; i < q; ++i) csv.cell(step.abs_mean_bias(i));
    csv.cell(std::int64_t{step.eps_efficient}).cell(std::int64_t{step.eps_unbiased}).cell(std::int64_t{step.eps_mmse});
    for (Index i = 0; i < q; ++i) csv.cell(std::int64_t{step.alpha_unbiased[static_cast<std::size_t>(i)]});
    for (Index i = 0; i < q; ++i) csv.cell(p(i, i));
    for (Index i = 0; i < q; ++i) csv.cell(l(i, i));
    for (Index i = 0; i < q; ++i) csv.cell(step.mean_bias(i));
    csv.end_row();
    for (Index i = 0; i < q; ++i)
      if (p(i, i) >= l(i, i)) ++mse_above[static_cast<std::size_t>(i)];
  }

  std::vector<std::string> bias_header{"run_index", "t"};
  append(bias_header, numbered("bias_", q));
  CsvWriter bias_csv(bias_header);
  for (std::size_t k = 0; k < runs.size(); ++k)
    for (Index t = 1; t <= ensemble.horizon; ++t) {
      bias_csv.cell(static_cast<std::int64_t>(runs[k])).cell(static_cast<std::int64_t>(t));
      for (Index i = 0; i < q; ++i) bias_csv.cell(bias.conditional[k](i, t - 1));
      bias_csv.end_row();
    }

  const VerdictStep& last = verdict.steps.back();
  const Matrix& p_final = mse.mse.back();
  const Matrix& l_final = bound.bounds.back();
  json summary;
  summary["model"] = model.name;
  summary["runs_used"] = runs.size();
  summary["failed_runs"] = failed;
  summary["reference_provenance"] = bias.provenance;
  summary["epsilon"] = vector_json(tol.epsilon);
  summary["alpha"] = vector_json(tol.alpha);
  summary["rho"] = tol.rho;
  summary["final_t"] = last.t;
  summary["eps_efficient"] = last.eps_efficient;
  summary["eps_unbiased"] = last.eps_unbiased;
  summary["eps_mmse"] = last.eps_mmse;
  summary["trace_gap"] = last.gap.trace_gap;
  summary["min_eig_gap"] = last.gap.min_eigenvalue;
  json params = json::array();
  for (Index i = 0; i < q; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    params.push_back({{"name", model.param_names[ii]},
                      {"fraction_within_eps", last.fraction_within(i)},
                      {"mean_bias", last.mean_bias(i)},
                      {"eps_unbiased", bool(last.eps_unbiased_param[ii])},
                      {"alpha_unconditionally_unbiased", bool(last.alpha_unbiased[ii])},
                      {"mse", p_final(i, i)},
                      {"bound", l_final(i, i)},
                      {"fraction_steps_mse_above_bound",
                       static_cast<double>(mse_above[ii]) / static_cast<double>(verdict.steps.size())}});
  }
  summary["parameters"] = params;

  StageReport report;
  report.stage = "analyze";
  report.failed_runs = failed;
  auto emit = [&](const char* name, const std::string& text) {
    write_text_file(dir / name, text);
    report.files.push_back(dir / name);
  };
  emit(layout::analysis, csv.str());
  emit(layout::bias, bias_csv.str());
  emit(layout::analysis_summary, summary.dump(2) + "\n");
  report.seconds = seconds_since(start);
  update_manifest(dir, cfg, report);
  return report;
}

std::vector<StageReport> cmd_all(const RunConfig& cfg) {
  std::vector<StageReport> reports;
  reports.push_back(cmd_bound(cfg));
  reports.push_back(cmd_identify(cfg));
  reports.push_back(cmd_analyze(cfg));
  return reports;
}

std::string list_models_text() {
  std::ostringstream out;
  for (const auto& name : model_names()) {
    const SsmModel m = make_model(name);
    out << name << "  (n=" << m.state_dim << ", q=" << m.param_dim << ", m=" << m.meas_dim << ")  "
        << model_summary(name) << "\n";
  }
  return out.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 4;
  return 1;
}

}  // namespace pcrlb
