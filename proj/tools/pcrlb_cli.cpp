#include "pcrlb/errors.hpp"
#include "pcrlb/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
  std::string model;
  std::optional<pcrlb::Index> particles;
  std::optional<pcrlb::Index> mc_runs;
  std::optional<pcrlb::Index> horizon;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--model", o.model, "registered model name");
  cmd->add_option("--particles", o.particles, "identifier particle count N");
  cmd->add_option("--mc-runs", o.mc_runs, "Monte-Carlo trajectories M");
  cmd->add_option("--horizon", o.horizon, "time horizon T");
}

pcrlb::RunConfig resolve(const Overrides& o) {
  pcrlb::RunConfig cfg = o.config.empty() ? pcrlb::RunConfig{} : pcrlb::load_config(o.config);
  if (!o.model.empty()) {
    if (cfg.model.is_object())
      cfg.model["name"] = o.model;
    else
      cfg.model = o.model;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.out.empty()) cfg.output = o.out;
  if (o.particles) cfg.particles = *o.particles;
  if (o.mc_runs) cfg.mc_runs = *o.mc_runs;
  if (o.horizon) cfg.horizon = *o.horizon;
  return cfg;
}

void print(const pcrlb::StageReport& r) {
  std::cout << r.stage << ": " << r.files.size() << " files in " << r.seconds << " s";
  if (r.stage == "identify") std::cout << ", " << r.processed_runs << " runs processed";
  if (!r.failed_runs.empty()) std::cout << ", " << r.failed_runs.size() << " runs failed";
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior Cramer-Rao bounds and SMC identification audits"};
  app.set_version_flag("--version", pcrlb::kVersion);
  app.require_subcommand(1);

  Overrides o;
  auto* bound = app.add_subcommand("bound", "simulate the ensemble and compute the bound");
  auto* ident = app.add_subcommand("identify", "run the identifier and reference filter per trajectory");
  auto* analyze = app.add_subcommand("analyze", "MSE, bias and efficiency classification");
  auto* all = app.add_subcommand("all", "bound, identify and analyze in sequence");
  auto* list = app.add_subcommand("list-models", "print the model registry");
  for (auto* cmd : {bound, ident, analyze, all}) add_run_flags(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      std::cout << pcrlb::list_models_text();
      return 0;
    }
    const pcrlb::RunConfig cfg = resolve(o);
    if (bound->parsed()) print(pcrlb::cmd_bound(cfg));
    if (ident->parsed()) print(pcrlb::cmd_identify(cfg));
    if (analyze->parsed()) print(pcrlb::cmd_analyze(cfg));
    if (all->parsed())
      for (const auto& r : pcrlb::cmd_all(cfg)) print(r);
    std::cout << "output: " << pcrlb::resolve_output_dir(cfg).string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pcrlb::exit_code_for(e);
  }
  return 0;
}
