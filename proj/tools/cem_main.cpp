#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cem/commands.hpp"
#include "cem/config.hpp"
#include "cem/error.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string output_dir;
  std::string od_csv;
  long long seed = -1;
  long long threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", flags.config_path, "run config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("-o,--output-dir", flags.output_dir, "override output directory");
  cmd->add_option("--od-csv", flags.od_csv, "override OD-pair CSV path");
  cmd->add_option("--seed", flags.seed, "override experiment seed");
  cmd->add_option("--threads", flags.threads, "override worker thread count");
}

cem::RunConfig load_with_overrides(const CommonFlags& flags) {
  cem::RunConfig cfg = flags.config_path.empty()
                           ? cem::parse_run_config(nlohmann::json::object())
                           : cem::load_run_config(flags.config_path);
  // Flags win over file values; the manifest echoes the merged result.
  if (!flags.output_dir.empty()) {
    cfg.output_dir = flags.output_dir;
    cfg.raw["paths"]["output_dir"] = flags.output_dir;
  }
  if (!flags.od_csv.empty()) {
    cfg.od_csv = flags.od_csv;
    cfg.raw["paths"]["od_csv"] = flags.od_csv;
  }
  if (flags.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(flags.seed);
    cfg.raw["seed"] = cfg.seed;
  }
  if (flags.threads >= 0) {
    cfg.threads = static_cast<std::size_t>(flags.threads);
    cfg.raw["threads"] = cfg.threads;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-aided ensemble demand modeling"};
  app.require_subcommand(1);

  CommonFlags prep_flags, gen_flags, exp_flags, pred_flags;
  std::string model_path, input_csv;

  auto* prep = app.add_subcommand("prep", "trip CSV -> OD-pair dataset");
  add_common(prep, prep_flags);

  auto* gen = app.add_subcommand("generate", "synthetic OD-pair dataset");
  add_common(gen, gen_flags, /*config_required=*/false);

  auto* exp = app.add_subcommand("experiment", "fit CEM, benchmark, emit reports");
  add_common(exp, exp_flags);

  auto* pred = app.add_subcommand("predict", "score a CSV with a saved model");
  add_common(pred, pred_flags, /*config_required=*/false);
  pred->add_option("-m,--model", model_path, "saved cem_model.bin")->required();
  pred->add_option("-i,--input", input_csv, "OD-pair CSV to score")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed()) {
      cem::cmd_prep(load_with_overrides(prep_flags), std::cout);
    } else if (gen->parsed()) {
      cem::cmd_generate(load_with_overrides(gen_flags), std::cout);
    } else if (exp->parsed()) {
      cem::cmd_experiment(load_with_overrides(exp_flags), std::cout);
    } else if (pred->parsed()) {
      cem::cmd_predict(load_with_overrides(pred_flags), model_path, input_csv,
                       std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cem::exit_code_for(e);
  }
  return 0;
}
