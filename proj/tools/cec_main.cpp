// Copyright 2026 The CEC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cec: pretrain / pil / run / ablate / eval.
//
// Every subcommand takes an optional JSON config (--config) and any number of
// --section.key=value overrides, e.g. --pil.iterations=300 --run.head=linear.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cec/ablate.hpp"
#include "cec/config.hpp"
#include "cec/param_io.hpp"
#include "cec/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool seed_required) {
  cmd->add_option("--config", args.config, "JSON config file (defaults to the desk-scale setup)")
      ->check(CLI::ExistingFile);
  auto* seed = cmd->add_option("--seed", args.seed, "base seed");
  if (seed_required) seed->required();
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--threads", args.threads, "evaluation threads");
  cmd->allow_extras();
}

cec::ExperimentConfig assemble(const CommonArgs& args, const std::vector<std::string>& extras) {
  nlohmann::json doc = args.config.empty()
                           ? cec::config_to_json(cec::desk_config(args.seed.value_or(0)))
                           : nlohmann::json::parse(cec::read_text_file(args.config));
  for (const std::string& e : extras) {
    if (!e.starts_with("--") || e.find('=') == std::string::npos) {
      throw CLI::ValidationError(fmt::format("unexpected argument '{}'", e));
    }
    cec::apply_override(doc, std::string_view(e).substr(2));
  }
  if (args.seed) doc["seed"] = *args.seed;
  if (args.threads) doc["threads"] = *args.threads;
  return cec::config_from_json(doc);
}

void print_metrics(const cec::SessionMetrics& m) {
  for (std::size_t i = 0; i < m.accuracies.size(); ++i) {
    fmt::print("session {:>2}  classes {:>3}  acc {:6.2f}\n", i, m.classes[i], 100.0 * m.accuracies[i]);
  }
  fmt::print("avg {:.2f}  pd {:.2f}\n", 100.0 * m.avg, 100.0 * m.pd);
}

int cmd_pretrain(const cec::ExperimentConfig& c, const fs::path& out) {
  cec::ExperimentConfig cfg = c;
  cfg.checkpoints.encoder.clear();
  const cec::Prepared p = cec::prepare(cfg);
  cec::save_params(out / "checkpoints" / "encoder.json", cec::encoder_to_document(p.encoder.encoder));
  cec::save_params(out / "checkpoints" / "base_head.json", cec::head_to_document(*p.encoder.base_head));
  std::string log = "epoch,loss\n";
  for (std::size_t e = 0; e < p.encoder.epoch_losses.size(); ++e) {
    log += fmt::format("{},{:.17g}\n", e, p.encoder.epoch_losses[e]);
  }
  cec::write_text_file(out / "pretrain_log.csv", log);
  nlohmann::json summary = {{"train_accuracy", *p.encoder.train_accuracy},
                            {"encoder_digest", cec::params_digest(p.encoder.encoder)},
                            {"config", cec::config_to_json(cfg)}};
  cec::write_text_file(out / "pretrain.json", summary.dump(2) + "\n");
  fmt::print("base-session train accuracy {:.2f}\n", 100.0 * *p.encoder.train_accuracy);
  return 0;
}

int cmd_pil(const cec::ExperimentConfig& c, const fs::path& out) {
  cec::ExperimentConfig cfg = c;
  cfg.checkpoints.adapter.clear();
  const cec::Prepared p = cec::prepare(cfg);
  const cec::AdapterStage a = cec::obtain_adapter(cfg, p.data, p.split, p.encoder.encoder);
  cec::save_params(out / "checkpoints" / "adapter.json", cec::adapter_to_document(a.adapter));
  cec::save_params(out / "checkpoints" / "encoder_deployed.json",
                   cec::encoder_to_document(a.deployed_encoder));
  cec::write_text_file(out / "loss_log.csv", cec::loss_log_csv(a.log));
  if (!a.log.empty()) fmt::print("final episode loss {:.4f}\n", a.log.back().loss);
  return 0;
}

int cmd_run(const cec::ExperimentConfig& c, const fs::path& out) {
  const cec::Prepared p = cec::prepare(c);
  const cec::ExperimentResult r = cec::run_experiment(c, p);
  cec::write_run_outputs(out, c, p, r);
  print_metrics(r.run.metrics);
  return 0;
}

int cmd_ablate(const cec::ExperimentConfig& c, const fs::path& out, const std::string& axis_name,
               const std::string& grid_path) {
  const cec::AblateAxis axis = cec::parse_axis(axis_name);
  const nlohmann::json grid = grid_path.empty() ? cec::default_grid(axis)
                                                : nlohmann::json::parse(cec::read_text_file(grid_path));
  const std::vector<cec::AblateCell> cells = cec::ablation_cells(axis, grid, c);
  const cec::Prepared p = cec::prepare(c);
  const std::vector<cec::AblateRow> rows = cec::run_ablation(cells, p);
  const std::string csv = cec::ablation_csv(rows);
  cec::write_text_file(out / fmt::format("ablation_{}.csv", axis_name), csv);
  fmt::print("{}", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot class-incremental learning with continually evolved classifiers"};
  app.set_version_flag("--version", cec::version());
  app.require_subcommand(1);

  CommonArgs pretrain_args, pil_args, run_args, ablate_args, eval_args;
  auto* pretrain = app.add_subcommand("pretrain", "train the encoder on the base session");
  add_common(pretrain, pretrain_args, true);
  auto* pil = app.add_subcommand("pil", "train the adapter with pseudo incremental episodes");
  add_common(pil, pil_args, true);
  auto* run = app.add_subcommand("run", "full pipeline and incremental evaluation");
  add_common(run, run_args, true);
  auto* ablate = app.add_subcommand("ablate", "sweep one ablation axis");
  add_common(ablate, ablate_args, false);
  std::string axis, grid;
  ablate->add_option("--axis", axis, "way-shot | rotation-degrees | classifier-kind | switches")
      ->required();
  ablate->add_option("--grid", grid, "JSON grid (defaults to the axis' standard grid)")
      ->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "evaluate saved checkpoints on the session split");
  add_common(eval, eval_args, false);
  std::string encoder_path, adapter_path;
  eval->add_option("--encoder", encoder_path, "encoder checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--adapter", adapter_path, "adapter checkpoint")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (pretrain->parsed()) {
      return cmd_pretrain(assemble(pretrain_args, pretrain->remaining()), pretrain_args.out);
    }
    if (pil->parsed()) return cmd_pil(assemble(pil_args, pil->remaining()), pil_args.out);
    if (run->parsed()) return cmd_run(assemble(run_args, run->remaining()), run_args.out);
    if (ablate->parsed()) {
      return cmd_ablate(assemble(ablate_args, ablate->remaining()), ablate_args.out, axis, grid);
    }
    if (eval->parsed()) {
      cec::ExperimentConfig c = assemble(eval_args, eval->remaining());
      c.checkpoints.encoder = encoder_path;
      c.checkpoints.adapter = adapter_path;
      if (!adapter_path.empty()) c.run.switches.adapter = true;
      if (c.run.switches.adapter && adapter_path.empty()) {
        throw std::invalid_argument("eval with the adapter switch on needs --adapter");
      }
      return cmd_run(c, eval_args.out);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "cec: {}\n", e.what());
    return 1;
  }
  return 0;
}
