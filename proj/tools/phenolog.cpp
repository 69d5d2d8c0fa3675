/*
 * Copyright 2026 The phenolog Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// phenolog: ingest -> featurize -> train / predict / evaluate, plus simulate.
// Exit codes: 0 success, 1 user error, 2 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phenolog/error.hpp"
#include "phenolog/eval.hpp"
#include "phenolog/ingest.hpp"
#include "phenolog/io.hpp"
#include "phenolog/models/artifact.hpp"
#include "phenolog/pipeline.hpp"
#include "phenolog/synth.hpp"
#include "phenolog/taxonomy.hpp"

namespace {

using namespace phenolog;

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string out;
  std::string records;
  std::string artifact;
  std::string format = "auto";
  std::uint64_t seed = 0;
  std::string task = "classify";
  std::string model = "rf";
  int folds = 5;
  std::string strategy = "grouped";
  double eta = models::kDefaultEta;
  std::optional<double> gp_lengthscale;
  double gp_noise = 1.0;
  int traces = 100;
  bool gp_tune = false;
  int trees = 200;
  std::vector<double> k_hours = {8.0, 9.0, 10.0};
  std::string labeler = "passthrough";
  std::string lexicon;
  std::string assume_offset;
  unsigned jobs = 1;
  bool show_config = false;
};

nlohmann::ordered_json config_json(const RunConfig& c, const CLI::App* sub) {
  nlohmann::ordered_json j;
  j["subcommand"] = c.subcommand;
  auto has = [&](const char* name) {
    for (const auto* opt : sub->get_options())
      if (opt->check_lname(name)) return true;
    return false;
  };
  if (has("input")) j["input"] = c.input;
  if (has("out")) j["out"] = c.out;
  if (has("records")) j["records"] = c.records;
  if (has("artifact")) j["artifact"] = c.artifact;
  if (has("format")) j["format"] = c.format;
  if (has("assume-offset")) j["assume_offset"] = c.assume_offset.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(c.assume_offset);
  if (has("k-hours")) j["k_hours"] = c.k_hours;
  if (has("labeler")) j["labeler"] = c.labeler;
  if (has("lexicon")) j["lexicon"] = c.lexicon;
  if (has("jobs")) j["jobs"] = c.jobs;
  if (has("seed")) j["seed"] = c.seed;
  if (has("task")) j["task"] = c.task;
  if (has("model")) j["model"] = c.model;
  if (has("folds")) j["folds"] = c.folds;
  if (has("strategy")) j["strategy"] = c.strategy;
  if (has("eta")) {
    j["eta"] = c.eta;
    j["gp_lengthscale"] = c.gp_lengthscale ? nlohmann::ordered_json(*c.gp_lengthscale)
                                           : nlohmann::ordered_json("median-heuristic");
    j["gp_noise"] = c.gp_noise;
    j["gp_tune"] = c.gp_tune;
    j["traces"] = c.traces;
    j["trees"] = c.trees;
  }
  return j;
}

eval::ExperimentConfig experiment_config(const RunConfig& c) {
  eval::ExperimentConfig cfg;
  cfg.task = eval::parse_task(c.task);
  cfg.model = models::parse_model_kind(c.model);
  cfg.strategy = eval::parse_strategy(c.strategy);
  cfg.folds = c.folds;
  cfg.seed = c.seed;
  cfg.params.eta = c.eta;
  cfg.params.gp.length_scale = c.gp_lengthscale;
  cfg.params.gp.noise_std = c.gp_noise;
  cfg.params.gp.n_traces = c.traces;
  cfg.params.gp.tune = c.gp_tune;
  cfg.params.forest.n_trees = static_cast<std::size_t>(c.trees);
  return cfg;
}

std::optional<int> assume_offset(const RunConfig& c) {
  if (c.assume_offset.empty()) return std::nullopt;
  return parse_offset(c.assume_offset);
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_ingest(const RunConfig& c) {
  LogFormat format = LogFormat::kJsonl;
  if (c.format == "csv" ||
      (c.format == "auto" && std::filesystem::path(c.input).extension() == ".csv"))
    format = LogFormat::kCsv;
  const auto offset = assume_offset(c);
  ParseReport report;
  try {
    report = parse_events(c.input, format, offset);
  } catch (const ParseFailure& e) {
    write_file_atomic(join(c.out, "errors.jsonl"), error_report_jsonl(e.errors()));
    throw;
  }
  for (const auto& err : report.errors)
    std::cerr << "warning: " << c.input << ":" << err.line << ": " << err.reason << "\n";
  std::vector<ActivityEvent> ordered;
  for (auto& [_, t] : build_timelines(report.events))
    ordered.insert(ordered.end(), t.events.begin(), t.events.end());
  write_file_atomic(join(c.out, "events.jsonl"), events_jsonl(ordered));
  write_file_atomic(join(c.out, "errors.jsonl"), error_report_jsonl(report.errors));
  std::cerr << "ingested " << ordered.size() << " events from " << report.records_seen
            << " records (" << report.errors.size() << " malformed)\n";
  return 0;
}

int cmd_featurize(const RunConfig& c) {
  const auto report = parse_events(c.input, LogFormat::kJsonl, assume_offset(c));
  if (!report.errors.empty())
    for (const auto& err : report.errors)
      std::cerr << "warning: " << c.input << ":" << err.line << ": " << err.reason << "\n";
  std::optional<std::vector<ParticipantRecord>> records;
  if (!c.records.empty()) records = read_records(c.records);
  std::optional<Lexicon> lexicon;
  FeaturizeOptions options;
  if (c.labeler == "lexicon") {
    if (c.lexicon.empty()) throw InputError("--labeler lexicon needs --lexicon PATH");
    lexicon = Lexicon::load(c.lexicon);
    options.labeler = LabelerKind::kLexicon;
    options.lexicon = &*lexicon;
  }
  for (std::size_t i = 0; i < 3; ++i) options.features.k_hours[i] = c.k_hours[i];
  options.jobs = c.jobs;
  const auto result = featurize(report.events, records ? &*records : nullptr, options);
  for (const auto& w : result.warnings) std::cerr << "warning: skipped " << w << "\n";
  if (result.table.empty()) throw InputError(c.input + ": no participant window could be featurized");
  write_file_atomic(c.out, feature_csv(result.table));
  return 0;
}

int cmd_simulate(const RunConfig& c, bool seed_given) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(c.input));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(c.input + ": " + e.what());
  }
  if (seed_given) j["seed"] = c.seed;
  const auto spec = synth::spec_from_json(j);
  const auto cohort = synth::generate_cohort(spec);
  write_file_atomic(join(c.out, "events.jsonl"), events_jsonl(cohort.events));
  write_file_atomic(join(c.out, "records.jsonl"), records_jsonl(cohort.records));
  write_file_atomic(join(c.out, "truth.json"), synth::truth_json(cohort).dump(2) + "\n");
  std::cerr << "simulated " << cohort.records.size() << " participants, " << cohort.events.size()
            << " events\n";
  return 0;
}

int cmd_train(const RunConfig& c) {
  const auto features = read_feature_csv(c.input);
  const auto records = read_records(c.records);
  const auto artifact = eval::train_model(records, features, experiment_config(c));
  write_file_atomic(c.out, models::to_json(artifact).dump() + "\n");
  return 0;
}

int cmd_predict(const RunConfig& c) {
  const auto artifact = models::load_artifact(c.artifact);
  const auto features = read_feature_csv(c.input, artifact.feature_names);
  std::vector<ParticipantRecord> records;
  if (!c.records.empty()) {
    records = read_records(c.records);
  } else if (!models::is_classifier(artifact.kind)) {
    throw InputError("score prediction needs --records for the round-1 scores");
  }
  write_file_atomic(c.out, eval::predictions_csv(artifact, features, records));
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  const auto features = read_feature_csv(c.input);
  const auto records = read_records(c.records);
  const auto result = eval::run_experiment(records, features, experiment_config(c));
  write_file_atomic(join(c.out, "report.json"), eval::report_json(result).dump(2) + "\n");
  write_file_atomic(join(c.out, "folds.csv"), eval::folds_csv(result));
  if (result.config.task == eval::Task::kClassify)
    write_file_atomic(join(c.out, "roc.tsv"), eval::roc_tsv(result));
  const auto headline = result.config.task == eval::Task::kClassify ? "f1" : "mse";
  const auto& s = result.summary.at(headline);
  std::cerr << headline << " " << format_double(s.mean) << " +/- " << format_double(s.std) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phenolog: behavioral features from online-activity logs"};
  app.require_subcommand(1);
  RunConfig c;

  auto* ingest = app.add_subcommand("ingest", "Parse raw logs into an ordered, redacted event file");
  auto* featurize = app.add_subcommand("featurize", "Compute the 16 features per participant window");
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort from a spec");
  auto* train = app.add_subcommand("train", "Train a model on all rows");
  auto* predict = app.add_subcommand("predict", "Score a feature file with a trained model");
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated evaluation");

  const std::vector<std::string> tasks = {"classify", "predict"};
  const std::vector<std::string> models_all = {"lr", "rf", "ols", "gb", "gp"};
  const std::vector<std::string> strategies = {"grouped", "holdout", "no-group"};
  auto offset_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          phenolog::parse_offset(s);
        } catch (const std::exception& e) {
          return e.what();
        }
        return {};
      },
      "OFFSET");

  for (auto* sub : {ingest, featurize, simulate, train, predict, evaluate})
    sub->add_flag("--show-config", c.show_config, "Print the resolved configuration and exit");

  ingest->add_option("--input", c.input, "Raw log (JSONL or CSV)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", c.out, "Output directory")->required();
  ingest->add_option("--format", c.format, "Input format")
      ->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
  ingest->add_option("--assume-offset", c.assume_offset, "UTC offset for timestamps without one")
      ->check(offset_check);

  featurize->add_option("--input", c.input, "Event JSONL")->required()->check(CLI::ExistingFile);
  featurize->add_option("--records", c.records, "Participant records JSONL (windows)")
      ->check(CLI::ExistingFile);
  featurize->add_option("--out", c.out, "Feature CSV")->required();
  featurize->add_option("--k-hours", c.k_hours, "Inactivity thresholds in hours")
      ->delimiter(',')->expected(3)->check(CLI::Range(0.0, 24.0))->capture_default_str();
  featurize->add_option("--labeler", c.labeler, "Category labeler")
      ->check(CLI::IsMember({"passthrough", "lexicon"}))->capture_default_str();
  featurize->add_option("--lexicon", c.lexicon, "Lexicon JSON")->check(CLI::ExistingFile);
  featurize->add_option("--assume-offset", c.assume_offset, "UTC offset for timestamps without one")
      ->check(offset_check);
  featurize->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();

  simulate->add_option("--input", c.input, "Cohort spec JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", c.out, "Output directory")->required();
  auto* sim_seed = simulate->add_option("--seed", c.seed, "Override the spec seed");

  auto model_options = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--task", c.task, "Task")->check(CLI::IsMember(tasks))->capture_default_str();
    sub->add_option("--model", c.model, "Model")->check(CLI::IsMember(models_all))->capture_default_str();
    sub->add_option("--eta", c.eta, "Weight on follow-up features")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    sub->add_option("--gp-lengthscale", c.gp_lengthscale, "GP kernel length scale (default: median heuristic)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gp-noise", c.gp_noise, "GP observation noise std")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_flag("--gp-tune", c.gp_tune, "Pick GP hyperparameters by marginal likelihood");
    sub->add_option("--traces", c.traces, "GP posterior traces")->check(CLI::Range(1, 100000))->capture_default_str();
    sub->add_option("--trees", c.trees, "Random forest size")->check(CLI::Range(1, 100000))->capture_default_str();
  };

  train->add_option("--input", c.input, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--records", c.records, "Participant records JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--out", c.out, "Model artifact JSON")->required();
  model_options(train);

  predict->add_option("--artifact", c.artifact, "Model artifact JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", c.input, "Feature CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--records", c.records, "Records JSONL (round-1 scores)")->check(CLI::ExistingFile);
  predict->add_option("--out", c.out, "Predictions CSV")->required();

  evaluate->add_option("--input", c.input, "Feature CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--records", c.records, "Participant records JSONL")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", c.out, "Report directory")->required();
  evaluate->add_option("--folds", c.folds, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
  evaluate->add_option("--strategy", c.strategy, "Fold strategy")->check(CLI::IsMember(strategies))->capture_default_str();
  model_options(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.subcommand = sub->get_name();
  if (c.show_config) {
    std::cout << config_json(c, sub).dump(2) << "\n";
    return 0;
  }
  try {
    if (sub == ingest) return cmd_ingest(c);
    if (sub == featurize) return cmd_featurize(c);
    if (sub == simulate) return cmd_simulate(c, sim_seed->count() > 0);
    if (sub == train) return cmd_train(c);
    if (sub == predict) return cmd_predict(c);
    return cmd_evaluate(c);
  } catch (const phenolog::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
