//
// Copyright 2026 The FilAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "filaudit/experiment.h"
#include "filaudit/io.h"

namespace {

using filaudit::LoadJsonFile;

nlohmann::json LoadConfigOrEmpty(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  return LoadJsonFile(path);
}

void ApplyCommonOverrides(nlohmann::json& config, bool seed_set, uint64_t seed,
                          bool paper_scale) {
  if (seed_set) config["seed"] = seed;
  if (paper_scale) config["paper_scale"] = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "filaudit: Fisher-information leakage auditing for noisy instance "
      "encoders"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string samples_path;
  uint64_t seed = 0;
  bool seed_set = false;
  bool paper_scale = false;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config_path, "JSON config file");
    auto* seed_opt = cmd->add_option("--seed", seed, "Override the RNG seed");
    seed_opt->each([&](const std::string&) { seed_set = true; });
    if (needs_out) {
      cmd->add_option("--out", out_path, "Output file path")->required();
    }
  };

  CLI::App* fig2 = app.add_subcommand(
      "fig2",
      "Random-projection benchmark: bounds vs. attacks over a 1/dFIL grid");
  add_common(fig2, true);
  fig2->add_flag("--paper-scale", paper_scale,
                 "Use the full-scale setup (d=784, k=10000)");

  CLI::App* audit = app.add_subcommand(
      "audit", "Per-sample dFIL distribution and calibration for an encoder");
  add_common(audit, true);
  audit->add_option("--samples", samples_path, "Input samples CSV")
      ->required();

  CLI::App* bound = app.add_subcommand(
      "bound", "Evaluate reconstruction-error lower bounds from a config");
  add_common(bound, true);

  CLI::App* attack = app.add_subcommand(
      "attack", "Run reconstruction attacks against a configured encoder");
  add_common(attack, true);

  CLI::App* splitsim = app.add_subcommand(
      "splitsim", "Split-inference and encoded-training case study");
  add_common(splitsim, true);

  CLI::App* score_fit = app.add_subcommand(
      "score-fit", "Fit a score model to samples and estimate prior info");
  add_common(score_fit, true);
  score_fit->add_option("--samples", samples_path, "Input samples CSV")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json config = LoadConfigOrEmpty(config_path);
    ApplyCommonOverrides(config, seed_set, seed, paper_scale);

    if (fig2->parsed()) {
      const filaudit::Fig2Result result =
          filaudit::RunFig2(filaudit::Fig2ConfigFromJson(config));
      filaudit::WriteFig2Csv(out_path, result.rows);
      std::cout << "wrote " << result.rows.size() << " grid rows to "
                << out_path << "\n";
    } else if (audit->parsed()) {
      const auto samples = filaudit::LoadSamplesCsv(samples_path);
      const nlohmann::json report =
          filaudit::RunAudit(filaudit::AuditConfigFromJson(config), samples);
      filaudit::WriteJsonFile(out_path, report);
      std::cout << "wrote audit report to " << out_path << "\n";
    } else if (bound->parsed()) {
      nlohmann::json reports = nlohmann::json::array();
      if (config.contains("mean_dfil")) {
        filaudit::FisherReport fr;
        fr.d = config.value("d", 1);
        fr.dfil = config.at("mean_dfil").get<double>();
        fr.fim_trace = fr.dfil * static_cast<double>(fr.d);
        fr.per_coordinate_diag = filaudit::Vector::Zero(fr.d);
        reports.push_back(ToJson(filaudit::CramerRaoBound(fr)));
        if (config.contains("gaussian_tau")) {
          reports.push_back(ToJson(filaudit::VanTreesBound(
              fr.dfil, filaudit::GaussianPriorInfo(
                           config.at("gaussian_tau").get<double>(), fr.d))));
        }
      }
      if (config.contains("epsilon")) {
        const auto diam_values =
            config.value("diameters", std::vector<double>{1.0});
        filaudit::Vector diameters(diam_values.size());
        for (size_t i = 0; i < diam_values.size(); ++i) {
          diameters[i] = diam_values[i];
        }
        reports.push_back(ToJson(filaudit::RdpBound(
            config.at("epsilon").get<double>(), diameters)));
      }
      if (reports.empty()) {
        throw std::invalid_argument(
            "bound: config must set mean_dfil and/or epsilon");
      }
      filaudit::WriteJsonFile(out_path, reports);
      std::cout << "wrote " << reports.size() << " bound reports to "
                << out_path << "\n";
    } else if (attack->parsed()) {
      const auto lines = filaudit::RunAttackBenchmark(
          filaudit::AttackRunConfigFromJson(config));
      filaudit::WriteLines(out_path, lines);
      std::cout << "wrote " << lines.size() - 1 << " attack rows to "
                << out_path << "\n";
    } else if (splitsim->parsed()) {
      const filaudit::SplitsimResult result =
          filaudit::RunSplitsim(filaudit::SplitsimConfigFromJson(config));
      filaudit::WriteSplitsimCsv(out_path, result.rows);
      std::cout << "wrote " << result.rows.size() << " metric rows to "
                << out_path << "\n";
    } else if (score_fit->parsed()) {
      const auto samples = filaudit::LoadSamplesCsv(samples_path);
      const nlohmann::json report = filaudit::RunScoreFit(
          filaudit::ScoreFitConfigFromJson(config), samples);
      filaudit::WriteJsonFile(out_path, report);
      std::cout << "wrote score-fit report to " << out_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
