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

#ifndef FILAUDIT_EXPERIMENT_H_
#define FILAUDIT_EXPERIMENT_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "filaudit/attacks.h"
#include "filaudit/bounds.h"
#include "filaudit/priors.h"
#include "filaudit/splitsim.h"

namespace filaudit {

// log10-spaced grid, inclusive of both endpoints.
std::vector<double> LogSpacedGrid(double lo_exp, double hi_exp, int64_t count);

// ----------------------------------------------------------------------
// Random-projection benchmark: Gaussian prior, e = Mx + noise, two attacks
// against the two bounds across a 1/dFIL grid.

struct Fig2Config {
  int64_t d = 196;
  int64_t k = 2500;
  double tau = 0.05;
  int64_t trials = 50;
  std::vector<double> one_over_dfil_grid;  // empty: 13 points, 1e-4..1e2
  uint64_t seed = 1;
  int64_t max_iters = 400;
  bool paper_scale = false;  // d=784, k=10000
};

Fig2Config Fig2ConfigFromJson(const nlohmann::json& j);

struct Fig2Row {
  double one_over_dfil = 0.0;
  double sigma = 0.0;
  double bound_ub = 0.0;
  double bound_ours = 0.0;
  double mse_attack_ub = 0.0;
  double stderr_ub = 0.0;
  double mse_attack_b = 0.0;
  double stderr_b = 0.0;
};

struct Fig2Result {
  std::vector<Fig2Row> rows;
  // Closed-form expectations for the affine setup, aligned with rows:
  // least-squares attack MSE sigma^2 tr((M^T M)^-1)/d and posterior-mean MSE
  // tr((M^T M / sigma^2 + I/tau^2)^-1)/d.
  std::vector<double> ls_oracle_mse;
  std::vector<double> map_oracle_mse;
};

Fig2Result RunFig2(const Fig2Config& config);

inline constexpr const char* kFig2CsvHeader =
    "one_over_dfil,sigma,bound_ub,bound_ours,mse_attack_ub,stderr_ub,"
    "mse_attack_b,stderr_b";

void WriteFig2Csv(const std::string& path, const std::vector<Fig2Row>& rows);
std::vector<Fig2Row> ReadFig2Csv(const std::string& path);

// ----------------------------------------------------------------------
// Encoder audit over a sample file.

struct EncoderSpec {
  std::string type = "identity";  // identity | random-projection | mlp
  double sigma = 1.0;
  int64_t k = 0;                  // random-projection output dim
  std::vector<int64_t> hidden;    // mlp hidden widths
  uint64_t seed = 0;
};

EncoderSpec EncoderSpecFromJson(const nlohmann::json& j);
SmoothMap BuildEncoderBase(const EncoderSpec& spec, int64_t d);

struct AuditConfig {
  EncoderSpec encoder;
  std::vector<double> target_dfils = {1.0, 10.0, 100.0};
  double gaussian_tau = 0.0;  // > 0 adds a Gaussian-prior van Trees bound
  int64_t regularity_samples = 20000;
  uint64_t seed = 0;
};

AuditConfig AuditConfigFromJson(const nlohmann::json& j);

nlohmann::json RunAudit(const AuditConfig& config,
                        const std::vector<Vector>& samples);

// ----------------------------------------------------------------------
// Attack benchmark against a configured encoder and Gaussian prior.

struct AttackRunConfig {
  EncoderSpec encoder;
  int64_t d = 16;
  double tau = 1.0;
  double target_dfil = 0.0;  // > 0 recalibrates encoder sigma on prior draws
  std::vector<std::string> attacks = {"unbiased-ls", "map-gaussian",
                                      "prior-mean"};
  int64_t trials = 100;
  int64_t max_iters = 400;
  int64_t inversion_pairs = 2000;
  uint64_t seed = 0;
};

AttackRunConfig AttackRunConfigFromJson(const nlohmann::json& j);

// CSV lines (header included) in the AttackCsvHeader schema.
std::vector<std::string> RunAttackBenchmark(const AttackRunConfig& config);

// ----------------------------------------------------------------------
// Split-inference and encoded-training case study.

struct SplitsimConfig {
  std::vector<double> one_over_dfil_grid = {1.0, 10.0, 100.0};
  int64_t d = 16;
  int num_classes = 4;
  int64_t n_train = 4000;
  int64_t n_test = 1000;
  double center_scale = 1.0;
  int64_t hidden = 32;
  int64_t compression_width = 4;
  double snr_lambda = 0.05;
  int64_t epochs = 25;
  double step_size = 3e-3;
  int64_t batch_size = 32;
  int64_t eval_repeats = 5;
  uint64_t seed = 7;
  bool run_noopt = true;
  bool run_finetune = true;
};

SplitsimConfig SplitsimConfigFromJson(const nlohmann::json& j);

struct SplitsimRow {
  int64_t epoch = 0;
  std::string split;
  double one_over_dfil = 0.0;
  double accuracy = 0.0;
  double mean_snr_reg = 0.0;
};

struct SplitsimResult {
  std::vector<SplitsimRow> rows;
  std::vector<double> grid;
  std::vector<double> opts_accuracy;      // final, noise-averaged, per grid
  std::vector<double> noopt_accuracy;     // per grid
  std::vector<double> finetune_accuracy;  // per grid
  double baseline_accuracy = 0.0;         // noiseless split model
  bool client_frozen = false;             // finetune never mutated the client
};

SplitsimResult RunSplitsim(const SplitsimConfig& config);

inline constexpr const char* kSplitsimCsvHeader =
    "epoch,split,one_over_dfil,accuracy,mean_snr_reg";

void WriteSplitsimCsv(const std::string& path,
                      const std::vector<SplitsimRow>& rows);

// ----------------------------------------------------------------------
// Score fitting over a sample file, with an 80/20 held-out split.

struct ScoreFitConfig {
  ScoreModelConfig model;
  double holdout_fraction = 0.2;
  uint64_t split_seed = 17;
};

ScoreFitConfig ScoreFitConfigFromJson(const nlohmann::json& j);

nlohmann::json RunScoreFit(const ScoreFitConfig& config,
                           const std::vector<Vector>& samples);

}  // namespace filaudit

#endif  // FILAUDIT_EXPERIMENT_H_
