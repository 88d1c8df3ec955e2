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

#include "filaudit/experiment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "filaudit/io.h"
#include "filaudit/rng.h"

namespace filaudit {
namespace {

double PowerIterationLargestEigenvalue(const Matrix& symmetric) {
  std::mt19937_64 rng = MakeRng(0x13bd);
  Vector v = GaussianVector(symmetric.rows(), rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vector w = symmetric * v;
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

double ParseDoubleField(const std::string& field, const std::string& path,
                        int64_t line_no) {
  try {
    return std::stod(field);
  } catch (const std::exception&) {
    throw std::runtime_error(path + " line " + std::to_string(line_no) +
                             ": bad number '" + field + "'");
  }
}

}  // namespace

std::vector<double> LogSpacedGrid(double lo_exp, double hi_exp, int64_t count) {
  if (count < 2) {
    throw std::invalid_argument("LogSpacedGrid: need at least 2 points");
  }
  std::vector<double> grid(count);
  for (int64_t i = 0; i < count; ++i) {
    const double e =
        lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) /
                     static_cast<double>(count - 1);
    grid[i] = std::pow(10.0, e);
  }
  return grid;
}

Fig2Config Fig2ConfigFromJson(const nlohmann::json& j) {
  Fig2Config config;
  config.d = j.value("d", config.d);
  config.k = j.value("k", config.k);
  config.tau = j.value("tau", config.tau);
  config.trials = j.value("trials", config.trials);
  config.seed = j.value("seed", config.seed);
  config.max_iters = j.value("max_iters", config.max_iters);
  config.paper_scale = j.value("paper_scale", config.paper_scale);
  if (j.contains("one_over_dfil_grid")) {
    config.one_over_dfil_grid =
        j.at("one_over_dfil_grid").get<std::vector<double>>();
  }
  return config;
}

Fig2Result RunFig2(const Fig2Config& config) {
  const int64_t d = config.paper_scale ? 784 : config.d;
  const int64_t k = config.paper_scale ? 10000 : config.k;
  if (d < 1 || k < d) {
    throw std::invalid_argument("RunFig2: need k >= d >= 1");
  }
  if (config.trials < 1 || !(config.tau > 0.0)) {
    throw std::invalid_argument("RunFig2: bad trials or tau");
  }
  std::vector<double> grid = config.one_over_dfil_grid.empty()
                                 ? LogSpacedGrid(-4.0, 2.0, 13)
                                 : config.one_over_dfil_grid;
  for (double g : grid) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("RunFig2: grid values must be positive");
    }
  }

  const SmoothMap base = MakeRandomProjection(d, k, MixSeed(config.seed, 0xfa2));
  const Vector zero = Vector::Zero(d);
  const Matrix m = base.Jacobian(zero);
  const Matrix mtm = m.transpose() * m;
  const Matrix identity = Matrix::Identity(d, d);
  const double trace_inv = mtm.ldlt().solve(identity).trace();
  const double lambda_max = PowerIterationLargestEigenvalue(mtm);
  const PriorFisherInfo prior = GaussianPriorInfo(config.tau, d);
  const double inv_prior_var = 1.0 / (config.tau * config.tau);

  Fig2Result result;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    const double one_over_dfil = grid[gi];
    const double target_dfil = 1.0 / one_over_dfil;
    const double sigma = CalibrateSigma(base, zero, target_dfil);
    const NoisyEncoder enc(base, sigma, MixSeed(config.seed, 0xe0c0 + gi));
    const FisherReport report = ComputeFisherReport(enc, zero);

    OptConfig opt_ub;
    opt_ub.max_iters = config.max_iters;
    opt_ub.step_size = 1.0 / (2.0 * lambda_max * 1.05);
    opt_ub.grad_tol = 1e-11;
    OptConfig opt_b = opt_ub;
    opt_b.step_size =
        1.0 / ((lambda_max / (sigma * sigma) + inv_prior_var) * 1.05);

    const AttackFn attack_ub = [&](const Vector& e, uint64_t) {
      return AttackUnbiased(enc, e, zero, opt_ub).x;
    };
    const AttackFn attack_b = [&](const Vector& e, uint64_t) {
      return AttackMapGaussian(enc, e, config.tau, zero, opt_b).x;
    };
    const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
      return config.tau * GaussianVector(d, rng);
    };

    // Both attacks see identical (x, e) trial streams.
    const uint64_t eval_seed = MixSeed(config.seed, 0xa770 + gi);
    const AttackReport rep_ub = EvaluateAttack("unbiased-ls", attack_ub, enc,
                                               sampler, config.trials, eval_seed);
    const AttackReport rep_b = EvaluateAttack("map-gaussian", attack_b, enc,
                                              sampler, config.trials, eval_seed);

    Fig2Row row;
    row.one_over_dfil = one_over_dfil;
    row.sigma = sigma;
    row.bound_ub = CramerRaoBound(report).value;
    row.bound_ours = VanTreesBound(report.dfil, prior).value;
    row.mse_attack_ub = rep_ub.mean_mse;
    row.stderr_ub = rep_ub.StdErrOfMean();
    row.mse_attack_b = rep_b.mean_mse;
    row.stderr_b = rep_b.StdErrOfMean();
    result.rows.push_back(row);

    result.ls_oracle_mse.push_back(sigma * sigma * trace_inv /
                                   static_cast<double>(d));
    const Matrix posterior_cov =
        (mtm / (sigma * sigma) + inv_prior_var * identity)
            .ldlt()
            .solve(identity);
    result.map_oracle_mse.push_back(posterior_cov.trace() /
                                    static_cast<double>(d));
  }
  return result;
}

void WriteFig2Csv(const std::string& path, const std::vector<Fig2Row>& rows) {
  std::vector<std::string> lines;
  lines.emplace_back(kFig2CsvHeader);
  for (const Fig2Row& r : rows) {
    std::ostringstream line;
    line << FormatDouble(r.one_over_dfil) << ',' << FormatDouble(r.sigma) << ','
         << FormatDouble(r.bound_ub) << ',' << FormatDouble(r.bound_ours) << ','
         << FormatDouble(r.mse_attack_ub) << ',' << FormatDouble(r.stderr_ub)
         << ',' << FormatDouble(r.mse_attack_b) << ','
         << FormatDouble(r.stderr_b);
    lines.push_back(line.str());
  }
  WriteLines(path, lines);
}

std::vector<Fig2Row> ReadFig2Csv(const std::string& path) {
  const std::vector<std::string> lines = ReadLines(path);
  if (lines.empty() || lines.front() != kFig2CsvHeader) {
    throw std::runtime_error(path + " line 1: expected header '" +
                             std::string(kFig2CsvHeader) + "'");
  }
  std::vector<Fig2Row> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(lines[i]);
    if (f.size() != 8) {
      throw std::runtime_error(path + " line " + std::to_string(i + 1) +
                               ": expected 8 columns");
    }
    const int64_t line_no = static_cast<int64_t>(i + 1);
    Fig2Row row;
    row.one_over_dfil = ParseDoubleField(f[0], path, line_no);
    row.sigma = ParseDoubleField(f[1], path, line_no);
    row.bound_ub = ParseDoubleField(f[2], path, line_no);
    row.bound_ours = ParseDoubleField(f[3], path, line_no);
    row.mse_attack_ub = ParseDoubleField(f[4], path, line_no);
    row.stderr_ub = ParseDoubleField(f[5], path, line_no);
    row.mse_attack_b = ParseDoubleField(f[6], path, line_no);
    row.stderr_b = ParseDoubleField(f[7], path, line_no);
    rows.push_back(row);
  }
  return rows;
}

EncoderSpec EncoderSpecFromJson(const nlohmann::json& j) {
  EncoderSpec spec;
  spec.type = j.value("type", spec.type);
  spec.sigma = j.value("sigma", spec.sigma);
  spec.k = j.value("k", spec.k);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("hidden")) {
    spec.hidden = j.at("hidden").get<std::vector<int64_t>>();
  }
  return spec;
}

SmoothMap BuildEncoderBase(const EncoderSpec& spec, int64_t d) {
  if (spec.type == "identity") {
    return MakeIdentityMap(d);
  }
  if (spec.type == "random-projection") {
    const int64_t k = spec.k > 0 ? spec.k : d;
    return MakeRandomProjection(d, k, spec.seed);
  }
  if (spec.type == "mlp") {
    std::vector<int64_t> hidden = spec.hidden;
    if (hidden.empty()) hidden = {2 * d, d};
    const int64_t out = hidden.back();
    hidden.pop_back();
    return MakeMlp(d, hidden, out, Activation::kTanh, spec.seed);
  }
  throw std::invalid_argument("unknown encoder type '" + spec.type + "'");
}

AuditConfig AuditConfigFromJson(const nlohmann::json& j) {
  AuditConfig config;
  if (j.contains("encoder")) {
    config.encoder = EncoderSpecFromJson(j.at("encoder"));
  }
  if (j.contains("target_dfils")) {
    config.target_dfils = j.at("target_dfils").get<std::vector<double>>();
  }
  config.gaussian_tau = j.value("gaussian_tau", config.gaussian_tau);
  config.regularity_samples =
      j.value("regularity_samples", config.regularity_samples);
  config.seed = j.value("seed", config.seed);
  return config;
}

nlohmann::json RunAudit(const AuditConfig& config,
                        const std::vector<Vector>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("RunAudit: no samples");
  }
  for (double target : config.target_dfils) {
    if (!(target > 0.0)) {
      throw std::invalid_argument("RunAudit: target dFILs must be positive");
    }
  }
  const int64_t d = samples.front().size();
  const SmoothMap base = BuildEncoderBase(config.encoder, d);
  const NoisyEncoder enc(base, config.encoder.sigma, config.seed);

  double dfil_min = std::numeric_limits<double>::infinity();
  double dfil_max = 0.0;
  double dfil_sum = 0.0;
  double trace_sum = 0.0;
  for (const Vector& x : samples) {
    const FisherReport report = ComputeFisherReport(enc, x);
    dfil_min = std::min(dfil_min, report.dfil);
    dfil_max = std::max(dfil_max, report.dfil);
    dfil_sum += report.dfil;
    trace_sum += report.fim_trace * enc.sigma() * enc.sigma();
  }
  const double n = static_cast<double>(samples.size());
  const double mean_dfil = dfil_sum / n;
  const double mean_trace = trace_sum / n;

  nlohmann::json report;
  report["d"] = d;
  report["n_samples"] = samples.size();
  report["encoder"] = {{"type", config.encoder.type},
                       {"sigma", config.encoder.sigma},
                       {"k", config.encoder.k},
                       {"seed", config.encoder.seed}};
  report["dfil"] = {{"min", dfil_min}, {"mean", mean_dfil}, {"max", dfil_max}};

  // Calibration on the mean Jacobian trace over the sample set; the
  // realized per-sample spread is what the dfil block above reports.
  nlohmann::json calibration = nlohmann::json::array();
  for (double target : config.target_dfils) {
    calibration.push_back(
        {{"target_dfil", target},
         {"sigma", std::sqrt(mean_trace / (static_cast<double>(d) * target))}});
  }
  report["calibration"] = calibration;

  const RegularityCheck reg =
      CheckRegularity(enc, samples.front(), config.regularity_samples);
  double max_abs_mean = 0.0;
  double max_abs_z = 0.0;
  for (Eigen::Index i = 0; i < reg.mean_score.size(); ++i) {
    max_abs_mean = std::max(max_abs_mean, std::abs(reg.mean_score[i]));
    if (reg.std_error[i] > 0.0) {
      max_abs_z =
          std::max(max_abs_z, std::abs(reg.mean_score[i]) / reg.std_error[i]);
    }
  }
  report["regularity"] = {{"n_samples", reg.n_samples},
                          {"max_abs_mean_score", max_abs_mean},
                          {"max_abs_z", max_abs_z}};

  nlohmann::json bounds = nlohmann::json::array();
  FisherReport mean_report;
  mean_report.d = d;
  mean_report.dfil = mean_dfil;
  mean_report.fim_trace = mean_dfil * static_cast<double>(d);
  mean_report.per_coordinate_diag = Vector::Zero(d);
  bounds.push_back(ToJson(CramerRaoBound(mean_report)));
  if (config.gaussian_tau > 0.0) {
    bounds.push_back(
        ToJson(VanTreesBound(mean_dfil, GaussianPriorInfo(config.gaussian_tau, d))));
  }
  report["bounds"] = bounds;
  return report;
}

AttackRunConfig AttackRunConfigFromJson(const nlohmann::json& j) {
  AttackRunConfig config;
  if (j.contains("encoder")) {
    config.encoder = EncoderSpecFromJson(j.at("encoder"));
  }
  config.d = j.value("d", config.d);
  config.tau = j.value("tau", config.tau);
  config.target_dfil = j.value("target_dfil", config.target_dfil);
  config.trials = j.value("trials", config.trials);
  config.max_iters = j.value("max_iters", config.max_iters);
  config.inversion_pairs = j.value("inversion_pairs", config.inversion_pairs);
  config.seed = j.value("seed", config.seed);
  if (j.contains("attacks")) {
    config.attacks = j.at("attacks").get<std::vector<std::string>>();
  }
  return config;
}

std::vector<std::string> RunAttackBenchmark(const AttackRunConfig& config) {
  if (!(config.tau > 0.0) || config.trials < 1) {
    throw std::invalid_argument("RunAttackBenchmark: bad tau or trials");
  }
  const int64_t d = config.d;
  const SmoothMap base = BuildEncoderBase(config.encoder, d);

  // Calibration set for both sigma selection and the reported mean dFIL.
  std::mt19937_64 cal_rng = MakeRng(MixSeed(config.seed, 0xca1));
  std::vector<Vector> calibration;
  for (int i = 0; i < 100; ++i) {
    calibration.push_back(config.tau * GaussianVector(d, cal_rng));
  }
  double sigma = config.encoder.sigma;
  if (config.target_dfil > 0.0) {
    double mean_trace = 0.0;
    for (const Vector& x : calibration) {
      mean_trace += base.JacobianSquaredNorm(x);
    }
    mean_trace /= static_cast<double>(calibration.size());
    if (mean_trace <= 0.0) {
      throw std::domain_error("RunAttackBenchmark: degenerate encoder");
    }
    sigma = std::sqrt(mean_trace /
                      (static_cast<double>(d) * config.target_dfil));
  }
  const NoisyEncoder enc(base, sigma, MixSeed(config.seed, 0xe2c));
  const double mean_dfil = MeanDfil(enc, calibration);
  const double one_over_dfil = mean_dfil > 0.0
                                   ? 1.0 / mean_dfil
                                   : std::numeric_limits<double>::quiet_NaN();

  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    return config.tau * GaussianVector(d, rng);
  };
  const Vector zero = Vector::Zero(d);
  OptConfig opt;
  opt.max_iters = config.max_iters;

  std::vector<std::string> lines;
  lines.emplace_back(AttackCsvHeader());
  for (const std::string& kind : config.attacks) {
    AttackFn attack;
    SmoothMap inversion = MakeIdentityMap(1);  // placeholder until trained
    if (kind == "unbiased-ls") {
      attack = [&, opt](const Vector& e, uint64_t) {
        return AttackUnbiased(enc, e, zero, opt).x;
      };
    } else if (kind == "map-gaussian") {
      attack = [&, opt](const Vector& e, uint64_t) {
        return AttackMapGaussian(enc, e, config.tau, zero, opt).x;
      };
    } else if (kind == "prior-mean") {
      attack = [zero](const Vector&, uint64_t) { return zero; };
    } else if (kind == "learned-inversion") {
      std::mt19937_64 pair_rng = MakeRng(MixSeed(config.seed, 0x9a12));
      std::vector<std::pair<Vector, Vector>> pairs;
      pairs.reserve(config.inversion_pairs);
      for (int64_t i = 0; i < config.inversion_pairs; ++i) {
        Vector x = config.tau * GaussianVector(d, pair_rng);
        Vector e = Encode(enc, x, MixSeed(config.seed, 0xa1b0 + i));
        pairs.emplace_back(std::move(x), std::move(e));
      }
      InversionConfig inv_config;
      inv_config.seed = MixSeed(config.seed, 0x1e7);
      inversion = AttackLearnedInversion(enc, pairs, inv_config);
      attack = [inversion](const Vector& e, uint64_t) {
        return inversion.Evaluate(e);
      };
    } else {
      throw std::invalid_argument("unknown attack kind '" + kind + "'");
    }
    const AttackReport report =
        EvaluateAttack(kind, attack, enc, sampler, config.trials,
                       MixSeed(config.seed, 0xe7a1));
    lines.push_back(AttackCsvRow(report, one_over_dfil));
  }
  return lines;
}

SplitsimConfig SplitsimConfigFromJson(const nlohmann::json& j) {
  SplitsimConfig config;
  if (j.contains("one_over_dfil_grid")) {
    config.one_over_dfil_grid =
        j.at("one_over_dfil_grid").get<std::vector<double>>();
  }
  config.d = j.value("d", config.d);
  config.num_classes = j.value("num_classes", config.num_classes);
  config.n_train = j.value("n_train", config.n_train);
  config.n_test = j.value("n_test", config.n_test);
  config.center_scale = j.value("center_scale", config.center_scale);
  config.hidden = j.value("hidden", config.hidden);
  config.compression_width =
      j.value("compression_width", config.compression_width);
  config.snr_lambda = j.value("snr_lambda", config.snr_lambda);
  config.epochs = j.value("epochs", config.epochs);
  config.step_size = j.value("step_size", config.step_size);
  config.batch_size = j.value("batch_size", config.batch_size);
  config.eval_repeats = j.value("eval_repeats", config.eval_repeats);
  config.seed = j.value("seed", config.seed);
  config.run_noopt = j.value("run_noopt", config.run_noopt);
  config.run_finetune = j.value("run_finetune", config.run_finetune);
  return config;
}

SplitsimResult RunSplitsim(const SplitsimConfig& config) {
  for (double g : config.one_over_dfil_grid) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("RunSplitsim: grid values must be positive");
    }
  }
  // One draw fixes the cluster centers; train/test split off the same task.
  Dataset all = MakeClusterDataset(config.d, config.num_classes,
                                   config.n_train + config.n_test,
                                   config.center_scale, MixSeed(config.seed, 1));
  Dataset train{{all.inputs.begin(), all.inputs.begin() + config.n_train},
                {all.labels.begin(), all.labels.begin() + config.n_train},
                config.num_classes};
  Dataset test{{all.inputs.begin() + config.n_train, all.inputs.end()},
               {all.labels.begin() + config.n_train, all.labels.end()},
               config.num_classes};

  SplitsimResult result;
  result.grid = config.one_over_dfil_grid;

  // Plain training, no noise anywhere: the baseline and the "no opt." model.
  // The near-infinite dFIL target only affects the per-epoch eval noise,
  // which is then negligible.
  TrainConfig plain;
  plain.target_dfil = 1e12;
  plain.noise_aware = false;
  plain.snr_lambda = 0.0;
  plain.epochs = config.epochs;
  plain.step_size = config.step_size;
  plain.batch_size = config.batch_size;
  plain.seed = MixSeed(config.seed, 0xbace);
  SplitModel plain_model =
      MakeSplitModel(config.d, config.num_classes, config.hidden, false,
                     config.compression_width, MixSeed(config.seed, 0x30de1));
  TrainResult plain_trained = TrainSplit(plain_model, train, test, plain);
  result.baseline_accuracy =
      EvaluateAccuracyNoiseless(plain_trained.model, test);

  if (config.run_noopt) {
    for (double g : config.one_over_dfil_grid) {
      const double acc =
          EvaluateAccuracy(plain_trained.model, test, 1.0 / g,
                           MixSeed(config.seed, 0x90), config.eval_repeats);
      result.noopt_accuracy.push_back(acc);
      result.rows.push_back(
          {config.epochs, "no-opt", g, acc,
           MeanSnr(plain_trained.model.client, train.inputs, 256)});
    }
  }

  for (size_t gi = 0; gi < config.one_over_dfil_grid.size(); ++gi) {
    const double g = config.one_over_dfil_grid[gi];
    TrainConfig opts;
    opts.target_dfil = 1.0 / g;
    opts.noise_aware = true;
    opts.schedule = NoiseSchedule::kBatchMean;
    opts.snr_lambda = config.snr_lambda;
    opts.epochs = config.epochs;
    opts.step_size = config.step_size;
    opts.batch_size = config.batch_size;
    opts.seed = MixSeed(config.seed, 0x0b75 + gi);
    SplitModel model =
        MakeSplitModel(config.d, config.num_classes, config.hidden, true,
                       config.compression_width, MixSeed(config.seed, 0x30de1));
    TrainResult trained = TrainSplit(model, train, test, opts);
    for (const EpochMetrics& em : trained.history) {
      result.rows.push_back(
          {em.epoch, "opts", g, em.test_accuracy, em.mean_snr_reg});
    }
    const double final_acc =
        EvaluateAccuracy(trained.model, test, 1.0 / g,
                         MixSeed(config.seed, 0xf1a1), config.eval_repeats);
    result.opts_accuracy.push_back(final_acc);
    result.rows.push_back(
        {config.epochs, "opts-final", g, final_acc,
         MeanSnr(trained.model.client, train.inputs, 256)});
  }

  if (config.run_finetune) {
    // Client pretrained on a disjoint cluster task, then frozen.
    Dataset pretrain =
        MakeClusterDataset(config.d, config.num_classes, config.n_train,
                           config.center_scale, MixSeed(config.seed, 2));
    TrainConfig pre;
    pre.target_dfil = 1.0 / config.one_over_dfil_grid.front();
    pre.noise_aware = true;
    pre.snr_lambda = config.snr_lambda;
    pre.epochs = config.epochs;
    pre.step_size = config.step_size;
    pre.batch_size = config.batch_size;
    pre.seed = MixSeed(config.seed, 0x94e);
    SplitModel pre_model =
        MakeSplitModel(config.d, config.num_classes, config.hidden, true,
                       config.compression_width, MixSeed(config.seed, 0x77));
    TrainResult pretrained = TrainSplit(pre_model, pretrain, pretrain, pre);
    const SmoothMap& frozen_client = pretrained.model.client;
    const uint64_t hash_before = ParameterHash(frozen_client);

    bool frozen = true;
    for (double g : config.one_over_dfil_grid) {
      HeadConfig head;
      head.hidden = config.hidden;
      head.epochs = config.epochs;
      head.step_size = config.step_size;
      head.batch_size = config.batch_size;
      head.seed = MixSeed(config.seed, 0xf17e);
      const FinetuneResult ft =
          FinetuneOnEncodings(frozen_client, train, test, 1.0 / g, head);
      frozen = frozen && ft.client_hash_before == hash_before &&
               ft.client_hash_after == hash_before;
      result.finetune_accuracy.push_back(ft.test_accuracy);
      result.rows.push_back({config.epochs, "finetune", g, ft.test_accuracy,
                             MeanSnr(frozen_client, train.inputs, 256)});
    }
    result.client_frozen = frozen;
  }
  return result;
}

void WriteSplitsimCsv(const std::string& path,
                      const std::vector<SplitsimRow>& rows) {
  std::vector<std::string> lines;
  lines.emplace_back(kSplitsimCsvHeader);
  for (const SplitsimRow& r : rows) {
    std::ostringstream line;
    line << r.epoch << ',' << r.split << ',' << FormatDouble(r.one_over_dfil)
         << ',' << FormatDouble(r.accuracy) << ','
         << FormatDouble(r.mean_snr_reg);
    lines.push_back(line.str());
  }
  WriteLines(path, lines);
}

ScoreFitConfig ScoreFitConfigFromJson(const nlohmann::json& j) {
  ScoreFitConfig config;
  config.model.steps = j.value("steps", config.model.steps);
  config.model.step_size = j.value("step_size", config.model.step_size);
  config.model.batch_size = j.value("batch_size", config.model.batch_size);
  config.model.seed = j.value("seed", config.model.seed);
  config.model.smoothing_sigma =
      j.value("smoothing_sigma", config.model.smoothing_sigma);
  config.holdout_fraction = j.value("holdout_fraction", config.holdout_fraction);
  config.split_seed = j.value("split_seed", config.split_seed);
  return config;
}

nlohmann::json RunScoreFit(const ScoreFitConfig& config,
                           const std::vector<Vector>& samples) {
  if (samples.size() < 10) {
    throw std::invalid_argument("RunScoreFit: need at least 10 samples");
  }
  if (!(config.holdout_fraction > 0.0) || config.holdout_fraction >= 1.0) {
    throw std::invalid_argument("RunScoreFit: holdout fraction in (0, 1)");
  }
  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng = MakeRng(config.split_seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n_holdout = std::max<size_t>(
      1, static_cast<size_t>(std::llround(config.holdout_fraction *
                                          static_cast<double>(samples.size()))));
  std::vector<Vector> heldout;
  std::vector<Vector> train;
  for (size_t i = 0; i < order.size(); ++i) {
    (i < n_holdout ? heldout : train).push_back(samples[order[i]]);
  }

  const ScoreModel model = FitScoreModel(train, config.model);
  const std::vector<Vector> heldout_smoothed = SmoothSamples(
      heldout, config.model.smoothing_sigma, MixSeed(config.split_seed, 5));
  const PriorFisherInfo info = EstimatedPriorInfo(model, heldout_smoothed);

  auto mean_of = [](const std::vector<double>& v, size_t begin, size_t end) {
    double total = 0.0;
    for (size_t i = begin; i < end; ++i) total += v[i];
    return end > begin ? total / static_cast<double>(end - begin) : 0.0;
  };
  const size_t window = std::min<size_t>(50, model.loss_history.size());
  nlohmann::json report;
  report["n_train"] = train.size();
  report["n_heldout"] = heldout.size();
  report["initial_loss"] = mean_of(model.loss_history, 0, window);
  report["final_loss"] =
      mean_of(model.loss_history, model.loss_history.size() - window,
              model.loss_history.size());
  report["prior"] = {{"trace_over_d", info.trace_over_d},
                     {"provenance", ToString(info.provenance)},
                     {"smoothing_sigma", info.smoothing_sigma},
                     {"advisory", IsAdvisory(info)},
                     {"low_smoothing_caveat", HasLowSmoothingCaveat(info)}};
  return report;
}

}  // namespace filaudit
