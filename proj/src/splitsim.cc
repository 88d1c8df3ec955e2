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

#include "filaudit/splitsim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "filaudit/rng.h"
#include "filaudit/train.h"

namespace filaudit {
namespace {

SmoothMap MakeTanhBlock(int64_t in, int64_t out, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix w(out, in);
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = std_dev * normal(rng);
  }
  std::vector<Layer> layers;
  layers.push_back(AffineLayer{std::move(w), Vector::Zero(out)});
  layers.push_back(TanhLayer{});
  return SmoothMap(in, std::move(layers));
}

SmoothMap MakeAffineBlock(int64_t in, int64_t out, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix w(out, in);
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = std_dev * normal(rng);
  }
  return MakeAffineMap(std::move(w), Vector::Zero(out));
}

}  // namespace

SplitModel MakeSplitModel(int64_t input_dim, int64_t num_classes,
                          int64_t hidden, bool use_compression,
                          int64_t compression_width, uint64_t seed) {
  std::mt19937_64 rng = MakeRng(seed);
  SmoothMap client =
      MakeTanhBlock(input_dim, hidden, rng).ComposeWith(MakeTanhBlock(hidden, hidden, rng));
  SmoothMap server =
      MakeTanhBlock(hidden, hidden, rng).ComposeWith(MakeAffineBlock(hidden, num_classes, rng));
  if (use_compression) {
    client = client.ComposeWith(MakeAffineBlock(hidden, compression_width, rng));
    server = MakeAffineBlock(compression_width, hidden, rng).ComposeWith(server);
  }
  return SplitModel{std::move(client), std::move(server)};
}

Dataset MakeClusterDataset(int64_t d, int num_classes, int64_t n,
                           double center_scale, uint64_t seed) {
  if (num_classes < 2 || n < num_classes) {
    throw std::invalid_argument("MakeClusterDataset: bad task size");
  }
  std::mt19937_64 rng = MakeRng(seed);
  std::vector<Vector> centers;
  centers.reserve(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    centers.push_back(center_scale * GaussianVector(d, rng));
  }
  Dataset data;
  data.num_classes = num_classes;
  data.inputs.reserve(n);
  data.labels.reserve(n);
  for (int64_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % num_classes);
    data.inputs.push_back(centers[label] + GaussianVector(d, rng));
    data.labels.push_back(label);
  }
  return data;
}

TrainResult TrainSplit(SplitModel model, const Dataset& train,
                       const Dataset& test, const TrainConfig& config) {
  if (train.inputs.empty() || train.inputs.size() != train.labels.size()) {
    throw std::invalid_argument("TrainSplit: bad training set");
  }
  if (config.batch_size < 1 || config.epochs < 0) {
    throw std::invalid_argument("TrainSplit: bad training config");
  }
  const int64_t d = model.client.input_dim();
  const int64_t n = static_cast<int64_t>(train.inputs.size());
  AdamOptimizer opt_client(config.step_size);
  AdamOptimizer opt_server(config.step_size);
  std::mt19937_64 rng = MakeRng(MixSeed(config.seed, 0x7ea1));
  std::normal_distribution<double> normal;

  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{std::move(model), {}};
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int64_t n_batches = 0;
    for (int64_t start = 0; start < n; start += config.batch_size) {
      const int64_t b_size = std::min(config.batch_size, n - start);
      std::vector<ForwardTrace> client_traces(b_size);
      std::vector<double> traces_sq(b_size, 0.0);
      for (int64_t b = 0; b < b_size; ++b) {
        const Vector& x = train.inputs[order[start + b]];
        client_traces[b] = result.model.client.ForwardWithTrace(x);
        if (config.noise_aware &&
            config.schedule != NoiseSchedule::kFixed) {
          traces_sq[b] = result.model.client.JacobianSquaredNorm(x);
        }
      }
      double batch_sigma = 0.0;
      if (config.noise_aware) {
        switch (config.schedule) {
          case NoiseSchedule::kBatchMean: {
            const double mean_trace =
                std::accumulate(traces_sq.begin(), traces_sq.end(), 0.0) /
                static_cast<double>(b_size);
            batch_sigma = std::sqrt(
                mean_trace / (static_cast<double>(d) * config.target_dfil));
            break;
          }
          case NoiseSchedule::kFixed:
            batch_sigma = config.fixed_sigma;
            break;
          case NoiseSchedule::kPerSample:
            break;  // handled per sample below
        }
      }

      ParamGradients client_grads;
      ParamGradients server_grads;
      double batch_loss = 0.0;
      for (int64_t b = 0; b < b_size; ++b) {
        const int64_t idx = order[start + b];
        Vector encoding = client_traces[b].output;
        if (config.noise_aware) {
          double sigma = batch_sigma;
          if (config.schedule == NoiseSchedule::kPerSample) {
            sigma = std::sqrt(traces_sq[b] /
                              (static_cast<double>(d) * config.target_dfil));
          }
          for (Eigen::Index i = 0; i < encoding.size(); ++i) {
            encoding[i] += sigma * normal(rng);
          }
        }
        ForwardTrace server_trace =
            result.model.server.ForwardWithTrace(encoding);
        LossValueGrad lv =
            SoftmaxCrossEntropyLoss(server_trace.output, train.labels[idx]);
        batch_loss += lv.value;
        const Vector encoding_cotangent =
            result.model.server.Backward(server_trace, lv.grad, &server_grads);
        result.model.client.Backward(client_traces[b], encoding_cotangent,
                                     &client_grads);
      }
      const double inv_b = 1.0 / static_cast<double>(b_size);
      client_grads.Scale(inv_b);
      server_grads.Scale(inv_b);
      if (config.snr_lambda > 0.0) {
        double snr_sum = 0.0;
        for (int64_t b = 0; b < b_size; ++b) {
          snr_sum += SnrRegularizerWithGradient(
              result.model.client, train.inputs[order[start + b]],
              config.snr_lambda * inv_b, &client_grads);
        }
        batch_loss += config.snr_lambda * snr_sum;
      }
      batch_loss *= inv_b;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("TrainSplit: training loss diverged");
      }
      epoch_loss += batch_loss;
      ++n_batches;
      opt_client.Step(result.model.client, client_grads);
      opt_server.Step(result.model.server, server_grads);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = epoch_loss / static_cast<double>(n_batches);
    metrics.test_accuracy =
        EvaluateAccuracy(result.model, test, config.target_dfil,
                         MixSeed(config.seed, 0xacc0 + epoch), 1);
    metrics.mean_snr_reg = MeanSnr(result.model.client, train.inputs, 256);
    result.history.push_back(metrics);
  }
  return result;
}

Vector InferSplit(const SplitModel& model, const Vector& x, double target_dfil,
                  uint64_t seed, double* realized_dfil) {
  const double sigma = CalibrateSigma(model.client, x, target_dfil);
  Vector encoding = model.client.Evaluate(x);
  std::mt19937_64 rng = MakeRng(seed);
  encoding += sigma * GaussianVector(encoding.size(), rng);
  if (realized_dfil != nullptr) {
    *realized_dfil =
        model.client.JacobianSquaredNorm(x) /
        (sigma * sigma * static_cast<double>(model.client.input_dim()));
  }
  return model.server.Evaluate(encoding);
}

double EvaluateAccuracy(const SplitModel& model, const Dataset& data,
                        double target_dfil, uint64_t seed, int64_t repeats) {
  if (data.inputs.empty()) {
    throw std::invalid_argument("EvaluateAccuracy: empty dataset");
  }
  repeats = std::max<int64_t>(repeats, 1);
  int64_t correct = 0;
  for (int64_t r = 0; r < repeats; ++r) {
    for (size_t i = 0; i < data.inputs.size(); ++i) {
      const Vector scores =
          InferSplit(model, data.inputs[i], target_dfil,
                     MixSeed(seed, r * data.inputs.size() + i), nullptr);
      if (Argmax(scores) == data.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) /
         static_cast<double>(repeats * data.inputs.size());
}

double EvaluateAccuracyNoiseless(const SplitModel& model, const Dataset& data) {
  if (data.inputs.empty()) {
    throw std::invalid_argument("EvaluateAccuracyNoiseless: empty dataset");
  }
  int64_t correct = 0;
  for (size_t i = 0; i < data.inputs.size(); ++i) {
    const Vector scores =
        model.server.Evaluate(model.client.Evaluate(data.inputs[i]));
    if (Argmax(scores) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.inputs.size());
}

double MeanSnr(const SmoothMap& client, const std::vector<Vector>& inputs,
               int64_t max_n) {
  const int64_t n =
      std::min<int64_t>(max_n, static_cast<int64_t>(inputs.size()));
  if (n < 1) {
    throw std::invalid_argument("MeanSnr: empty input set");
  }
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    total += SnrRegularizer(client, inputs[i]);
  }
  return total / static_cast<double>(n);
}

FinetuneResult FinetuneOnEncodings(const SmoothMap& frozen_client,
                                   const Dataset& train, const Dataset& test,
                                   double target_dfil,
                                   const HeadConfig& config) {
  if (train.inputs.empty()) {
    throw std::invalid_argument("FinetuneOnEncodings: empty training set");
  }
  FinetuneResult result{
      MakeMlp(frozen_client.output_dim(), {config.hidden}, train.num_classes,
              Activation::kTanh, MixSeed(config.seed, 0xead)),
      0.0, ParameterHash(frozen_client), 0};

  // Encodings are generated once, with per-sample calibration.
  std::vector<Vector> encoded;
  encoded.reserve(train.inputs.size());
  for (size_t i = 0; i < train.inputs.size(); ++i) {
    const double sigma =
        CalibrateSigma(frozen_client, train.inputs[i], target_dfil);
    Vector e = frozen_client.Evaluate(train.inputs[i]);
    std::mt19937_64 rng = MakeRng(MixSeed(config.seed, 0xe0c0 + i));
    e += sigma * GaussianVector(e.size(), rng);
    encoded.push_back(std::move(e));
  }

  AdamOptimizer opt(config.step_size);
  std::mt19937_64 rng = MakeRng(MixSeed(config.seed, 0x3a1));
  const int64_t n = static_cast<int64_t>(encoded.size());
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int64_t start = 0; start < n; start += config.batch_size) {
      const int64_t b_size = std::min(config.batch_size, n - start);
      std::vector<Vector> batch(b_size);
      std::vector<int> labels(b_size);
      for (int64_t b = 0; b < b_size; ++b) {
        batch[b] = encoded[order[start + b]];
        labels[b] = train.labels[order[start + b]];
      }
      double loss = 0.0;
      ParamGradients grads = LossGradient(
          result.head, batch,
          [&labels](const Vector& out, size_t i) {
            return SoftmaxCrossEntropyLoss(out, labels[i]);
          },
          &loss);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("FinetuneOnEncodings: training diverged");
      }
      opt.Step(result.head, grads);
    }
  }

  // Test-time encodings use the same target and fresh noise streams.
  int64_t correct = 0;
  for (size_t i = 0; i < test.inputs.size(); ++i) {
    const double sigma =
        CalibrateSigma(frozen_client, test.inputs[i], target_dfil);
    Vector e = frozen_client.Evaluate(test.inputs[i]);
    std::mt19937_64 sample_rng = MakeRng(MixSeed(config.seed, 0x7e57 + i));
    e += sigma * GaussianVector(e.size(), sample_rng);
    if (Argmax(result.head.Evaluate(e)) == test.labels[i]) ++correct;
  }
  result.test_accuracy =
      static_cast<double>(correct) / static_cast<double>(test.inputs.size());
  result.client_hash_after = ParameterHash(frozen_client);
  return result;
}

}  // namespace filaudit
