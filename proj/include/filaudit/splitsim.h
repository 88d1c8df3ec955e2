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

#ifndef FILAUDIT_SPLITSIM_H_
#define FILAUDIT_SPLITSIM_H_

#include <cstdint>
#include <vector>

#include "filaudit/noisy_encoder.h"
#include "filaudit/smooth_map.h"

namespace filaudit {

// Client half (the encoder body, optionally ending in a compression affine)
// and server half (optional decompression affine plus the head).
struct SplitModel {
  SmoothMap client;
  SmoothMap server;
};

// Desk-scale architecture: a 4-layer tanh MLP over `hidden`-wide layers,
// split after layer 2. With compression, the client appends an affine map
// down to compression_width and the server prepends the matching
// decompression affine.
SplitModel MakeSplitModel(int64_t input_dim, int64_t num_classes,
                          int64_t hidden, bool use_compression,
                          int64_t compression_width, uint64_t seed);

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<int> labels;
  int num_classes = 0;
};

// Balanced Gaussian-cluster classification task: num_classes cluster centers
// drawn N(0, center_scale^2 I), unit within-cluster noise.
Dataset MakeClusterDataset(int64_t d, int num_classes, int64_t n,
                           double center_scale, uint64_t seed);

enum class NoiseSchedule {
  kBatchMean,   // fresh sigma per batch from the batch-mean Jacobian trace
  kPerSample,   // sigma calibrated per sample
  kFixed,       // constant sigma from the config
};

struct TrainConfig {
  double target_dfil = 1.0;
  bool noise_aware = false;
  NoiseSchedule schedule = NoiseSchedule::kBatchMean;
  double fixed_sigma = 0.0;  // used by NoiseSchedule::kFixed
  double snr_lambda = 0.0;
  int64_t epochs = 20;
  double step_size = 1e-3;
  int64_t batch_size = 32;
  uint64_t seed = 0;
};

struct EpochMetrics {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double mean_snr_reg = 0.0;
};

struct TrainResult {
  SplitModel model;
  std::vector<EpochMetrics> history;
};

// End-to-end training with noise injected at the split (when noise_aware)
// and loss += snr_lambda * snr_regularizer. Throws std::runtime_error on a
// non-finite loss.
TrainResult TrainSplit(SplitModel model, const Dataset& train,
                       const Dataset& test, const TrainConfig& config);

// Encodes x with per-sample calibrated noise for target_dfil, runs the
// server half, and returns the class scores. The realized dFIL (equal to
// the target by construction, reported honestly from the calibrated sigma)
// is written to realized_dfil when non-null.
Vector InferSplit(const SplitModel& model, const Vector& x, double target_dfil,
                  uint64_t seed, double* realized_dfil = nullptr);

// Accuracy under deployment noise, averaged over `repeats` encode draws.
double EvaluateAccuracy(const SplitModel& model, const Dataset& data,
                        double target_dfil, uint64_t seed, int64_t repeats);

// Accuracy of the noiseless client+server composition.
double EvaluateAccuracyNoiseless(const SplitModel& model, const Dataset& data);

// Mean SNR-regularizer value of the client over at most max_n samples.
double MeanSnr(const SmoothMap& client, const std::vector<Vector>& inputs,
               int64_t max_n);

struct HeadConfig {
  int64_t hidden = 32;
  int64_t epochs = 20;
  double step_size = 1e-3;
  int64_t batch_size = 32;
  uint64_t seed = 0;
};

struct FinetuneResult {
  SmoothMap head;
  double test_accuracy = 0.0;
  uint64_t client_hash_before = 0;
  uint64_t client_hash_after = 0;
};

// Trains a fresh head on encodings produced once by the frozen client at
// target_dfil (per-sample calibration, one noise draw per training point).
// The client is never mutated; the before/after hashes are returned so
// callers can verify the freeze.
FinetuneResult FinetuneOnEncodings(const SmoothMap& frozen_client,
                                   const Dataset& train, const Dataset& test,
                                   double target_dfil, const HeadConfig& config);

}  // namespace filaudit

#endif  // FILAUDIT_SPLITSIM_H_
