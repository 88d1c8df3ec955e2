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

#ifndef FILAUDIT_ATTACKS_H_
#define FILAUDIT_ATTACKS_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "filaudit/noisy_encoder.h"

namespace filaudit {

// Gradient descent budget for the optimization attacks. step_size <= 0
// selects an automatic step from a power-iteration estimate of the largest
// Hessian eigenvalue at the initialization.
struct OptConfig {
  int64_t max_iters = 500;
  double step_size = 0.0;
  double grad_tol = 1e-10;  // relative to the initial gradient norm
};

struct OptResult {
  Vector x;
  bool converged = false;
  int64_t iters = 0;
  double grad_norm = 0.0;
};

// argmin_x |e - base(x)|^2 from init. The objective uses the noiseless base
// map; for full-column-rank affine encoders the stationary point is the
// least-squares solution. Non-convergence is reported via the flag, never
// thrown.
OptResult AttackUnbiased(const NoisyEncoder& enc, const Vector& encoding,
                         const Vector& init, const OptConfig& config);

// MAP attack under a N(0, tau^2 I) prior: minimizes the exact negative log
// posterior |e - base(x)|^2 / (2 sigma^2) + |x|^2 / (2 tau^2).
OptResult AttackMapGaussian(const NoisyEncoder& enc, const Vector& encoding,
                            double tau, const Vector& init,
                            const OptConfig& config);

// The constant attack that ignores the encoding and outputs the prior mean.
Vector AttackPriorMean(const Vector& prior_mean);

struct InversionConfig {
  int64_t steps = 2000;
  double step_size = 1e-3;
  int64_t batch_size = 64;
  uint64_t seed = 0;
};

// Trains an inversion network (encoding -> input, 2 hidden layers of width
// 4d, tanh) with squared loss on (input, encoding) pairs. Requires at least
// 100 pairs.
SmoothMap AttackLearnedInversion(
    const NoisyEncoder& enc,
    const std::vector<std::pair<Vector, Vector>>& train_pairs,
    const InversionConfig& config);

struct AttackReport {
  std::string attack_kind;
  std::vector<double> per_sample_mse;
  double mean_mse = 0.0;
  int64_t n_trials = 0;
  uint64_t seed = 0;

  double StdErrOfMean() const;
};

using AttackFn = std::function<Vector(const Vector& encoding, uint64_t trial)>;
using PriorSampler = std::function<Vector(std::mt19937_64& rng)>;

// Draws x ~ prior, encodes with a per-trial stream, runs the attack, and
// records |x_hat - x|^2 / d per trial. Deterministic per seed.
AttackReport EvaluateAttack(const std::string& attack_kind,
                            const AttackFn& attack, const NoisyEncoder& enc,
                            const PriorSampler& prior, int64_t n_trials,
                            uint64_t seed);

// CSV surface: "attack_kind,one_over_dfil,mean_mse,stderr,n_trials".
std::string AttackCsvHeader();
std::string AttackCsvRow(const AttackReport& report, double one_over_dfil);

}  // namespace filaudit

#endif  // FILAUDIT_ATTACKS_H_
