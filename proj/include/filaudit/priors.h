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

#ifndef FILAUDIT_PRIORS_H_
#define FILAUDIT_PRIORS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "filaudit/smooth_map.h"

namespace filaudit {

enum class PriorProvenance {
  kAnalyticGaussian,
  kAnalyticMixture,
  kScoreMatched,
};

std::string ToString(PriorProvenance provenance);

// trace(J(f_pi)) / d of the data distribution, with provenance and the
// randomized-smoothing level it was computed at (0 means none).
struct PriorFisherInfo {
  double trace_over_d = 0.0;
  PriorProvenance provenance = PriorProvenance::kAnalyticGaussian;
  double smoothing_sigma = 0.0;
};

// Score-matched values estimate the attacker's prior knowledge from samples
// and can underestimate it, so bounds built on them are advisory.
inline bool IsAdvisory(const PriorFisherInfo& info) {
  return info.provenance == PriorProvenance::kScoreMatched;
}

// Score matching is known to become unreliable at small smoothing levels;
// no quantitative criterion exists, so this is surfaced as a caveat only.
inline bool HasLowSmoothingCaveat(const PriorFisherInfo& info) {
  return IsAdvisory(info) && info.smoothing_sigma < 0.1;
}

// Isotropic Gaussian N(mu, tau^2 I): trace(J(f_pi))/d = 1/tau^2 exactly.
PriorFisherInfo GaussianPriorInfo(double tau, int64_t d);

// Gaussian mixture with common isotropic variance tau^2. Monte Carlo
// E|grad log f|^2 / d using the closed-form mixture score.
PriorFisherInfo MixturePriorInfo(const std::vector<double>& weights,
                                 const std::vector<Vector>& means, double tau,
                                 int64_t n_mc, uint64_t seed);

// Randomized smoothing: adds independent N(0, smoothing_sigma^2 I) to every
// sample; smoothing_sigma == 0 returns the data unchanged.
std::vector<Vector> SmoothSamples(const std::vector<Vector>& data,
                                  double smoothing_sigma, uint64_t seed);

struct ScoreModelConfig {
  int64_t steps = 3000;
  double step_size = 5e-3;
  int64_t batch_size = 128;
  uint64_t seed = 0;
  double smoothing_sigma = 0.25;
};

// Score network trained to estimate the score of the smoothed data density.
struct ScoreModel {
  SmoothMap net;
  ScoreModelConfig config;
  std::vector<double> loss_history;  // per-step denoising objective
};

// The network FitScoreModel starts from: d -> 4d -> 4d -> d, tanh.
SmoothMap InitScoreNet(int64_t d, uint64_t seed);

// Denoising score matching against the smoothed density: fresh noise eps per
// step, network target -eps/smoothing_sigma at x + smoothing_sigma * eps.
// Requires >= 2 samples and smoothing_sigma > 0; throws std::runtime_error
// if the training loss becomes non-finite.
ScoreModel FitScoreModel(const std::vector<Vector>& data,
                         const ScoreModelConfig& config);

// trace(J)/d estimated as the mean of |net(x)|^2 / d over held-out samples,
// which must already be smoothed at the model's smoothing level.
PriorFisherInfo EstimatedPriorInfo(const ScoreModel& model,
                                   const std::vector<Vector>& heldout);

}  // namespace filaudit

#endif  // FILAUDIT_PRIORS_H_
