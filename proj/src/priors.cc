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

#include "filaudit/priors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "filaudit/rng.h"
#include "filaudit/train.h"

namespace filaudit {

std::string ToString(PriorProvenance provenance) {
  switch (provenance) {
    case PriorProvenance::kAnalyticGaussian:
      return "analytic-gaussian";
    case PriorProvenance::kAnalyticMixture:
      return "analytic-mixture";
    case PriorProvenance::kScoreMatched:
      return "score-matched";
  }
  return "unknown";
}

PriorFisherInfo GaussianPriorInfo(double tau, int64_t d) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("GaussianPriorInfo: tau must be > 0");
  }
  (void)d;  // trace(J)/d = d * (1/tau^2) / d for every d
  return {1.0 / (tau * tau), PriorProvenance::kAnalyticGaussian, 0.0};
}

PriorFisherInfo MixturePriorInfo(const std::vector<double>& weights,
                                 const std::vector<Vector>& means, double tau,
                                 int64_t n_mc, uint64_t seed) {
  if (weights.empty() || means.empty()) {
    throw std::invalid_argument("MixturePriorInfo: empty mixture");
  }
  if (weights.size() != means.size()) {
    throw std::invalid_argument(
        "MixturePriorInfo: weights/means size mismatch");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("MixturePriorInfo: tau must be > 0");
  }
  if (n_mc < 1) {
    throw std::invalid_argument("MixturePriorInfo: n_mc must be >= 1");
  }
  const double weight_sum =
      std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("MixturePriorInfo: weights must sum to 1");
  }
  const int64_t d = means.front().size();
  for (const Vector& mu : means) {
    if (mu.size() != d) {
      throw std::invalid_argument("MixturePriorInfo: mean dimension mismatch");
    }
  }

  const double inv_var = 1.0 / (tau * tau);
  const size_t k = means.size();
  std::mt19937_64 rng = MakeRng(seed);
  std::discrete_distribution<size_t> component(weights.begin(), weights.end());

  // Mixture score via responsibilities, computed with log-sum-exp.
  std::vector<double> log_w(k);
  for (size_t i = 0; i < k; ++i) {
    log_w[i] = weights[i] > 0.0 ? std::log(weights[i])
                                : -std::numeric_limits<double>::infinity();
  }
  double total = 0.0;
  std::vector<double> logits(k);
  for (int64_t s = 0; s < n_mc; ++s) {
    const size_t c = component(rng);
    const Vector x = means[c] + tau * GaussianVector(d, rng);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < k; ++i) {
      logits[i] = log_w[i] - 0.5 * inv_var * (x - means[i]).squaredNorm();
      max_logit = std::max(max_logit, logits[i]);
    }
    double denom = 0.0;
    for (size_t i = 0; i < k; ++i) denom += std::exp(logits[i] - max_logit);
    Vector score = Vector::Zero(d);
    for (size_t i = 0; i < k; ++i) {
      const double resp = std::exp(logits[i] - max_logit) / denom;
      score += resp * inv_var * (means[i] - x);
    }
    total += score.squaredNorm();
  }
  return {total / (static_cast<double>(n_mc) * static_cast<double>(d)),
          PriorProvenance::kAnalyticMixture, 0.0};
}

std::vector<Vector> SmoothSamples(const std::vector<Vector>& data,
                                  double smoothing_sigma, uint64_t seed) {
  if (smoothing_sigma < 0.0) {
    throw std::invalid_argument("SmoothSamples: smoothing sigma must be >= 0");
  }
  if (smoothing_sigma == 0.0) return data;
  std::mt19937_64 rng = MakeRng(seed);
  std::vector<Vector> smoothed;
  smoothed.reserve(data.size());
  for (const Vector& x : data) {
    smoothed.push_back(x + smoothing_sigma * GaussianVector(x.size(), rng));
  }
  return smoothed;
}

SmoothMap InitScoreNet(int64_t d, uint64_t seed) {
  return MakeMlp(d, {4 * d, 4 * d}, d, Activation::kTanh, seed);
}

ScoreModel FitScoreModel(const std::vector<Vector>& data,
                         const ScoreModelConfig& config) {
  if (data.size() < 2) {
    throw std::invalid_argument("FitScoreModel: need at least 2 samples");
  }
  if (!(config.smoothing_sigma > 0.0)) {
    throw std::invalid_argument("FitScoreModel: smoothing sigma must be > 0");
  }
  if (config.batch_size < 1 || config.steps < 0) {
    throw std::invalid_argument("FitScoreModel: bad training config");
  }
  const int64_t d = data.front().size();

  ScoreModel model{InitScoreNet(d, config.seed), config, {}};
  AdamOptimizer opt(config.step_size);
  std::mt19937_64 rng = MakeRng(MixSeed(config.seed, 0xd5a));
  std::uniform_int_distribution<size_t> pick(0, data.size() - 1);
  const double inv_smooth = 1.0 / config.smoothing_sigma;

  std::vector<Vector> batch(config.batch_size);
  std::vector<Vector> targets(config.batch_size);
  for (int64_t step = 0; step < config.steps; ++step) {
    for (int64_t b = 0; b < config.batch_size; ++b) {
      const Vector& x = data[pick(rng)];
      const Vector eps = GaussianVector(d, rng);
      batch[b] = x + config.smoothing_sigma * eps;
      targets[b] = -inv_smooth * eps;
    }
    double loss = 0.0;
    ParamGradients grads = LossGradient(
        model.net, batch,
        [&targets](const Vector& out, size_t i) {
          return SquaredErrorLoss(out, targets[i]);
        },
        &loss);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("FitScoreModel: training loss diverged");
    }
    model.loss_history.push_back(loss);
    opt.Step(model.net, grads);
  }
  return model;
}

PriorFisherInfo EstimatedPriorInfo(const ScoreModel& model,
                                   const std::vector<Vector>& heldout) {
  if (heldout.empty()) {
    throw std::invalid_argument("EstimatedPriorInfo: empty held-out set");
  }
  const double d = static_cast<double>(model.net.input_dim());
  double total = 0.0;
  for (const Vector& x : heldout) {
    total += model.net.Evaluate(x).squaredNorm();
  }
  return {total / (static_cast<double>(heldout.size()) * d),
          PriorProvenance::kScoreMatched, model.config.smoothing_sigma};
}

}  // namespace filaudit
