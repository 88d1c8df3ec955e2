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

#include "filaudit/attacks.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "filaudit/rng.h"
#include "filaudit/train.h"

namespace filaudit {
namespace {

// Largest eigenvalue of J^T J at x, by power iteration on the materialized
// Jacobian. Deterministic start vector.
double EstimateJtjSpectralNorm(const SmoothMap& map, const Vector& x) {
  const Matrix j = map.Jacobian(x);
  std::mt19937_64 rng = MakeRng(0x9e37);
  Vector v = GaussianVector(map.input_dim(), rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 40; ++it) {
    Vector w = j.transpose() * (j * v);
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

using GradientFn = std::function<Vector(const Vector& x)>;

OptResult DescentLoop(const Vector& init, const GradientFn& gradient,
                      double step, const OptConfig& config) {
  OptResult result;
  result.x = init;
  Vector g = gradient(result.x);
  const double initial_norm = g.norm();
  const double tol = config.grad_tol * std::max(1.0, initial_norm);
  for (int64_t t = 0; t < config.max_iters; ++t) {
    result.grad_norm = g.norm();
    if (result.grad_norm <= tol) {
      result.converged = true;
      result.iters = t;
      return result;
    }
    result.x -= step * g;
    g = gradient(result.x);
  }
  result.grad_norm = g.norm();
  result.iters = config.max_iters;
  result.converged = result.grad_norm <= tol;
  return result;
}

}  // namespace

OptResult AttackUnbiased(const NoisyEncoder& enc, const Vector& encoding,
                         const Vector& init, const OptConfig& config) {
  if (encoding.size() != enc.output_dim() || init.size() != enc.input_dim()) {
    throw std::invalid_argument("AttackUnbiased: dimension mismatch");
  }
  const SmoothMap& base = enc.base();
  double step = config.step_size;
  if (step <= 0.0) {
    const double lambda = EstimateJtjSpectralNorm(base, init);
    if (lambda <= 0.0) {
      throw std::domain_error("AttackUnbiased: flat objective at init");
    }
    // Objective |e - f(x)|^2 has Hessian ~ 2 J^T J near the optimum.
    step = 1.0 / (2.0 * lambda * 1.1);
  }
  auto gradient = [&](const Vector& x) -> Vector {
    ForwardTrace trace = base.ForwardWithTrace(x);
    return -2.0 * base.Backward(trace, encoding - trace.output, nullptr);
  };
  return DescentLoop(init, gradient, step, config);
}

OptResult AttackMapGaussian(const NoisyEncoder& enc, const Vector& encoding,
                            double tau, const Vector& init,
                            const OptConfig& config) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("AttackMapGaussian: tau must be > 0");
  }
  if (encoding.size() != enc.output_dim() || init.size() != enc.input_dim()) {
    throw std::invalid_argument("AttackMapGaussian: dimension mismatch");
  }
  const SmoothMap& base = enc.base();
  const double inv_noise_var = 1.0 / (enc.sigma() * enc.sigma());
  const double inv_prior_var = 1.0 / (tau * tau);
  double step = config.step_size;
  if (step <= 0.0) {
    const double lambda = EstimateJtjSpectralNorm(base, init);
    step = 1.0 / ((lambda * inv_noise_var + inv_prior_var) * 1.1);
  }
  auto gradient = [&](const Vector& x) -> Vector {
    ForwardTrace trace = base.ForwardWithTrace(x);
    return (-inv_noise_var *
            base.Backward(trace, encoding - trace.output, nullptr)) +
           inv_prior_var * x;
  };
  return DescentLoop(init, gradient, step, config);
}

Vector AttackPriorMean(const Vector& prior_mean) { return prior_mean; }

SmoothMap AttackLearnedInversion(
    const NoisyEncoder& enc,
    const std::vector<std::pair<Vector, Vector>>& train_pairs,
    const InversionConfig& config) {
  if (train_pairs.size() < 100) {
    throw std::invalid_argument(
        "AttackLearnedInversion: need at least 100 training pairs");
  }
  const int64_t d = enc.input_dim();
  SmoothMap net = MakeMlp(enc.output_dim(), {4 * d, 4 * d}, d,
                          Activation::kTanh, MixSeed(config.seed, 0x11e7));
  AdamOptimizer opt(config.step_size);
  std::mt19937_64 rng = MakeRng(MixSeed(config.seed, 0xba7c4));
  std::uniform_int_distribution<size_t> pick(0, train_pairs.size() - 1);
  std::vector<Vector> batch(config.batch_size);
  std::vector<const Vector*> targets(config.batch_size);
  for (int64_t step = 0; step < config.steps; ++step) {
    for (int64_t b = 0; b < config.batch_size; ++b) {
      const auto& [x, e] = train_pairs[pick(rng)];
      batch[b] = e;
      targets[b] = &x;
    }
    double loss = 0.0;
    ParamGradients grads = LossGradient(
        net, batch,
        [&targets](const Vector& out, size_t i) {
          return SquaredErrorLoss(out, *targets[i]);
        },
        &loss);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("AttackLearnedInversion: training diverged");
    }
    opt.Step(net, grads);
  }
  return net;
}

double AttackReport::StdErrOfMean() const {
  if (per_sample_mse.size() < 2) return 0.0;
  double var = 0.0;
  for (double m : per_sample_mse) {
    var += (m - mean_mse) * (m - mean_mse);
  }
  var /= static_cast<double>(per_sample_mse.size() - 1);
  return std::sqrt(var / static_cast<double>(per_sample_mse.size()));
}

AttackReport EvaluateAttack(const std::string& attack_kind,
                            const AttackFn& attack, const NoisyEncoder& enc,
                            const PriorSampler& prior, int64_t n_trials,
                            uint64_t seed) {
  if (n_trials < 1) {
    throw std::invalid_argument("EvaluateAttack: n_trials must be >= 1");
  }
  AttackReport report;
  report.attack_kind = attack_kind;
  report.n_trials = n_trials;
  report.seed = seed;
  report.per_sample_mse.reserve(n_trials);
  const double d = static_cast<double>(enc.input_dim());
  double total = 0.0;
  for (int64_t trial = 0; trial < n_trials; ++trial) {
    std::mt19937_64 rng = MakeRng(MixSeed(seed, 2 * trial));
    const Vector x = prior(rng);
    const Vector e = Encode(enc, x, MixSeed(seed, 2 * trial + 1));
    const Vector x_hat = attack(e, static_cast<uint64_t>(trial));
    const double mse = (x_hat - x).squaredNorm() / d;
    report.per_sample_mse.push_back(mse);
    total += mse;
  }
  report.mean_mse = total / static_cast<double>(n_trials);
  return report;
}

std::string AttackCsvHeader() {
  return "attack_kind,one_over_dfil,mean_mse,stderr,n_trials";
}

std::string AttackCsvRow(const AttackReport& report, double one_over_dfil) {
  std::ostringstream out;
  out.precision(12);
  out << report.attack_kind << ',' << one_over_dfil << ',' << report.mean_mse
      << ',' << report.StdErrOfMean() << ',' << report.n_trials;
  return out.str();
}

}  // namespace filaudit
