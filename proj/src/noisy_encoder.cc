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

#include "filaudit/noisy_encoder.h"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "filaudit/rng.h"

namespace filaudit {

NoisyEncoder::NoisyEncoder(SmoothMap base, double sigma, uint64_t rng_seed)
    : base_(std::move(base)), sigma_(sigma), rng_seed_(rng_seed) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument(
        "NoisyEncoder: sigma must be positive and finite");
  }
}

Vector Encode(const NoisyEncoder& enc, const Vector& x, uint64_t stream) {
  Vector e = enc.base().Evaluate(x);
  std::mt19937_64 rng = MakeRng(MixSeed(enc.rng_seed(), stream));
  e += enc.sigma() * GaussianVector(e.size(), rng);
  return e;
}

FisherReport ComputeFisherReport(const NoisyEncoder& enc, const Vector& x) {
  const Matrix j = enc.base().Jacobian(x);
  const double inv_var = 1.0 / (enc.sigma() * enc.sigma());
  FisherReport report;
  report.d = enc.input_dim();
  report.per_coordinate_diag = inv_var * j.colwise().squaredNorm().transpose();
  report.fim_trace = report.per_coordinate_diag.sum();
  report.dfil = report.fim_trace / static_cast<double>(report.d);
  return report;
}

double EmpiricalFimTrace(const NoisyEncoder& enc, const Vector& x,
                         int64_t n_samples) {
  if (n_samples < 1) {
    throw std::invalid_argument("EmpiricalFimTrace: n_samples must be >= 1");
  }
  // e = base(x) + sigma * xi, so the score is J^T xi / sigma; J is fixed
  // at x across samples.
  const Matrix jt = enc.base().Jacobian(x).transpose();
  const double inv_sigma = 1.0 / enc.sigma();
  std::mt19937_64 rng = MakeRng(MixSeed(enc.rng_seed(), 0x5c03e));
  double total = 0.0;
  for (int64_t i = 0; i < n_samples; ++i) {
    const Vector xi = GaussianVector(enc.output_dim(), rng);
    total += (inv_sigma * (jt * xi)).squaredNorm();
  }
  return total / static_cast<double>(n_samples);
}

RegularityCheck CheckRegularity(const NoisyEncoder& enc, const Vector& x,
                                int64_t n_samples) {
  if (n_samples < 1) {
    throw std::invalid_argument("CheckRegularity: n_samples must be >= 1");
  }
  const Matrix jt = enc.base().Jacobian(x).transpose();
  const double inv_sigma = 1.0 / enc.sigma();
  std::mt19937_64 rng = MakeRng(MixSeed(enc.rng_seed(), 0x4e9));
  Vector sum = Vector::Zero(enc.input_dim());
  Vector sum_sq = Vector::Zero(enc.input_dim());
  for (int64_t i = 0; i < n_samples; ++i) {
    const Vector score =
        inv_sigma * (jt * GaussianVector(enc.output_dim(), rng));
    sum += score;
    sum_sq += score.cwiseProduct(score);
  }
  const double n = static_cast<double>(n_samples);
  RegularityCheck check;
  check.n_samples = n_samples;
  check.mean_score = sum / n;
  const Vector variance =
      (sum_sq / n - check.mean_score.cwiseProduct(check.mean_score))
          .cwiseMax(0.0);
  check.std_error = (variance / n).cwiseSqrt();
  return check;
}

double CalibrateSigma(const SmoothMap& base, const Vector& x,
                      double target_dfil) {
  if (!(target_dfil > 0.0)) {
    throw std::invalid_argument("CalibrateSigma: target dFIL must be > 0");
  }
  const double trace = base.JacobianSquaredNorm(x);
  if (trace <= 0.0) {
    throw std::domain_error(
        "CalibrateSigma: encoder Jacobian vanishes at x; no finite sigma "
        "reaches the target dFIL");
  }
  return std::sqrt(trace / (static_cast<double>(base.input_dim()) * target_dfil));
}

double SnrRegularizer(const SmoothMap& base, const Vector& x) {
  const double norm_sq = base.Evaluate(x).squaredNorm();
  if (norm_sq <= 0.0) {
    throw std::domain_error("SnrRegularizer: encoding is zero at x");
  }
  return base.JacobianSquaredNorm(x) / norm_sq;
}

double SnrRegularizerWithGradient(const SmoothMap& base, const Vector& x,
                                  double scale, ParamGradients* grads) {
  if (grads == nullptr) return SnrRegularizer(base, x);
  ForwardTrace trace = base.ForwardWithTrace(x);
  const double norm_sq = trace.output.squaredNorm();
  if (norm_sq <= 0.0) {
    throw std::domain_error("SnrRegularizer: encoding is zero at x");
  }
  const double jac_norm_sq =
      base.JacobianSquaredNormWithGradient(x, scale / norm_sq, grads);
  // d(T/N)/dtheta = (1/N) dT - (T/N^2) dN, with dN from a plain reverse pass.
  const double n_scale = -scale * jac_norm_sq / (norm_sq * norm_sq);
  base.Backward(trace, 2.0 * n_scale * trace.output, grads);
  return jac_norm_sq / norm_sq;
}

double MeanDfil(const NoisyEncoder& enc, const std::vector<Vector>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("MeanDfil: empty sample set");
  }
  double total = 0.0;
  for (const Vector& x : samples) {
    total += ComputeFisherReport(enc, x).dfil;
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace filaudit
