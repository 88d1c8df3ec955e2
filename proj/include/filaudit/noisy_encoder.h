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

#ifndef FILAUDIT_NOISY_ENCODER_H_
#define FILAUDIT_NOISY_ENCODER_H_

#include <cstdint>
#include <vector>

#include "filaudit/smooth_map.h"

namespace filaudit {

// A deterministic smooth encoder plus isotropic Gaussian output noise of
// scale sigma. The noise is what makes the encoding a randomized mechanism,
// so sigma must be strictly positive.
class NoisyEncoder {
 public:
  NoisyEncoder(SmoothMap base, double sigma, uint64_t rng_seed = 0);

  const SmoothMap& base() const { return base_; }
  SmoothMap& mutable_base() { return base_; }
  double sigma() const { return sigma_; }
  uint64_t rng_seed() const { return rng_seed_; }

  int64_t input_dim() const { return base_.input_dim(); }
  int64_t output_dim() const { return base_.output_dim(); }

 private:
  SmoothMap base_;
  double sigma_;
  uint64_t rng_seed_;
};

// base(x) + N(0, sigma^2 I). The noise stream is derived from
// (enc.rng_seed, stream) so parallel encodes stay reproducible; the
// zero-argument form always uses stream 0 and is therefore deterministic.
Vector Encode(const NoisyEncoder& enc, const Vector& x, uint64_t stream = 0);

// Per-input Fisher information summary for the Gaussian-noise encoder:
// FIM = J^T J / sigma^2 with J the base Jacobian at x.
struct FisherReport {
  double fim_trace = 0.0;
  int64_t d = 0;
  double dfil = 0.0;
  Vector per_coordinate_diag;  // diagonal of the FIM
};

FisherReport ComputeFisherReport(const NoisyEncoder& enc, const Vector& x);

// Monte Carlo estimate of trace(FIM) from sampled encodings, using the
// Gaussian score J^T (e - base(x)) / sigma^2. Converges to
// ComputeFisherReport(enc, x).fim_trace.
double EmpiricalFimTrace(const NoisyEncoder& enc, const Vector& x,
                         int64_t n_samples);

struct RegularityCheck {
  Vector mean_score;
  Vector std_error;  // per-coordinate standard error of the mean
  int64_t n_samples = 0;
};

// Monte Carlo E[score]; must be statistically indistinguishable from zero
// for any Gaussian-noise encoder.
RegularityCheck CheckRegularity(const NoisyEncoder& enc, const Vector& x,
                                int64_t n_samples);

// Noise scale that makes dFIL at x equal target_dfil:
// sigma = sqrt(trace(J^T J) / (d * target_dfil)).
// Throws std::domain_error when the Jacobian vanishes at x (the encoding
// carries no local information and no finite sigma can reach the target).
double CalibrateSigma(const SmoothMap& base, const Vector& x,
                      double target_dfil);

// trace(J^T J) / |base(x)|^2; the training penalty that maximizes encoding
// SNR for a fixed dFIL target. Throws std::domain_error on zero encodings.
double SnrRegularizer(const SmoothMap& base, const Vector& x);

// As above, also accumulating scale * d(value)/d(parameters) into grads.
double SnrRegularizerWithGradient(const SmoothMap& base, const Vector& x,
                                  double scale, ParamGradients* grads);

// Empirical mean of per-sample dFIL, the population quantity entering the
// van Trees bound.
double MeanDfil(const NoisyEncoder& enc, const std::vector<Vector>& samples);

}  // namespace filaudit

#endif  // FILAUDIT_NOISY_ENCODER_H_
