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

#ifndef FILAUDIT_BOUNDS_H_
#define FILAUDIT_BOUNDS_H_

#include <map>
#include <string>

#include "json.hpp"

#include "filaudit/noisy_encoder.h"
#include "filaudit/priors.h"

namespace filaudit {

enum class BoundKind { kCramerRao, kVanTrees, kRdp };

std::string ToString(BoundKind kind);

// A lower bound on E[|x_hat - x|^2 / d] for some attack class. Unbounded
// cases (no information leaks at all) carry an explicit tag instead of a
// raw floating-point infinity.
struct BoundReport {
  BoundKind kind = BoundKind::kCramerRao;
  double value = 0.0;  // meaningful only when !unbounded
  bool unbounded = false;
  std::map<std::string, double> inputs;
};

// value = 1/dFIL; applies to unbiased attacks only.
BoundReport CramerRaoBound(const FisherReport& report);

// value = 1 / (mean_dfil + prior.trace_over_d); applies to arbitrary
// attacks. Reduces to the Cramér-Rao value at zero prior information and to
// the prior-guessing variance at zero dFIL.
BoundReport VanTreesBound(double mean_dfil, const PriorFisherInfo& prior);

// value = (sum_i diam_i^2 / 4d) / (e^eps - 1) for a (2, eps)-RDP encoder.
BoundReport RdpBound(double epsilon, const Vector& diameters);

// Wraps base with e -> e / max(1, |e|/clip) followed by Gaussian noise
// calibrated so the mechanism is (2, epsilon)-RDP. The default noise scale
// is sigma = 2*clip/sqrt(epsilon), from D2 = delta^2/sigma^2 with worst-case
// sensitivity delta = 2*clip. paper_sigma_formula switches to the verbatim
// sigma = (2*clip)^2/epsilon variant for comparison.
NoisyEncoder RdpEncoder(const SmoothMap& base, double clip, double epsilon,
                        bool paper_sigma_formula = false,
                        uint64_t rng_seed = 0);

nlohmann::json ToJson(const BoundReport& report);

}  // namespace filaudit

#endif  // FILAUDIT_BOUNDS_H_
