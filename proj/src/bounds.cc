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

#include "filaudit/bounds.h"

#include <cmath>
#include <stdexcept>

namespace filaudit {

std::string ToString(BoundKind kind) {
  switch (kind) {
    case BoundKind::kCramerRao:
      return "cramer-rao";
    case BoundKind::kVanTrees:
      return "van-trees";
    case BoundKind::kRdp:
      return "rdp";
  }
  return "unknown";
}

BoundReport CramerRaoBound(const FisherReport& report) {
  BoundReport out;
  out.kind = BoundKind::kCramerRao;
  out.inputs["dfil"] = report.dfil;
  out.inputs["d"] = static_cast<double>(report.d);
  if (report.dfil < 0.0) {
    throw std::invalid_argument("CramerRaoBound: negative dFIL");
  }
  if (report.dfil == 0.0) {
    out.unbounded = true;
    return out;
  }
  out.value = 1.0 / report.dfil;
  return out;
}

BoundReport VanTreesBound(double mean_dfil, const PriorFisherInfo& prior) {
  if (mean_dfil < 0.0 || prior.trace_over_d < 0.0) {
    throw std::invalid_argument("VanTreesBound: inputs must be nonnegative");
  }
  BoundReport out;
  out.kind = BoundKind::kVanTrees;
  out.inputs["mean_dfil"] = mean_dfil;
  out.inputs["prior_trace_over_d"] = prior.trace_over_d;
  out.inputs["prior_smoothing_sigma"] = prior.smoothing_sigma;
  const double denom = mean_dfil + prior.trace_over_d;
  if (denom == 0.0) {
    out.unbounded = true;
    return out;
  }
  out.value = 1.0 / denom;
  return out;
}

BoundReport RdpBound(double epsilon, const Vector& diameters) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("RdpBound: epsilon must be > 0");
  }
  if (diameters.size() == 0 || (diameters.array() < 0.0).any()) {
    throw std::invalid_argument("RdpBound: diameters must be nonnegative");
  }
  BoundReport out;
  out.kind = BoundKind::kRdp;
  const double d = static_cast<double>(diameters.size());
  const double sum_sq = diameters.squaredNorm();
  out.inputs["epsilon"] = epsilon;
  out.inputs["d"] = d;
  out.inputs["sum_diam_sq"] = sum_sq;
  out.value = (sum_sq / (4.0 * d)) / std::expm1(epsilon);
  return out;
}

NoisyEncoder RdpEncoder(const SmoothMap& base, double clip, double epsilon,
                        bool paper_sigma_formula, uint64_t rng_seed) {
  if (!(clip > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("RdpEncoder: clip and epsilon must be > 0");
  }
  std::vector<Layer> clip_layer;
  clip_layer.push_back(ScaleClipLayer{clip});
  SmoothMap clipped =
      base.ComposeWith(SmoothMap(base.output_dim(), std::move(clip_layer)));
  const double sigma = paper_sigma_formula
                           ? (2.0 * clip) * (2.0 * clip) / epsilon
                           : 2.0 * clip / std::sqrt(epsilon);
  return NoisyEncoder(std::move(clipped), sigma, rng_seed);
}

nlohmann::json ToJson(const BoundReport& report) {
  nlohmann::json j;
  j["kind"] = ToString(report.kind);
  j["unbounded"] = report.unbounded;
  if (report.unbounded) {
    j["value"] = nullptr;
  } else {
    j["value"] = report.value;
  }
  j["inputs"] = report.inputs;
  return j;
}

}  // namespace filaudit
