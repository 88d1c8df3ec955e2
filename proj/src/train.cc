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

#include "filaudit/train.h"

#include <cmath>

namespace filaudit {

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void AdamOptimizer::Step(SmoothMap& map, const ParamGradients& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  map.ForEachParameter([&](const std::string& name, Eigen::Map<Vector> value) {
    auto it = grads.values.find(name);
    if (it == grads.values.end()) return;
    const Vector& g = it->second;
    Vector& m = m_.try_emplace(name, Vector::Zero(g.size())).first->second;
    Vector& v = v_.try_emplace(name, Vector::Zero(g.size())).first->second;
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v.array().matrix() + (1.0 - beta2_) * g.array().square().matrix();
    const Eigen::ArrayXd m_hat = m.array() / bc1;
    const Eigen::ArrayXd v_hat = v.array() / bc2;
    value.array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
  });
}

LossValueGrad SquaredErrorLoss(const Vector& output, const Vector& target) {
  const Vector diff = output - target;
  return {diff.squaredNorm(), 2.0 * diff};
}

LossValueGrad SoftmaxCrossEntropyLoss(const Vector& logits, int label) {
  const double max_logit = logits.maxCoeff();
  const Eigen::ArrayXd shifted = logits.array() - max_logit;
  const Eigen::ArrayXd exps = shifted.exp();
  const double sum = exps.sum();
  LossValueGrad out;
  out.value = std::log(sum) - shifted[label];
  out.grad = (exps / sum).matrix();
  out.grad[label] -= 1.0;
  return out;
}

int Argmax(const Vector& v) {
  Eigen::Index idx = 0;
  v.maxCoeff(&idx);
  return static_cast<int>(idx);
}

}  // namespace filaudit
