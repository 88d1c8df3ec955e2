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

#ifndef FILAUDIT_TRAIN_H_
#define FILAUDIT_TRAIN_H_

#include <map>
#include <string>

#include "filaudit/smooth_map.h"

namespace filaudit {

// Adam with bias correction. Moment buffers are keyed by parameter name and
// sized lazily on the first step.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);

  void Step(SmoothMap& map, const ParamGradients& grads);

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  int64_t t_ = 0;
  std::map<std::string, Vector> m_;
  std::map<std::string, Vector> v_;
};

LossValueGrad SquaredErrorLoss(const Vector& output, const Vector& target);

// Numerically stable -log softmax(logits)[label].
LossValueGrad SoftmaxCrossEntropyLoss(const Vector& logits, int label);

int Argmax(const Vector& v);

}  // namespace filaudit

#endif  // FILAUDIT_TRAIN_H_
