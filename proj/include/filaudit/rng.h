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

#ifndef FILAUDIT_RNG_H_
#define FILAUDIT_RNG_H_

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace filaudit {

// Derives an independent stream seed from a base seed. Uses splitmix64 so
// that consecutive stream indices give unrelated generator states; the same
// (seed, stream) pair always yields the same derived seed.
uint64_t MixSeed(uint64_t seed, uint64_t stream);

inline std::mt19937_64 MakeRng(uint64_t seed) { return std::mt19937_64(seed); }

// Vector of i.i.d. standard normal draws.
Eigen::VectorXd GaussianVector(Eigen::Index n, std::mt19937_64& rng);

}  // namespace filaudit

#endif  // FILAUDIT_RNG_H_
