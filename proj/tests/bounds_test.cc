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

#include "gtest/gtest.h"

#include "filaudit/attacks.h"
#include "filaudit/rng.h"

namespace filaudit {
namespace {

FisherReport ReportWithDfil(double dfil, int64_t d) {
  FisherReport report;
  report.d = d;
  report.dfil = dfil;
  report.fim_trace = dfil * static_cast<double>(d);
  report.per_coordinate_diag = Vector::Zero(d);
  return report;
}

TEST(BoundsTest, CramerRaoReciprocal) {
  EXPECT_NEAR(CramerRaoBound(ReportWithDfil(4.0, 4)).value, 0.25, 1e-15);
  EXPECT_NEAR(CramerRaoBound(ReportWithDfil(0.01, 4)).value, 100.0, 1e-12);
}

TEST(BoundsTest, CramerRaoIdentityEncoderSigmaTen) {
  // Identity base, sigma = 10: dFIL = 1/sigma^2 for every d.
  const NoisyEncoder enc(MakeIdentityMap(784), 10.0);
  const FisherReport report = ComputeFisherReport(enc, Vector::Zero(784));
  EXPECT_NEAR(CramerRaoBound(report).value, 100.0, 1e-9);
}

TEST(BoundsTest, CramerRaoUnboundedSentinel) {
  const BoundReport report = CramerRaoBound(ReportWithDfil(0.0, 4));
  EXPECT_TRUE(report.unbounded);
  const nlohmann::json j = ToJson(report);
  EXPECT_TRUE(j.at("value").is_null());
  EXPECT_TRUE(j.at("unbounded").get<bool>());
}

TEST(BoundsTest, VanTreesHandValues) {
  // dFIL = 0 with tau = 0.05: guessing the prior mean attains tau^2.
  EXPECT_NEAR(VanTreesBound(0.0, GaussianPriorInfo(0.05, 784)).value, 0.0025,
              1e-15);
  PriorFisherInfo prior400{400.0, PriorProvenance::kAnalyticGaussian, 0.0};
  EXPECT_NEAR(VanTreesBound(4.0, prior400).value, 1.0 / 404.0, 1e-15);
}

TEST(BoundsTest, VanTreesReducesToCramerRaoAtZeroPrior) {
  PriorFisherInfo no_prior{0.0, PriorProvenance::kAnalyticGaussian, 0.0};
  const double dfil = 2.5;
  EXPECT_EQ(VanTreesBound(dfil, no_prior).value,
            CramerRaoBound(ReportWithDfil(dfil, 8)).value);
}

TEST(BoundsTest, VanTreesUnboundedWhenNoInformation) {
  PriorFisherInfo no_prior{0.0, PriorProvenance::kAnalyticGaussian, 0.0};
  EXPECT_TRUE(VanTreesBound(0.0, no_prior).unbounded);
  EXPECT_THROW(VanTreesBound(-1.0, no_prior), std::invalid_argument);
}

TEST(BoundsTest, VanTreesMonotoneAndDominated) {
  std::mt19937_64 rng = MakeRng(3);
  std::uniform_real_distribution<double> uniform(0.01, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double dfil = uniform(rng);
    const double prior_info = uniform(rng);
    PriorFisherInfo prior{prior_info, PriorProvenance::kAnalyticGaussian, 0.0};
    const double value = VanTreesBound(dfil, prior).value;
    // Dominated by both denominator terms.
    EXPECT_LE(value, 1.0 / dfil + 1e-15);
    EXPECT_LE(value, 1.0 / prior_info + 1e-15);
    EXPECT_LE(value, CramerRaoBound(ReportWithDfil(dfil, 4)).value + 1e-15);
    // Monotone decreasing in both arguments.
    EXPECT_LE(VanTreesBound(dfil + 1.0, prior).value, value);
    PriorFisherInfo stronger = prior;
    stronger.trace_over_d += 1.0;
    EXPECT_LE(VanTreesBound(dfil, stronger).value, value);
  }
}

TEST(BoundsTest, RdpBoundHandValues) {
  // Unit diameters, eps = ln 2: (1/4) / (2 - 1) = 0.25.
  EXPECT_NEAR(RdpBound(std::log(2.0), Vector::Ones(5)).value, 0.25, 1e-12);
  // Independent of d under unit diameters.
  EXPECT_NEAR(RdpBound(std::log(2.0), Vector::Ones(3)).value,
              RdpBound(std::log(2.0), Vector::Ones(17)).value, 1e-15);
  // eps -> infinity drives the bound to zero.
  EXPECT_LT(RdpBound(500.0, Vector::Ones(3)).value, 1e-200);
  EXPECT_THROW(RdpBound(0.0, Vector::Ones(3)), std::invalid_argument);
  EXPECT_THROW(RdpBound(1.0, -Vector::Ones(3)), std::invalid_argument);
}

TEST(BoundsTest, RdpEncoderClipInactiveOnSmallEncodings) {
  const double clip = 5.0;
  const double eps = 1.0;
  const NoisyEncoder enc = RdpEncoder(MakeIdentityMap(3), clip, eps, false, 7);
  std::mt19937_64 rng = MakeRng(5);
  for (int i = 0; i < 10; ++i) {
    Vector x = GaussianVector(3, rng);
    x *= 0.5;  // stays well inside the clip ball
    const Vector mean = enc.base().Evaluate(x);
    EXPECT_LE((mean - x).norm(), 1e-12);
  }
}

// Worst-case Renyi divergence of order 2: analytic value from the Gaussian
// closed form D2 = |delta|^2 / sigma^2, plus a Monte-Carlo importance
// estimate from actual encoder outputs.
TEST(BoundsTest, RdpEncoderRenyiDivergenceRespectsEpsilon) {
  const double clip = 1.0;
  const double eps = std::log(2.0);
  const SmoothMap base = MakeDiagonalMap(Vector::Constant(2, 10.0));
  const NoisyEncoder enc = RdpEncoder(base, clip, eps, false, 11);

  Vector x1(2), x2(2);
  x1 << 5.0, 0.0;
  x2 << -5.0, 0.0;
  const Vector c1 = enc.base().Evaluate(x1);
  const Vector c2 = enc.base().Evaluate(x2);
  EXPECT_NEAR((c1 - c2).norm(), 2.0 * clip, 1e-12);

  const double sigma = enc.sigma();
  const double analytic = (c1 - c2).squaredNorm() / (sigma * sigma);
  EXPECT_LE(analytic, eps + 1e-12);

  // log E_Q[(P/Q)^2] via log-sum-exp over encodings of x2.
  const int64_t n = 200000;
  const double inv_var = 1.0 / (sigma * sigma);
  std::vector<double> exponents(n);
  double max_exp = -std::numeric_limits<double>::infinity();
  for (int64_t i = 0; i < n; ++i) {
    const Vector e = Encode(enc, x2, i);
    const double log_ratio =
        0.5 * inv_var * ((e - c2).squaredNorm() - (e - c1).squaredNorm());
    exponents[i] = 2.0 * log_ratio;
    max_exp = std::max(max_exp, exponents[i]);
  }
  double sum = 0.0;
  for (double v : exponents) sum += std::exp(v - max_exp);
  const double mc =
      max_exp + std::log(sum / static_cast<double>(n));
  EXPECT_NEAR(mc, analytic, 0.05 * analytic);
}

TEST(BoundsTest, RdpEncoderPaperFormulaVariant) {
  const double clip = 1.5;
  const double eps = 0.7;
  const NoisyEncoder standard = RdpEncoder(MakeIdentityMap(2), clip, eps);
  const NoisyEncoder paper = RdpEncoder(MakeIdentityMap(2), clip, eps, true);
  EXPECT_NEAR(standard.sigma(), 2.0 * clip / std::sqrt(eps), 1e-12);
  EXPECT_NEAR(paper.sigma(), (2.0 * clip) * (2.0 * clip) / eps, 1e-12);
  EXPECT_THROW(RdpEncoder(MakeIdentityMap(2), 0.0, eps), std::invalid_argument);
  EXPECT_THROW(RdpEncoder(MakeIdentityMap(2), clip, 0.0),
               std::invalid_argument);
}

// C = 1: the unbiased attack's empirical MSE sits above the RDP bound.
TEST(BoundsTest, UnbiasedAttackRespectsRdpBound) {
  const double clip = 1.0;
  const double eps = std::log(2.0);
  const int64_t d = 2;
  const NoisyEncoder enc = RdpEncoder(MakeIdentityMap(d), clip, eps, false, 13);
  const double bound = RdpBound(eps, Vector::Ones(d)).value;

  // Inputs from the unit cube, matching unit diameters.
  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = uniform(rng);
    return x;
  };
  OptConfig opt;
  opt.max_iters = 200;
  const AttackFn attack = [&](const Vector& e, uint64_t) {
    return AttackUnbiased(enc, e, Vector::Constant(d, 0.5), opt).x;
  };
  const AttackReport report =
      EvaluateAttack("unbiased-ls", attack, enc, sampler, 60, 17);
  EXPECT_GE(report.mean_mse, bound);
}

TEST(BoundsTest, JsonEchoesKindValueAndInputs) {
  const BoundReport report = VanTreesBound(4.0, GaussianPriorInfo(0.05, 10));
  const nlohmann::json j = ToJson(report);
  EXPECT_EQ(j.at("kind"), "van-trees");
  EXPECT_FALSE(j.at("unbounded").get<bool>());
  EXPECT_DOUBLE_EQ(j.at("value").get<double>(), report.value);
  EXPECT_DOUBLE_EQ(j.at("inputs").at("mean_dfil").get<double>(), 4.0);
  EXPECT_DOUBLE_EQ(j.at("inputs").at("prior_trace_over_d").get<double>(),
                   400.0);
}

}  // namespace
}  // namespace filaudit
