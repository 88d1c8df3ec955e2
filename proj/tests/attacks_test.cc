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

#include "gtest/gtest.h"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "filaudit/bounds.h"
#include "filaudit/rng.h"

namespace filaudit {
namespace {

Matrix RandomMatrix(int64_t rows, int64_t cols, uint64_t seed) {
  std::mt19937_64 rng = MakeRng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = GaussianVector(cols, rng);
  return m;
}

TEST(AttacksTest, UnbiasedRecoversNoiselessAffine) {
  const int64_t d = 6;
  const int64_t k = 10;
  const SmoothMap base = MakeRandomProjection(d, k, 3);
  const NoisyEncoder enc(base, 1e-9, 1);
  std::mt19937_64 rng = MakeRng(5);
  const Vector x = GaussianVector(d, rng);
  const Vector e = base.Evaluate(x);  // no noise added

  OptConfig opt;
  opt.max_iters = 2000;
  opt.grad_tol = 1e-13;
  const OptResult result = AttackUnbiased(enc, e, Vector::Zero(d), opt);
  EXPECT_TRUE(result.converged);
  EXPECT_LE((result.x - x).squaredNorm() / static_cast<double>(d), 1e-8);
}

TEST(AttacksTest, NoiselessTanhEncoderFixedPoint) {
  const SmoothMap base = MakeMlp(4, {8}, 6, Activation::kTanh, 7);
  const NoisyEncoder enc(base, 1e-9, 2);
  std::mt19937_64 rng = MakeRng(9);
  const Vector x = GaussianVector(4, rng);
  const Vector e = base.Evaluate(x);
  OptConfig opt;
  opt.max_iters = 50;
  const OptResult result = AttackUnbiased(enc, e, x, opt);
  // Zero residual at init: the optimizer must not move.
  EXPECT_LE((result.x - x).norm(), 1e-10);
  EXPECT_TRUE(result.converged);
}

TEST(AttacksTest, NonConvergenceIsFlaggedNotThrown) {
  const SmoothMap base = MakeRandomProjection(4, 8, 11);
  const NoisyEncoder enc(base, 0.5, 3);
  std::mt19937_64 rng = MakeRng(13);
  const Vector e = GaussianVector(8, rng);
  OptConfig opt;
  opt.max_iters = 1;
  opt.grad_tol = 1e-16;
  const OptResult result = AttackUnbiased(enc, e, Vector::Zero(4), opt);
  EXPECT_FALSE(result.converged);
  EXPECT_EQ(result.iters, 1);
  EXPECT_GT(result.x.size(), 0);
}

TEST(AttacksTest, MapGaussianMatchesConjugateClosedForm) {
  const int64_t d = 8;
  const int64_t k = 14;
  const double tau = 0.3;
  const double sigma = 0.7;
  const Matrix m = RandomMatrix(k, d, 17);
  const SmoothMap base = MakeAffineMap(m, Vector::Zero(k));
  const NoisyEncoder enc(base, sigma, 4);
  std::mt19937_64 rng = MakeRng(19);
  OptConfig opt;
  opt.max_iters = 5000;
  opt.grad_tol = 1e-13;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = tau * GaussianVector(d, rng);
    const Vector e = Encode(enc, x, trial);
    const Vector posterior_mean =
        (m.transpose() * m / (sigma * sigma) +
         Matrix::Identity(d, d) / (tau * tau))
            .ldlt()
            .solve(m.transpose() * e / (sigma * sigma));
    const OptResult result = AttackMapGaussian(enc, e, tau, Vector::Zero(d), opt);
    EXPECT_TRUE(result.converged);
    EXPECT_LE((result.x - posterior_mean).norm() / posterior_mean.norm(), 1e-6);
  }
}

TEST(AttacksTest, MapGaussianLimits) {
  const int64_t d = 4;
  const double tau = 0.5;
  const Matrix m = RandomMatrix(6, d, 23);
  const SmoothMap base = MakeAffineMap(m, Vector::Zero(6));
  std::mt19937_64 rng = MakeRng(29);
  const Vector x = tau * GaussianVector(d, rng);
  OptConfig opt;
  opt.max_iters = 4000;
  opt.grad_tol = 1e-13;

  // Huge noise: the prior dominates and the MAP estimate collapses to 0.
  const NoisyEncoder noisy(base, 1e6, 5);
  const Vector e_noisy = Encode(noisy, x, 0);
  const Vector map_noisy =
      AttackMapGaussian(noisy, e_noisy, tau, Vector::Zero(d), opt).x;
  EXPECT_LE(map_noisy.norm(), 1e-3);

  // Tiny noise: the likelihood dominates and MAP approaches the unbiased
  // solution.
  const NoisyEncoder crisp(base, 1e-6, 6);
  const Vector e_crisp = Encode(crisp, x, 0);
  const Vector map_crisp =
      AttackMapGaussian(crisp, e_crisp, tau, Vector::Zero(d), opt).x;
  const Vector unbiased =
      AttackUnbiased(crisp, e_crisp, Vector::Zero(d), opt).x;
  EXPECT_LE((map_crisp - unbiased).norm(), 1e-4 * (unbiased.norm() + 1.0));
}

TEST(AttacksTest, PriorMeanAttackMseEqualsPriorVariance) {
  const double tau = 0.05;
  const int64_t d = 8;
  const NoisyEncoder enc(MakeIdentityMap(d), 1.0, 7);
  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    return tau * GaussianVector(d, rng);
  };
  const Vector mean = Vector::Zero(d);
  const AttackFn attack = [&mean](const Vector&, uint64_t) {
    return AttackPriorMean(mean);
  };
  const AttackReport report =
      EvaluateAttack("prior-mean", attack, enc, sampler, 10000, 31);
  EXPECT_NEAR(report.mean_mse, tau * tau, 0.05 * tau * tau);

  // Changing the encoder noise cannot change a constant attack's MSE.
  const NoisyEncoder louder(MakeIdentityMap(d), 50.0, 7);
  const AttackReport same =
      EvaluateAttack("prior-mean", attack, louder, sampler, 10000, 31);
  EXPECT_EQ(same.mean_mse, report.mean_mse);
}

TEST(AttacksTest, PriorMeanOnPointMassIsExact) {
  const Vector point = Vector::Constant(3, 1.5);
  const NoisyEncoder enc(MakeIdentityMap(3), 1.0, 9);
  const AttackFn attack = [&point](const Vector&, uint64_t) { return point; };
  const PriorSampler sampler = [&point](std::mt19937_64&) { return point; };
  const AttackReport report =
      EvaluateAttack("prior-mean", attack, enc, sampler, 50, 37);
  EXPECT_EQ(report.mean_mse, 0.0);
}

TEST(AttacksTest, LearnedInversionOnIdentityEncoder) {
  const int64_t d = 4;
  const double tau = 0.3;
  const NoisyEncoder enc(MakeIdentityMap(d), 1e-3, 11);
  std::mt19937_64 rng = MakeRng(41);
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < 1200; ++i) {
    Vector x = tau * GaussianVector(d, rng);
    Vector e = Encode(enc, x, 1000 + i);
    pairs.emplace_back(std::move(x), std::move(e));
  }
  InversionConfig config;
  config.steps = 2500;
  config.step_size = 2e-3;
  config.seed = 5;
  const SmoothMap net = AttackLearnedInversion(enc, pairs, config);

  const PriorSampler sampler = [&](std::mt19937_64& r) -> Vector {
    return tau * GaussianVector(d, r);
  };
  const AttackFn attack = [&net](const Vector& e, uint64_t) {
    return net.Evaluate(e);
  };
  const AttackReport report =
      EvaluateAttack("learned-inversion", attack, enc, sampler, 500, 43);
  // Far below the prior-guessing level tau^2 = 0.09.
  EXPECT_LE(report.mean_mse, 0.01);
}

TEST(AttacksTest, LearnedInversionPlateausAtPriorVariance) {
  const int64_t d = 4;
  const double tau = 0.3;
  // Noise orders of magnitude above the signal: encodings are uninformative
  // and the best attainable MSE is the prior variance.
  const NoisyEncoder enc(MakeIdentityMap(d), 100.0, 13);
  std::mt19937_64 rng = MakeRng(47);
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < 1500; ++i) {
    Vector x = tau * GaussianVector(d, rng);
    Vector e = Encode(enc, x, 5000 + i);
    pairs.emplace_back(std::move(x), std::move(e));
  }
  InversionConfig config;
  config.steps = 1500;
  config.step_size = 1e-3;
  config.seed = 7;
  const SmoothMap net = AttackLearnedInversion(enc, pairs, config);
  const PriorSampler sampler = [&](std::mt19937_64& r) -> Vector {
    return tau * GaussianVector(d, r);
  };
  const AttackFn attack = [&net](const Vector& e, uint64_t) {
    return net.Evaluate(e);
  };
  const AttackReport report =
      EvaluateAttack("learned-inversion", attack, enc, sampler, 1000, 53);
  EXPECT_NEAR(report.mean_mse, tau * tau, 0.2 * tau * tau);

  // Bound validity for the untrained net as well.
  InversionConfig zero_steps = config;
  zero_steps.steps = 0;
  const SmoothMap untrained = AttackLearnedInversion(enc, pairs, zero_steps);
  const AttackFn raw = [&untrained](const Vector& e, uint64_t) {
    return untrained.Evaluate(e);
  };
  const AttackReport raw_report =
      EvaluateAttack("learned-inversion", raw, enc, sampler, 300, 59);
  const double dfil = ComputeFisherReport(enc, Vector::Zero(d)).dfil;
  const double bound = VanTreesBound(dfil, GaussianPriorInfo(tau, d)).value;
  EXPECT_GE(raw_report.mean_mse, bound);
}

TEST(AttacksTest, LearnedInversionNeedsEnoughPairs) {
  const NoisyEncoder enc(MakeIdentityMap(2), 1.0, 15);
  std::vector<std::pair<Vector, Vector>> few(
      99, {Vector::Zero(2), Vector::Zero(2)});
  EXPECT_THROW(AttackLearnedInversion(enc, few, InversionConfig{}),
               std::invalid_argument);
}

TEST(AttacksTest, EvaluateAttackDeterministicPerSeed) {
  const NoisyEncoder enc(MakeIdentityMap(3), 0.5, 17);
  const PriorSampler sampler = [](std::mt19937_64& rng) -> Vector {
    return GaussianVector(3, rng);
  };
  const AttackFn attack = [](const Vector& e, uint64_t) { return e; };
  const AttackReport a = EvaluateAttack("echo", attack, enc, sampler, 20, 61);
  const AttackReport b = EvaluateAttack("echo", attack, enc, sampler, 20, 61);
  ASSERT_EQ(a.per_sample_mse.size(), b.per_sample_mse.size());
  for (size_t i = 0; i < a.per_sample_mse.size(); ++i) {
    EXPECT_EQ(a.per_sample_mse[i], b.per_sample_mse[i]);
  }
  const AttackReport single =
      EvaluateAttack("echo", attack, enc, sampler, 1, 67);
  EXPECT_EQ(single.per_sample_mse.size(), 1u);
  EXPECT_THROW(EvaluateAttack("echo", attack, enc, sampler, 0, 1),
               std::invalid_argument);
}

TEST(AttacksTest, ReportMeanMatchesPerSampleMean) {
  const NoisyEncoder enc(MakeIdentityMap(2), 1.0, 19);
  const PriorSampler sampler = [](std::mt19937_64& rng) -> Vector {
    return GaussianVector(2, rng);
  };
  const AttackFn attack = [](const Vector&, uint64_t) {
    return Vector::Zero(2).eval();
  };
  const AttackReport report =
      EvaluateAttack("prior-mean", attack, enc, sampler, 97, 71);
  double mean = 0.0;
  for (double m : report.per_sample_mse) {
    EXPECT_GE(m, 0.0);
    mean += m;
  }
  mean /= static_cast<double>(report.per_sample_mse.size());
  EXPECT_NEAR(report.mean_mse, mean, 1e-12);
}

// CR equality holds for the least-squares attack when M^T M is proportional
// to the identity.
TEST(AttacksTest, UnbiasedAttackAttainsCramerRaoOnIsotropicEncoder) {
  const int64_t d = 6;
  const int64_t k = 12;
  const Matrix g = RandomMatrix(k, d, 73);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = Matrix(qr.householderQ()).leftCols(d);  // orthonormal cols
  const double c = 3.0;
  const SmoothMap base = MakeAffineMap(c * q, Vector::Zero(k));
  const double sigma = 0.8;
  const NoisyEncoder enc(base, sigma, 21);
  const double cr = CramerRaoBound(ComputeFisherReport(enc, Vector::Zero(d))).value;

  OptConfig opt;
  opt.max_iters = 500;
  opt.grad_tol = 1e-12;
  const double tau = 1.0;
  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    return tau * GaussianVector(d, rng);
  };
  const AttackFn attack = [&](const Vector& e, uint64_t) {
    return AttackUnbiased(enc, e, Vector::Zero(d), opt).x;
  };
  const AttackReport report =
      EvaluateAttack("unbiased-ls", attack, enc, sampler, 800, 79);
  EXPECT_GE(report.mean_mse, cr - 3.0 * report.StdErrOfMean());
  EXPECT_NEAR(report.mean_mse, cr, 0.05 * cr);
}

// Monte Carlo MSE of the MAP attack matches the posterior-covariance trace.
TEST(AttacksTest, MapAttackMseMatchesPosteriorCovarianceOracle) {
  const int64_t d = 8;
  const int64_t k = 16;
  const double tau = 0.4;
  const double sigma = 1.2;
  const Matrix m = RandomMatrix(k, d, 83);
  const SmoothMap base = MakeAffineMap(m, Vector::Zero(k));
  const NoisyEncoder enc(base, sigma, 23);
  const Matrix posterior_cov = (m.transpose() * m / (sigma * sigma) +
                                Matrix::Identity(d, d) / (tau * tau))
                                   .ldlt()
                                   .solve(Matrix::Identity(d, d));
  const double oracle = posterior_cov.trace() / static_cast<double>(d);

  OptConfig opt;
  opt.max_iters = 600;
  opt.grad_tol = 1e-12;
  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    return tau * GaussianVector(d, rng);
  };
  const AttackFn attack = [&](const Vector& e, uint64_t) {
    return AttackMapGaussian(enc, e, tau, Vector::Zero(d), opt).x;
  };
  const AttackReport report =
      EvaluateAttack("map-gaussian", attack, enc, sampler, 1000, 89);
  EXPECT_NEAR(report.mean_mse, oracle, 0.05 * oracle);
}

TEST(AttacksTest, MapAttackMseMonotoneInSigma) {
  const int64_t d = 5;
  const double tau = 0.5;
  const Matrix m = RandomMatrix(9, d, 97);
  const SmoothMap base = MakeAffineMap(m, Vector::Zero(9));
  const PriorSampler sampler = [&](std::mt19937_64& rng) -> Vector {
    return tau * GaussianVector(d, rng);
  };
  OptConfig opt;
  opt.max_iters = 800;
  opt.grad_tol = 1e-12;
  double previous = 0.0;
  bool first = true;
  for (double sigma : {0.05, 0.5, 5.0}) {
    const NoisyEncoder enc(base, sigma, 25);
    const AttackFn attack = [&](const Vector& e, uint64_t) {
      return AttackMapGaussian(enc, e, tau, Vector::Zero(d), opt).x;
    };
    const AttackReport report =
        EvaluateAttack("map-gaussian", attack, enc, sampler, 500, 101);
    if (!first) {
      EXPECT_GE(report.mean_mse, previous);
    }
    previous = report.mean_mse;
    first = false;
  }
}

TEST(AttacksTest, CsvRowFormat) {
  AttackReport report;
  report.attack_kind = "prior-mean";
  report.per_sample_mse = {1.0, 3.0};
  report.mean_mse = 2.0;
  report.n_trials = 2;
  EXPECT_EQ(AttackCsvHeader(), "attack_kind,one_over_dfil,mean_mse,stderr,n_trials");
  const std::string row = AttackCsvRow(report, 10.0);
  EXPECT_EQ(row.substr(0, row.find(',')), "prior-mean");
  EXPECT_NE(row.find(",10,2,"), std::string::npos);
}

}  // namespace
}  // namespace filaudit
