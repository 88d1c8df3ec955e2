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

#include "gtest/gtest.h"

#include <Eigen/QR>

#include "filaudit/rng.h"

namespace filaudit {
namespace {

TEST(NoisyEncoderTest, RequiresPositiveSigma) {
  EXPECT_THROW(NoisyEncoder(MakeIdentityMap(2), 0.0), std::invalid_argument);
  EXPECT_THROW(NoisyEncoder(MakeIdentityMap(2), -1.0), std::invalid_argument);
}

TEST(NoisyEncoderTest, VanishingNoiseRecoversBase) {
  const NoisyEncoder enc(MakeIdentityMap(2), 1e-12, 3);
  Vector x(2);
  x << 1, 2;
  const Vector e = Encode(enc, x);
  EXPECT_NEAR(e[0], 1.0, 1e-6);
  EXPECT_NEAR(e[1], 2.0, 1e-6);
}

TEST(NoisyEncoderTest, FixedSeedIsDeterministic) {
  const NoisyEncoder enc(MakeMlp(3, {5}, 4, Activation::kTanh, 9), 0.8, 42);
  std::mt19937_64 rng = MakeRng(1);
  const Vector x = GaussianVector(3, rng);
  const Vector first = Encode(enc, x);
  const Vector second = Encode(enc, x);
  for (Eigen::Index i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i], second[i]);
  }
  // Distinct streams give distinct noise.
  EXPECT_NE((Encode(enc, x, 1) - first).norm(), 0.0);
}

// Monte Carlo moment oracle: the empirical noise mean must sit within
// 3 sigma / sqrt(n) of zero per coordinate.
TEST(NoisyEncoderTest, NoiseMeanIsZero) {
  const double sigma = 0.7;
  const NoisyEncoder enc(MakeIdentityMap(3), sigma, 2024);
  Vector x(3);
  x << 0.5, -1.0, 2.0;
  const int64_t n = 100000;
  Vector mean = Vector::Zero(3);
  for (int64_t i = 0; i < n; ++i) {
    mean += Encode(enc, x, i) - x;
  }
  mean /= static_cast<double>(n);
  const double limit = 3.0 * sigma / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LE(std::abs(mean[i]), limit) << "coordinate " << i;
  }
}

TEST(NoisyEncoderTest, FisherReportIdentityBase) {
  const NoisyEncoder enc(MakeIdentityMap(4), 0.5);
  const FisherReport report = ComputeFisherReport(enc, Vector::Zero(4));
  EXPECT_NEAR(report.fim_trace, 16.0, 1e-12);
  EXPECT_NEAR(report.dfil, 4.0, 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(report.per_coordinate_diag[i], 4.0, 1e-12);
  }
  EXPECT_NEAR(1.0 / report.dfil, 0.25, 1e-12);
}

TEST(NoisyEncoderTest, FisherReportScaledAffine) {
  const NoisyEncoder enc(MakeDiagonalMap(Vector::Constant(4, 2.0)), 2.0);
  const FisherReport report = ComputeFisherReport(enc, Vector::Ones(4));
  // trace(M^T M) / (sigma^2 d) = 16 / (4 * 4) = 1.
  EXPECT_NEAR(report.dfil, 1.0, 1e-12);
  EXPECT_NEAR(report.fim_trace, 4.0, 1e-12);
}

TEST(NoisyEncoderTest, ReportInternalConsistency) {
  const NoisyEncoder enc(MakeMlp(5, {7}, 6, Activation::kGelu, 13), 0.3);
  std::mt19937_64 rng = MakeRng(7);
  const Vector x = GaussianVector(5, rng);
  const FisherReport report = ComputeFisherReport(enc, x);
  EXPECT_NEAR(report.fim_trace, report.per_coordinate_diag.sum(),
              1e-10 * report.fim_trace);
  EXPECT_NEAR(report.dfil * static_cast<double>(report.d), report.fim_trace,
              1e-12 * report.fim_trace);
}

TEST(NoisyEncoderTest, EmpiricalTraceIdentity) {
  const NoisyEncoder enc(MakeIdentityMap(2), 1.0, 77);
  const double trace = EmpiricalFimTrace(enc, Vector::Zero(2), 100000);
  EXPECT_NEAR(trace, 2.0, 0.05 * 2.0);
}

TEST(NoisyEncoderTest, EmpiricalTraceMatchesAnalytic) {
  const NoisyEncoder enc(MakeDiagonalMap(Vector::Constant(4, 2.0)), 2.0, 78);
  const Vector x = Vector::Ones(4);
  const double analytic = ComputeFisherReport(enc, x).fim_trace;
  const double mc = EmpiricalFimTrace(enc, x, 100000);
  EXPECT_NEAR(mc, analytic, 0.05 * analytic);
}

TEST(NoisyEncoderTest, SingleSampleTraceIsNonnegative) {
  const NoisyEncoder enc(MakeIdentityMap(3), 0.9, 5);
  EXPECT_GE(EmpiricalFimTrace(enc, Vector::Zero(3), 1), 0.0);
  EXPECT_THROW(EmpiricalFimTrace(enc, Vector::Zero(3), 0),
               std::invalid_argument);
}

TEST(NoisyEncoderTest, RegularityHoldsForGaussianNoise) {
  const NoisyEncoder enc(MakeMlp(4, {6}, 5, Activation::kTanh, 21), 0.6, 99);
  std::mt19937_64 rng = MakeRng(3);
  const RegularityCheck check =
      CheckRegularity(enc, GaussianVector(4, rng), 100000);
  for (Eigen::Index i = 0; i < check.mean_score.size(); ++i) {
    EXPECT_LE(std::abs(check.mean_score[i]), 4.0 * check.std_error[i])
        << "coordinate " << i;
  }
  EXPECT_THROW(CheckRegularity(enc, Vector::Zero(4), 0), std::invalid_argument);
}

TEST(NoisyEncoderTest, CalibrateSigmaHandValues) {
  // M = 2I, d = 4, target dFIL 1: sigma = sqrt(16 / 4) = 2.
  EXPECT_NEAR(CalibrateSigma(MakeDiagonalMap(Vector::Constant(4, 2.0)),
                             Vector::Zero(4), 1.0),
              2.0, 1e-12);
  // Identity: trace = d, so sigma = sqrt(1 / target).
  EXPECT_NEAR(CalibrateSigma(MakeIdentityMap(6), Vector::Zero(6), 4.0), 0.5,
              1e-12);
  EXPECT_NEAR(CalibrateSigma(MakeIdentityMap(784), Vector::Zero(784), 1e-2),
              10.0, 1e-9);
}

TEST(NoisyEncoderTest, CalibrateSigmaRejectsDegenerateEncoder) {
  const SmoothMap zero_map = MakeAffineMap(Matrix::Zero(3, 3), Vector::Zero(3));
  EXPECT_THROW(CalibrateSigma(zero_map, Vector::Ones(3), 1.0),
               std::domain_error);
  EXPECT_THROW(CalibrateSigma(MakeIdentityMap(3), Vector::Zero(3), 0.0),
               std::invalid_argument);
}

TEST(NoisyEncoderTest, CalibrationRoundTripsTarget) {
  const SmoothMap base = MakeRandomProjection(8, 20, 3);
  std::mt19937_64 rng = MakeRng(11);
  const Vector x = GaussianVector(8, rng);
  for (double target : {1e-3, 0.5, 12.0}) {
    const double sigma = CalibrateSigma(base, x, target);
    const NoisyEncoder enc(base, sigma);
    EXPECT_NEAR(ComputeFisherReport(enc, x).dfil, target, 1e-9 * target);
  }
}

TEST(NoisyEncoderTest, SnrRegularizerHandValues) {
  Vector x(4);
  x << 1, 0, 0, 0;
  // M = 2I: trace(M^T M) = 16, |e|^2 = 4.
  EXPECT_NEAR(SnrRegularizer(MakeDiagonalMap(Vector::Constant(4, 2.0)), x), 4.0,
              1e-12);
  // Identity on a unit vector: d / 1.
  EXPECT_NEAR(SnrRegularizer(MakeIdentityMap(4), x), 4.0, 1e-12);
}

TEST(NoisyEncoderTest, SnrRegularizerScaleInvariant) {
  std::mt19937_64 rng = MakeRng(19);
  const Vector x = GaussianVector(5, rng);
  const SmoothMap base = MakeRandomProjection(5, 9, 23);
  const double value = SnrRegularizer(base, x);
  for (double c : {0.1, 3.0, 40.0}) {
    Matrix w = c * base.Jacobian(x);
    const double scaled = SnrRegularizer(MakeAffineMap(w, Vector::Zero(9)), x);
    EXPECT_NEAR(scaled, value, 1e-10 * value);
  }
}

TEST(NoisyEncoderTest, SnrRegularizerRejectsZeroEncoding) {
  EXPECT_THROW(SnrRegularizer(MakeIdentityMap(3), Vector::Zero(3)),
               std::domain_error);
}

TEST(NoisyEncoderTest, SnrGradientMatchesFiniteDifferences) {
  SmoothMap client = MakeMlp(3, {5}, 4, Activation::kTanh, 31);
  std::mt19937_64 rng = MakeRng(37);
  const Vector x = GaussianVector(3, rng);
  ParamGradients grads;
  const double value = SnrRegularizerWithGradient(client, x, 1.0, &grads);
  EXPECT_NEAR(value, SnrRegularizer(client, x), 1e-12);

  const double h = 1e-6;
  client.ForEachParameter([&](const std::string& name,
                              Eigen::Map<Vector> value_map) {
    const Vector& grad = grads.values.at(name);
    for (Eigen::Index i = 0; i < value_map.size(); ++i) {
      const double saved = value_map[i];
      value_map[i] = saved + h;
      const double hi = SnrRegularizer(client, x);
      value_map[i] = saved - h;
      const double lo = SnrRegularizer(client, x);
      value_map[i] = saved;
      const double fd = (hi - lo) / (2.0 * h);
      EXPECT_LE(std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-6), 1e-3)
          << name << " entry " << i;
    }
  });
}

// Appending an orthogonal rotation after the base leaves J^T J, and hence
// dFIL, unchanged.
TEST(NoisyEncoderTest, DfilInvariantUnderOutputRotation) {
  std::mt19937_64 rng = MakeRng(41);
  const SmoothMap base = MakeMlp(4, {6}, 6, Activation::kTanh, 43);
  const Vector x = GaussianVector(4, rng);
  const double dfil = ComputeFisherReport(NoisyEncoder(base, 0.4), x).dfil;
  for (int trial = 0; trial < 3; ++trial) {
    Matrix g(6, 6);
    for (Eigen::Index r = 0; r < 6; ++r) g.row(r) = GaussianVector(6, rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    const SmoothMap rotated =
        base.ComposeWith(MakeAffineMap(q, Vector::Zero(6)));
    const double rotated_dfil =
        ComputeFisherReport(NoisyEncoder(rotated, 0.4), x).dfil;
    EXPECT_NEAR(rotated_dfil, dfil, 1e-8 * dfil);
  }
}

TEST(NoisyEncoderTest, MeanDfilAveragesPerSampleReports) {
  const NoisyEncoder enc(MakeMlp(3, {4}, 3, Activation::kGelu, 47), 0.5);
  std::mt19937_64 rng = MakeRng(53);
  std::vector<Vector> xs;
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    xs.push_back(GaussianVector(3, rng));
    expected += ComputeFisherReport(enc, xs.back()).dfil;
  }
  expected /= 5.0;
  EXPECT_NEAR(MeanDfil(enc, xs), expected, 1e-14);
  EXPECT_THROW(MeanDfil(enc, {}), std::invalid_argument);
}

}  // namespace
}  // namespace filaudit
