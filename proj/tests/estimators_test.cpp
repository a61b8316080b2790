// Copyright 2026 The IBU Authors.
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

#include "ibu/estimators.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ibu/analysis.hpp"
#include "ibu/error.hpp"
#include "ibu/harness.hpp"
#include "ibu/likelihood.hpp"
#include "oracles.hpp"

namespace ibu {
namespace {

const double kLn2 = std::log(2.0);

EmpiricalDistribution Counts(std::initializer_list<double> c) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double x : c) v[i++] = x;
  return EmpiricalDistribution::FromCounts(v);
}

Distribution RandomDistribution(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = e(gen);
  return MakeDistributionUnchecked(v);
}

Mechanism RandomMechanism(std::mt19937_64& gen, std::size_t inputs, std::size_t outputs) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(inputs), static_cast<Eigen::Index>(outputs));
  for (auto& x : a.reshaped()) x = unit(gen);
  for (Eigen::Index r = 0; r < a.rows(); ++r) a.row(r) /= a.row(r).sum();
  return Mechanism("random", a);
}

TEST(EmEstimateTest, BoundaryMleFromUniform) {
  const Mechanism a("A'", ThreeRrExample());
  EmConfig cfg;
  cfg.delta = 1e-14;
  const EmTrace trace = EmEstimate(GroupedG(a, Counts({1, 2, 1})), cfg);
  EXPECT_TRUE(trace.converged);
  EXPECT_LE(TotalVariation(trace.estimate, Distribution::PointMass(3, 1)), 1e-4);
}

TEST(EmEstimateTest, IdentityRecoversEmpiricalInOneStep) {
  const auto q = Counts({2, 5, 0, 3});
  const EmConfig cfg{1e-10, 1, std::nullopt};
  const EmTrace trace = EmEstimate(GroupedG(IdentityMechanism(4), q), cfg);
  EXPECT_LE((trace.estimate.weights() - q.frequencies()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EmEstimateTest, TraceIsNonDecreasing) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Mechanism m = RandomMechanism(gen, 5, 7);
    const auto q = Counts({3, 1, 0, 4, 9, 2, 1});
    const EmTrace trace = EmEstimate(GroupedG(m, q));
    ASSERT_GE(trace.log_likelihoods.size(), 2u);
    EXPECT_EQ(trace.log_likelihoods.size(), trace.iterations + 1);
    for (std::size_t t = 1; t < trace.log_likelihoods.size(); ++t) {
      EXPECT_GE(trace.log_likelihoods[t], trace.log_likelihoods[t - 1] - 1e-9);
    }
  }
}

TEST(EmEstimateTest, IterationCapReportsNotConverged) {
  const Mechanism a("A'", ThreeRrExample());
  const EmTrace trace = EmEstimate(GroupedG(a, Counts({1, 2, 1})), {1e-10, 3, std::nullopt});
  EXPECT_EQ(trace.iterations, 3u);
  EXPECT_FALSE(trace.converged);
}

TEST(EmEstimateTest, RejectsBadStarts) {
  const auto g = GroupedG(KRandomizedResponse(3, 1.0), Counts({1, 1, 1}));
  EXPECT_THROW(EmEstimate(g, {1e-10, 10, Distribution::PointMass(3, 0)}), Error);
  EXPECT_THROW(EmEstimate(g, {1e-10, 10, Distribution::Uniform(4)}), Error);
  EXPECT_THROW(EmEstimate(g, {0.0, 10, std::nullopt}), Error);
}

TEST(EmEstimateTest, TraceCsvHasOneRowPerIterate) {
  const EmTrace trace = EmEstimate(GroupedG(KRandomizedResponse(3, 1.0), Counts({1, 2, 3})));
  std::ostringstream out;
  WriteTraceCsv(out, trace);
  const std::string text = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), trace.iterations + 2);
}

TEST(IbuStepTest, ThreeRrFromUniform) {
  const Mechanism a("A'", ThreeRrExample());
  const auto next = IbuStep(Distribution::Uniform(3), a, Counts({1, 2, 1}));
  EXPECT_NEAR(next[0], 5.0 / 16, 1e-15);
  EXPECT_NEAR(next[1], 3.0 / 8, 1e-15);
  EXPECT_NEAR(next[2], 5.0 / 16, 1e-15);
}

TEST(IbuStepTest, FixedPointsOfNonInvertibleMechanism) {
  const Mechanism a("A", NonInvertibleExample());
  const auto q = Counts({1, 1, 1});
  for (double t : {0.0, 0.1, 0.25, 0.4, 0.5}) {
    const auto theta = Distribution::FromWeights(std::vector<double>{t, 1 - 2 * t, t});
    const auto next = IbuStep(theta, a, q);
    EXPECT_LE((next.weights() - theta.weights()).cwiseAbs().maxCoeff(), 1e-12) << t;
  }
}

TEST(IbuStepTest, IdentityReturnsEmpirical) {
  const auto q = Counts({1, 0, 3});
  const auto next = IbuStep(Distribution::Uniform(3), IdentityMechanism(3), q);
  EXPECT_LE((next.weights() - q.frequencies()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(IbuStepTest, MatchesEmStepOnGroupedG) {
  std::mt19937_64 gen(33);
  std::uniform_int_distribution<int> count(0, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const Mechanism m = RandomMechanism(gen, 4, 6);
    Eigen::VectorXd c(6);
    for (auto& x : c) x = count(gen);
    c[0] += 1;
    const auto q = EmpiricalDistribution::FromCounts(c);
    const auto theta = RandomDistribution(gen, 4);
    const auto ibu = IbuStep(theta, m, q);
    const auto em = EmStep(theta, GroupedG(m, q));
    EXPECT_LE((ibu.weights() - em.weights()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HeterogeneousStepTest, TwoUsersTwoMechanisms) {
  const Mechanism a = KRandomizedResponse(3, kLn2);
  const Mechanism id = IdentityMechanism(3);
  const std::vector<UserReport> reports{{0, &a}, {1, &id}};
  const auto next = HeterogeneousStep(Distribution::Uniform(3), reports);
  EXPECT_NEAR(next[0], 0.25, 1e-15);
  EXPECT_NEAR(next[1], 0.625, 1e-15);
  EXPECT_NEAR(next[2], 0.125, 1e-15);
}

TEST(HeterogeneousStepTest, SharedMechanismEqualsIbu) {
  std::mt19937_64 gen(8);
  const Mechanism m = RandomMechanism(gen, 3, 4);
  const std::vector<std::size_t> obs{0, 3, 3, 1, 2, 2, 2};
  std::vector<UserReport> reports;
  for (std::size_t z : obs) reports.push_back({z, &m});
  const auto theta = RandomDistribution(gen, 3);
  const auto het = HeterogeneousStep(theta, reports);
  const auto ibu = IbuStep(theta, m, EmpiricalDistribution::FromObservations(obs, 4));
  EXPECT_LE((het.weights() - ibu.weights()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HeterogeneousStepTest, MatchesEmStepOnPerUserColumns) {
  std::mt19937_64 gen(9);
  const Mechanism m1 = RandomMechanism(gen, 3, 3), m2 = RandomMechanism(gen, 3, 5);
  const std::vector<UserReport> reports{{0, &m1}, {4, &m2}, {2, &m1}, {1, &m2}};
  Eigen::MatrixXd g(3, 4);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    g.col(static_cast<Eigen::Index>(i)) = reports[i].mechanism->probs().col(static_cast<Eigen::Index>(reports[i].observable));
  }
  const auto theta = RandomDistribution(gen, 3);
  const auto het = HeterogeneousStep(theta, reports);
  const auto em = EmStep(theta, OutputsProbabilityMatrix(g));
  EXPECT_LE((het.weights() - em.weights()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SingleInputMleTest, Sets) {
  EXPECT_EQ(SingleInputMleSet(Eigen::Vector3d(0.5, 0.25, 0.25)), std::vector<std::size_t>{0});
  EXPECT_EQ(SingleInputMleSet(Eigen::Vector3d(1.0 / 8, 1.0 / 8, 1.0 / 16)), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(SingleInputMleSet(Eigen::Vector3d(0, 0, 1)), std::vector<std::size_t>{2});
  EXPECT_THROW(SingleInputMleSet(Eigen::Vector3d::Zero()), Error);
}

TEST(SingleInputMleTest, KlForm) {
  const Mechanism a = KRandomizedResponse(3, kLn2);
  EXPECT_EQ(SingleInputMleKl(EmpiricalDistribution::FromFrequencies(Eigen::Vector3d(0.25, 0.5, 0.25)), a),
            std::vector<std::size_t>{1});
  // Row 1 of the non-invertible matrix is uniform, so its divergence is 0.
  const Mechanism b("A", NonInvertibleExample());
  EXPECT_EQ(SingleInputMleKl(Counts({1, 1, 1}), b), std::vector<std::size_t>{1});
}

TEST(SingleInputMleTest, KlAgreesWithProductForm) {
  std::mt19937_64 gen(44);
  std::uniform_int_distribution<int> k_dist(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const Mechanism m = RandomMechanism(gen, 4, 5);
    const int k = k_dist(gen);
    std::uniform_int_distribution<std::size_t> out(0, 4);
    std::vector<std::size_t> obs(static_cast<std::size_t>(k));
    for (auto& z : obs) z = out(gen);
    Eigen::VectorXd column = Eigen::VectorXd::Ones(4);
    for (std::size_t z : obs) column = column.cwiseProduct(m.probs().col(static_cast<Eigen::Index>(z)));
    EXPECT_EQ(SingleInputMleSet(column), SingleInputMleKl(EmpiricalDistribution::FromObservations(obs, 5), m))
        << "trial " << trial;
  }
}

TEST(InvTest, ThreeRrRecoversPointMass) {
  const Mechanism a("A'", ThreeRrExample());
  const auto q = EmpiricalDistribution::FromFrequencies(Eigen::Vector3d(0.25, 0.5, 0.25));
  for (InvMode mode : {InvMode::kTruncateNormalize, InvMode::kProject}) {
    const auto est = InvEstimate(q, a, mode);
    EXPECT_LE((est.weights() - Eigen::Vector3d(0, 1, 0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InvTest, NegativeComponents) {
  const Mechanism a("A'", ThreeRrExample());
  const auto q = EmpiricalDistribution::FromFrequencies(Eigen::Vector3d(1, 0, 0));
  // The inverse of 3-RR(ln 2) is 4I - J.
  const Eigen::Matrix3d inverse = 4 * Eigen::Matrix3d::Identity() - Eigen::Matrix3d::Ones();
  const Eigen::Vector3d expected = (Eigen::RowVector3d(1, 0, 0) * inverse).transpose();
  EXPECT_LE((InvertEmpirical(q, a) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((expected - Eigen::Vector3d(3, -1, -1)).cwiseAbs().maxCoeff(), 1e-15);
  for (InvMode mode : {InvMode::kTruncateNormalize, InvMode::kProject}) {
    EXPECT_LE((InvEstimate(q, a, mode).weights() - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InvTest, IdentityReturnsEmpirical) {
  const auto q = Counts({1, 2, 0, 5});
  for (InvMode mode : {InvMode::kTruncateNormalize, InvMode::kProject}) {
    EXPECT_LE((InvEstimate(q, IdentityMechanism(4), mode).weights() - q.frequencies()).cwiseAbs().maxCoeff(),
              1e-15);
  }
}

TEST(InvTest, SingularAndNonSquareAreRejected) {
  try {
    InvEstimate(Counts({1, 1, 1}), Mechanism("A", NonInvertibleExample()), InvMode::kProject);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotInvertible);
  }
  Eigen::MatrixXd wide(2, 3);
  wide << 0.5, 0.25, 0.25, 0.25, 0.25, 0.5;
  EXPECT_THROW(InvEstimate(Counts({1, 1, 1}), Mechanism("wide", wide), InvMode::kProject), Error);
}

TEST(RapporInvTest, NoiselessOneHot) {
  const std::vector<BitVector> obs(50, BitVector::OneHot(5, 3));
  const auto est = RapporInvEstimate(obs, 80.0, InvMode::kProject);
  EXPECT_NEAR(est[3], 1.0, 1e-12);
}

TEST(RapporInvTest, PureNoiseFrequencies) {
  const RapporModel model(4, 1.0);
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(4, model.flip_probability());
  EXPECT_THROW(RapporInvFromBitFrequencies(f, 1.0, InvMode::kTruncateNormalize), Error);
  const auto p = RapporInvFromBitFrequencies(f, 1.0, InvMode::kProject);
  EXPECT_LE((p.weights().array() - 0.25).abs().maxCoeff(), 1e-12);
}

TEST(RapporInvTest, DebiasingIsExactOnExpectedFrequencies) {
  const RapporModel model(5, 1.7);
  const Eigen::VectorXd theta = (Eigen::VectorXd(5) << 0.1, 0.3, 0.0, 0.4, 0.2).finished();
  const Eigen::VectorXd f =
      theta * model.keep_probability() + (1.0 - theta.array()).matrix() * model.flip_probability();
  const auto p = RapporInvFromBitFrequencies(f, 1.7, InvMode::kTruncateNormalize);
  EXPECT_LE((p.weights() - theta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EmpiricalStartTest, NeedsFullSupport) {
  EXPECT_THROW(EmpiricalStart(Counts({1, 0, 1}), 3), Error);
  EXPECT_THROW(EmpiricalStart(Counts({1, 1}), 3), Error);
  EXPECT_NEAR(EmpiricalStart(Counts({1, 3}), 2)[1], 0.75, 1e-15);
}

// The M step maximizes Q(. | theta_t); compare against a lattice search.
TEST(MStepTest, BeatsGridSearchOnQ) {
  std::mt19937_64 gen(55);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd gm(3, 4);
    for (auto& x : gm.reshaped()) x = unit(gen);
    const OutputsProbabilityMatrix g(gm);
    const auto prev = RandomDistribution(gen, 3);
    const auto next = EmStep(prev, g);
    const Eigen::VectorXd psi = ExpectedCounts(prev, g);
    const double grid = testing::GridMax3(
        [&](const Eigen::Vector3d& t) { return (psi.array() * t.array().log()).sum(); }, 1e-3);
    const double formula = (psi.array() * next.weights().array().log()).sum();
    EXPECT_GE(formula, grid - 1e-6);
  }
}

// Directional derivative of the log-likelihood at (0,1,0) toward e_c for the
// data {1,2,2,3}: sum_i (a_{c z_i} - a_{1 z_i}) / a_{1 z_i}.
double AnalyticBoundaryDerivative(const Eigen::Matrix3d& a, int c) {
  double total = 0.0;
  for (int z : {0, 1, 1, 2}) total += (a(c, z) - a(1, z)) / a(1, z);
  return total;
}

TEST(BoundaryDerivativeTest, FiniteDifferenceMatchesAnalyticValue) {
  const Eigen::Matrix3d a = ThreeRrExample();
  for (int c : {0, 2}) {
    EXPECT_NEAR(AnalyticBoundaryDerivative(a, c), 0.0, 1e-15);
    EXPECT_NEAR(BoundaryPartial(a, c), AnalyticBoundaryDerivative(a, c), 1e-6);
  }
  Eigen::Matrix3d perturbed = Eigen::Matrix3d::Constant(0.245);
  perturbed.diagonal().setConstant(0.51);
  for (int c : {0, 2}) {
    EXPECT_NEAR(BoundaryPartial(perturbed, c), AnalyticBoundaryDerivative(perturbed, c), 1e-6);
    EXPECT_GT(std::abs(BoundaryPartial(perturbed, c) + 0.5), std::abs(BoundaryPartial(a, c) + 0.5));
  }
}

}  // namespace
}  // namespace ibu
