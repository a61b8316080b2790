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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "ibu/analysis.hpp"
#include "ibu/error.hpp"
#include "ibu/estimators.hpp"
#include "ibu/harness.hpp"
#include "ibu/likelihood.hpp"
#include "ibu/mechanisms.hpp"
#include "ibu/random.hpp"

namespace {

using namespace ibu;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double Seconds(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string Fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

Distribution RandomDistribution(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = e(gen);
  return MakeDistributionUnchecked(v);
}

// 1. Small worked counterexamples.
Outcome Counterexamples() {
  const CounterexampleReport report = VerifyCounterexamples();
  Outcome out{report.AllPassed() && report.seconds < 10.0, ""};
  for (const auto& c : report.checks) {
    out.detail += std::string(c.passed ? "[pass " : "[FAIL ") + c.name + " measured=" + Fmt("%.6g", c.measured) +
                  " expected=" + Fmt("%.6g", c.expected) + "] ";
  }
  out.detail += Fmt("runtime %.3f s", report.seconds);
  return out;
}

// 2. EM reaches the global maximum when the MLE lies on the boundary.
Outcome BoundaryConvergence() {
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0, monotone_failures = 0;
  double worst_gap = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const int n = 3 + instance % 4;
    // Diagonally dominant rows keep A well conditioned.
    Eigen::MatrixXd a(n, n);
    for (auto& x : a.reshaped()) x = unit(gen);
    a.diagonal().array() += n;
    for (int r = 0; r < n; ++r) a.row(r) /= a.row(r).sum();
    // theta on the 1e-3 lattice with at least one and at most n - 1 zeros.
    std::vector<int> units(n, 0);
    const int zeros = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(n - 1));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    const int support = n - zeros;
    int remaining = 1000 - support;
    for (int k = 0; k < support; ++k) {
      const int extra = k + 1 == support ? remaining : static_cast<int>(gen() % static_cast<std::uint64_t>(remaining + 1));
      units[order[k]] = 1 + extra;
      remaining -= extra;
    }
    Eigen::VectorXd theta(n);
    for (int x = 0; x < n; ++x) theta[x] = units[x] * 1e-3;
    const Eigen::VectorXd q = (theta.transpose() * a).transpose();
    const Mechanism mech("A", a);
    const auto g = GroupedG(mech, EmpiricalDistribution::FromCounts(Eigen::VectorXd(q * 1000.0)));
    const EmTrace trace = EmEstimate(g);
    for (std::size_t t = 1; t < trace.log_likelihoods.size(); ++t) {
      if (trace.log_likelihoods[t] < trace.log_likelihoods[t - 1] - 1e-9) {
        ++monotone_failures;
        break;
      }
    }
    double best = 0.0;
    if (n == 3) {
      best = testing::GridMax3(
          [&](const Eigen::Vector3d& t) { return testing::NaiveLogLikelihood(t, g.g(), g.multiplicities()); }, 1e-3);
    } else {
      // q = theta A is attainable, so the maximum is sum_z w_z ln q_z.
      best = testing::NaiveLogLikelihood(theta, g.g(), g.multiplicities());
    }
    const double gap = std::abs(trace.log_likelihoods.back() - best);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-5) ++failures;
  }
  return {failures == 0 && monotone_failures == 0,
          "50 instances, |L_em - L_max| worst " + Fmt("%.3g", worst_gap) + ", " + std::to_string(failures) +
              " over 1e-5, " + std::to_string(monotone_failures) + " non-monotone traces"};
}

// 3. The closed-form M step maximizes Q.
Outcome MStepOracle() {
  std::mt19937_64 gen(3003);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::uniform_int_distribution<int> cols(1, 8);
  int failures = 0;
  double worst = -1e300;
  for (int instance = 0; instance < 30; ++instance) {
    Eigen::MatrixXd gm(3, cols(gen));
    for (auto& x : gm.reshaped()) x = unit(gen);
    const OutputsProbabilityMatrix g(gm);
    const auto prev = RandomDistribution(gen, 3);
    const Eigen::VectorXd psi = ExpectedCounts(prev, g);
    // Q(theta | prev) = sum psi ln theta + K, with K fixed by prev.
    const double k = QValue(prev, prev, g) - (psi.array() * prev.weights().array().log()).sum();
    const double grid =
        testing::GridMax3([&](const Eigen::Vector3d& t) { return (psi.array() * t.array().log()).sum() + k; }, 1e-3);
    const double formula = QValue(EmStep(prev, g), prev, g);
    worst = std::max(worst, grid - formula);
    if (formula < grid - 1e-6) ++failures;
  }
  return {failures == 0, "30 instances, max(grid - formula) " + Fmt("%.3g", worst)};
}

// 4. Uniqueness for k-RR, geometric and truncated geometric; non-uniqueness
// for the rank-deficient 3x3 example.
Outcome UniquenessCorollaries() {
  std::mt19937_64 gen(4004);
  std::uniform_real_distribution<double> eps(0.01, 6.0);
  std::uniform_int_distribution<int> len(2, 30);
  std::uniform_int_distribution<int> offset(-50, 50);
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const double e = eps(gen);
    const int k = len(gen);
    if (!CheckUniqueness(KRandomizedResponse(static_cast<std::size_t>(k), e).probs()).unique) ++failures;
    const long long r1 = offset(gen);
    if (!CheckUniqueness(TruncatedGeometric(r1, r1 + k - 1, e).probs()).unique) ++failures;
    // Geometric mechanism with X the set of reported integers.
    std::set<long long> values;
    while (static_cast<int>(values.size()) < k) values.insert(offset(gen));
    const std::vector<long long> v(values.begin(), values.end());
    Eigen::MatrixXd g(k, k);
    for (int x = 0; x < k; ++x) {
      for (int z = 0; z < k; ++z) g(x, z) = GeometricProbability(v[x], v[z], e);
    }
    if (!CheckUniqueness(g).unique) ++failures;
  }
  const UniquenessReport a = CheckUniqueness(Eigen::MatrixXd(NonInvertibleExample()));
  if (a.unique || !a.witness) ++failures;
  return {failures == 0, "60 unique cases + 1 non-unique case, " + std::to_string(failures) + " failures"};
}

// 5. Binomial and interval sources under a strongly private truncated
// geometric mechanism.
Outcome GeometricSweep() {
  const auto start = Clock::now();
  int failures = 0;
  std::string detail;
  for (int source = 0; source < 2; ++source) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ExperimentConfig cfg;
      cfg.source = source == 0 ? SourceKind::kBinomial : SourceKind::kUniformInterval;
      cfg.space_size = 100;
      cfg.binomial_p = 0.5;
      cfg.interval_lo = 20;
      cfg.interval_hi = 39;
      cfg.mechanism = "truncated-geometric";
      cfg.epsilons = {0.1};
      cfg.samples = 100000;
      cfg.seed = seed;
      const RunResult r = RunExperiment(cfg);
      double em = NAN, invn = NAN, invp = NAN;
      for (const auto& row : r.values) {
        (row.estimator == "em" ? em : row.estimator == "invn" ? invn : invp) = row.value;
      }
      if (!(em < invp && em < invn) || !r.errors.empty()) ++failures;
      if (seed == 1) {
        detail += std::string(source == 0 ? "binomial" : "uniform[20,39]") + " seed 1: em " + Fmt("%.4f", em) +
                  " invp " + Fmt("%.4f", invp) + " invn " + Fmt("%.4f", invn) + "; ";
      }
    }
  }
  const double secs = Seconds(start);
  return {failures == 0 && secs < 300.0,
          detail + std::to_string(failures) + " of 10 runs out of order, runtime " + Fmt("%.1f s", secs)};
}

// A sparse, clustered distribution on the grid standing in for check-in data.
std::vector<double> SyntheticHotspots(const Grid& grid) {
  std::mt19937_64 gen(606);
  std::vector<double> w(grid.size(), 0.0);
  std::uniform_int_distribution<int> row(0, grid.rows() - 1), col(0, grid.cols() - 1);
  std::exponential_distribution<double> mass(1.0);
  for (int hotspot = 0; hotspot < 12; ++hotspot) {
    const int r = row(gen), c = col(gen);
    const double peak = 1.0 + 5.0 * mass(gen);
    for (int dr = -2; dr <= 2; ++dr) {
      for (int dc = -2; dc <= 2; ++dc) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= grid.rows() || cc >= grid.cols()) continue;
        const double d = std::hypot(dr, dc);
        if (d > 2.0) continue;
        w[grid.Index(rr, cc)] += peak * std::exp(-1.5 * d);
      }
    }
  }
  return w;
}

// 6. Planar geometric on the San Francisco grid.
Outcome PlanarGridRun() {
  const auto start = Clock::now();
  ExperimentConfig cfg;
  cfg.grid = Grid::SanFranciscoNorth();
  cfg.mechanism = "planar-geometric";
  cfg.epsilons = {1.0};
  cfg.seed = 6;
  const char* path = std::getenv("IBU_GOWALLA_PATH");
  const bool real = path != nullptr && *path != '\0';
  if (real) {
    cfg.source = SourceKind::kGowalla;
    cfg.gowalla_path = path;
    cfg.samples = 0;
  } else {
    cfg.source = SourceKind::kCustom;
    cfg.weights = SyntheticHotspots(*cfg.grid);
    cfg.samples = 123273;
  }
  const RunResult r = RunExperiment(cfg);
  double em = NAN, invn = NAN, invp = NAN, noisy = NAN;
  for (const auto& row : r.values) (row.estimator == "em" ? em : row.estimator == "invn" ? invn : invp) = row.value;
  if (!r.baselines.empty()) noisy = r.baselines.front().value;
  const double secs = Seconds(start);
  std::string detail = std::string(real ? "check-in data" : "synthetic hotspots (no IBU_GOWALLA_PATH)") +
                       ": em " + Fmt("%.4f", em) + " invp " + Fmt("%.4f", invp) + " invn " + Fmt("%.4f", invn) +
                       " noisy " + Fmt("%.4f", noisy) + ", runtime " + Fmt("%.1f s", secs);
  bool ok = r.errors.empty() && secs < 600.0;
  if (real) {
    ok = ok && std::abs(em - 0.2238) <= 0.03 && std::abs(invp - 0.4567) <= 0.03 && std::abs(invn - 0.4633) <= 0.03 &&
         std::abs(noisy - 0.4544) <= 0.03;
  } else {
    ok = ok && em < invp && em < invn;
  }
  return {ok, detail};
}

// 7. Inversion baselines.
Outcome InversionBaselines() {
  const Mechanism a("A'", ThreeRrExample());
  const auto q = EmpiricalDistribution::FromFrequencies(Eigen::Vector3d(0.25, 0.5, 0.25));
  double worst_inv = 0.0;
  for (InvMode mode : {InvMode::kTruncateNormalize, InvMode::kProject}) {
    worst_inv = std::max(worst_inv, (InvEstimate(q, a, mode).weights() - Eigen::Vector3d(0, 1, 0)).cwiseAbs().maxCoeff());
  }
  std::mt19937_64 gen(707);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::uniform_int_distribution<int> size(2, 10);
  double worst_proj = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(size(gen));
    for (auto& x : v) x = normal(gen);
    worst_proj = std::max(worst_proj, (ProjectToSimplex(v).weights() - testing::ProjectBySubsets(v)).cwiseAbs().maxCoeff());
  }
  return {worst_inv <= 1e-12 && worst_proj <= 1e-9,
          "3-RR point mass error " + Fmt("%.3g", worst_inv) + ", projection vs QP oracle " + Fmt("%.3g", worst_proj)};
}

// 8. Deviation frequency of the empirical type against the types bound.
Outcome TypesBoundCheck() {
  const Mechanism m = KRandomizedResponse(3, 1.0);
  const MechanismSampler sampler(m);
  RandomSource rng(808);
  const int k = 200, trials = 1000;
  const double delta = 0.1;
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (int i = 0; i < k; ++i) counts[static_cast<Eigen::Index>(sampler.Sample(0, rng))] += 1.0;
    double kl_bits = 0.0;
    for (int z = 0; z < 3; ++z) {
      const double qz = counts[z] / k;
      if (qz > 0) kl_bits += qz * std::log2(qz / m(0, static_cast<std::size_t>(z)));
    }
    if (kl_bits > delta) ++violations;
  }
  const double freq = static_cast<double>(violations) / trials;
  const double bound = TypesBound(k, 3, delta);
  return {freq <= bound, "observed " + Fmt("%.4f", freq) + " <= bound " + Fmt("%.4g", bound)};
}

// 9. k-RR and RAPPOR: estimators perform alike.
Outcome RapporAndKrr() {
  const auto start = Clock::now();
  int spread_failures = 0, em_failures = 0, runs = 0;
  double worst_spread = 0.0, worst_em = -1.0;
  for (const char* mechanism : {"krr", "rappor"}) {
    for (int source = 0; source < 2; ++source) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig cfg;
        cfg.source = source == 0 ? SourceKind::kBinomial : SourceKind::kUniformInterval;
        cfg.space_size = 10;
        cfg.interval_lo = 3;
        cfg.interval_hi = 6;
        cfg.mechanism = mechanism;
        cfg.epsilons = {1.0, 2.0};
        cfg.samples = 100000;
        cfg.seed = seed;
        const RunResult r = RunExperiment(cfg);
        for (double eps : cfg.epsilons) {
          double em = NAN, invn = NAN, invp = NAN;
          for (const auto& row : r.values) {
            if (row.epsilon != eps) continue;
            (row.estimator == "em" ? em : row.estimator == "invn" ? invn : invp) = row.value;
          }
          ++runs;
          const double spread = std::max({em, invn, invp}) - std::min({em, invn, invp});
          const double em_gap = em - std::min(invn, invp);
          worst_spread = std::max(worst_spread, spread);
          worst_em = std::max(worst_em, em_gap);
          if (!(spread <= 0.05)) ++spread_failures;
          if (!(em_gap <= 0.02)) ++em_failures;
        }
      }
    }
  }
  return {spread_failures == 0 && em_failures == 0,
          std::to_string(runs) + " cells, max spread " + Fmt("%.4f", worst_spread) + ", max em - best inv " +
              Fmt("%.4f", worst_em) + ", runtime " + Fmt("%.1f s", Seconds(start))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 counterexample suite", Counterexamples},
      {"2 boundary MLE convergence", BoundaryConvergence},
      {"3 M-step oracle", MStepOracle},
      {"4 uniqueness corollaries", UniquenessCorollaries},
      {"5 truncated geometric sweep", GeometricSweep},
      {"6 planar geometric on the SF grid", PlanarGridRun},
      {"7 inversion baselines", InversionBaselines},
      {"8 method-of-types bound", TypesBoundCheck},
      {"9 k-RR and RAPPOR estimators agree", RapporAndKrr},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
