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

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ibu/error.hpp"
#include "ibu/harness.hpp"
#include "ibu/likelihood.hpp"

namespace ibu {

namespace {

// Observations {1,2,2,3} as 0-indexed outputs.
constexpr int kBoundaryData[] = {0, 1, 1, 2};

// L evaluated on a raw vector, which may leave the simplex slightly.
double RawLogLikelihood(const Eigen::Vector3d& theta, const Eigen::Matrix3d& a) {
  double total = 0.0;
  for (int z : kBoundaryData) total += std::log(theta.dot(a.col(z)));
  return total;
}

std::string Num(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace

Eigen::Matrix3d NonInvertibleExample() {
  Eigen::Matrix3d a;
  a << 1.0 / 2, 1.0 / 3, 1.0 / 6,
       1.0 / 3, 1.0 / 3, 1.0 / 3,
       1.0 / 6, 1.0 / 3, 1.0 / 2;
  return a;
}

Eigen::Matrix3d ThreeRrExample() {
  Eigen::Matrix3d a;
  a << 0.5, 0.25, 0.25,
       0.25, 0.5, 0.25,
       0.25, 0.25, 0.5;
  return a;
}

double BoundaryPartial(const Eigen::Matrix3d& a, int coordinate, double step) {
  if (coordinate != 0 && coordinate != 2) {
    throw Error(ErrorCode::kInvalidInput, "boundary partial: coordinate must be 0 or 2");
  }
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  dir[coordinate] = 1.0;
  dir[1] = -1.0;
  const Eigen::Vector3d base(0.0, 1.0, 0.0);
  return (RawLogLikelihood(base + step * dir, a) - RawLogLikelihood(base - step * dir, a)) / (2 * step);
}

bool CounterexampleReport::AllPassed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

std::string CounterexampleReport::ToText() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured " << Num(c.measured) << ", expected "
        << Num(c.expected) << " +/- " << Num(c.tolerance);
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
  }
  out << "elapsed " << Num(seconds) << " s\n";
  return out.str();
}

CounterexampleReport VerifyCounterexamples(const Eigen::Matrix3d& three_rr) {
  const auto start = std::chrono::steady_clock::now();
  CounterexampleReport report;

  {
    constexpr double kTol = 1e-9;
    const Eigen::Matrix3d a = NonInvertibleExample();
    const UniquenessReport u = CheckUniqueness(Eigen::MatrixXd(a), kTol);
    CheckResult c{"non-unique MLE", false, 0.0, 0.0, 10 * kTol, ""};
    if (u.witness) {
      const Eigen::VectorXd diff = u.witness->first.weights() - u.witness->second.weights();
      const double image = (diff.transpose() * a).cwiseAbs().maxCoeff();
      const double tv = TotalVariation(u.witness->first, u.witness->second);
      c.measured = image;
      c.passed = !u.unique && image <= c.tolerance && tv > 0.0;
      c.detail = "rank " + std::to_string(u.rank) + " of " + std::to_string(u.required_rank) +
                 ", witness TV " + Num(tv);
    } else {
      c.measured = std::nan("");
      c.detail = u.unique ? "reported unique" : "no witness";
    }
    report.checks.push_back(std::move(c));
  }

  {
    const Mechanism a("A", NonInvertibleExample());
    const Eigen::Vector3d third = Eigen::Vector3d::Constant(1.0 / 3);
    const EmpiricalDistribution q = EmpiricalDistribution::FromFrequencies(third);
    const Distribution theta = Distribution::FromWeights(std::vector<double>{0.5, 0.0, 0.5});
    const Distribution next = IbuStep(theta, a, q);
    const double moved = (next.weights() - theta.weights()).cwiseAbs().maxCoeff();
    report.checks.push_back({"IBU fixed point", moved <= 1e-12, moved, 0.0, 1e-12, ""});
  }

  {
    const double d1 = BoundaryPartial(three_rr, 0);
    const double d3 = BoundaryPartial(three_rr, 2);
    constexpr double kExpected = -0.5;
    constexpr double kTol = 1e-4;
    const bool ok = std::abs(d1 - kExpected) <= kTol && std::abs(d3 - kExpected) <= kTol;
    const double worst = std::abs(d1 - kExpected) >= std::abs(d3 - kExpected) ? d1 : d3;
    report.checks.push_back(
        {"boundary partials", ok, worst, kExpected, kTol, "dL/dtheta1 " + Num(d1) + ", dL/dtheta3 " + Num(d3)});
  }

  {
    const Mechanism a("A'", three_rr);
    const EmpiricalDistribution q = EmpiricalDistribution::FromCounts(Eigen::VectorXd(Eigen::Vector3d(1, 2, 1)));
    // The optimum is flat at the boundary and EM approaches it sublinearly, so
    // the default threshold stops short; run it closer to the limit.
    EmConfig cfg;
    cfg.delta = 1e-14;
    const EmTrace trace = EmEstimate(GroupedG(a, q), cfg);
    const double tv = TotalVariation(trace.estimate, Distribution::PointMass(3, 1));
    report.checks.push_back({"EM reaches (0,1,0)", tv <= 1e-4, tv, 0.0, 1e-4,
                             std::to_string(trace.iterations) + " iterations"});
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ibu
