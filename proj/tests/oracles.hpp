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

// Independent reference computations shared by the unit and acceptance tests.

#ifndef IBU_TESTS_ORACLES_HPP_
#define IBU_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace ibu::testing {

// Euclidean projection onto the simplex by enumerating every support set:
// on a fixed support S the minimizer is v_S shifted by a constant, and the
// best feasible candidate over all S is the projection. Exponential in the
// size, meant for n <= 12.
inline Eigen::VectorXd ProjectBySubsets(const Eigen::VectorXd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        sum += v[static_cast<Eigen::Index>(i)];
        ++count;
      }
    }
    const double shift = (sum - 1.0) / count;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(v.size());
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        p[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(i)] - shift;
        if (p[static_cast<Eigen::Index>(i)] < -1e-15) feasible = false;
      }
    }
    if (!feasible) continue;
    const double dist = (p - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

// Maximizes f over the 3-point simplex on a lattice of the given step.
// Returns the best value and writes the arg max.
inline double GridMax3(const std::function<double(const Eigen::Vector3d&)>& f, double step,
                       Eigen::Vector3d* arg = nullptr) {
  const int steps = static_cast<int>(std::lround(1.0 / step));
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const Eigen::Vector3d theta(i * step, j * step, (steps - i - j) * step);
      const double value = f(theta);
      if (value > best) {
        best = value;
        if (arg) *arg = theta;
      }
    }
  }
  return best;
}

// sum_i w_i ln(theta . g_i), written out without the library.
inline double NaiveLogLikelihood(const Eigen::VectorXd& theta, const Eigen::MatrixXd& g,
                                 const Eigen::VectorXd& w) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    double inner = 0.0;
    for (Eigen::Index x = 0; x < g.rows(); ++x) inner += theta[x] * g(x, i);
    total += w[i] * std::log(inner);
  }
  return total;
}

}  // namespace ibu::testing

#endif  // IBU_TESTS_ORACLES_HPP_
