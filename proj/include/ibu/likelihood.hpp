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

#ifndef IBU_LIKELIHOOD_HPP_
#define IBU_LIKELIHOOD_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ibu/empirical.hpp"
#include "ibu/mechanisms.hpp"
#include "ibu/simplex.hpp"

namespace ibu {

// One observable together with the mechanism that produced it.
struct Observation {
  std::size_t observable = 0;
  std::string mechanism_id;
};

// Everything reported by one user: k_i >= 1 observables of the same hidden
// input, each possibly from a different mechanism.
struct ObservationRecord {
  std::vector<Observation> observables;
  std::size_t user_index = 0;
};

class MechanismRegistry {
 public:
  MechanismRegistry() = default;
  explicit MechanismRegistry(std::vector<Mechanism> mechanisms);

  // Throws kInvalidInput on a duplicate id.
  void Add(Mechanism mechanism);
  // Throws kUnknownMechanism.
  const Mechanism& Get(const std::string& id) const;
  bool Contains(const std::string& id) const { return mechanisms_.count(id) != 0; }

 private:
  std::map<std::string, Mechanism> mechanisms_;
};

// The |X| x n outputs probability matrix G, g(x, i) = P(Z^i = z^i | X^i = x).
//
// Identical columns may be stored once with a multiplicity; every quantity
// below is then the weighted sum over distinct columns, which equals the
// unweighted sum over all n users. num_users() is the sum of multiplicities.
class OutputsProbabilityMatrix {
 public:
  explicit OutputsProbabilityMatrix(Eigen::MatrixXd g);
  OutputsProbabilityMatrix(Eigen::MatrixXd g, Eigen::VectorXd multiplicities);

  const Eigen::MatrixXd& g() const { return g_; }
  const Eigen::VectorXd& multiplicities() const { return multiplicities_; }
  std::size_t num_inputs() const { return static_cast<std::size_t>(g_.rows()); }
  std::size_t num_columns() const { return static_cast<std::size_t>(g_.cols()); }
  double num_users() const { return num_users_; }

 private:
  Eigen::MatrixXd g_;
  Eigen::VectorXd multiplicities_;
  double num_users_ = 0.0;
};

// g(x, i) = prod_j a^{ij}(x, z^i_j).
OutputsProbabilityMatrix BuildG(std::span<const ObservationRecord> records,
                                const MechanismRegistry& registry);

// Single fixed mechanism, one observable per user: one column per observed
// output value, weighted by its count. Outputs with zero count are dropped.
OutputsProbabilityMatrix GroupedG(const Mechanism& mechanism, const EmpiricalDistribution& q);

// L(theta) = sum_i ln sum_x theta_x g(x, i); -infinity when any inner sum is
// zero. Summation runs left to right over columns.
double LogLikelihood(const Distribution& theta, const OutputsProbabilityMatrix& g);

// P(X^i = x | Z^i = z^i; theta). Throws kInfiniteLogLikelihood when the
// column has zero probability under theta.
Distribution Posterior(const Distribution& theta, const OutputsProbabilityMatrix& g,
                       std::size_t column);

// psi_x(theta_prev) = sum_i P(X^i = x | z^i; theta_prev).
Eigen::VectorXd ExpectedCounts(const Distribution& theta_prev, const OutputsProbabilityMatrix& g);

// Expected complete-data log-likelihood Q(theta | theta_prev)
//   = sum_x psi_x ln theta_x + K(theta_prev),
//   K(theta_prev) = sum_i sum_x P(x | z^i; theta_prev) ln g(x, i),
// including K. -infinity when theta_x = 0 while psi_x > 0.
double QValue(const Distribution& theta, const Distribution& theta_prev,
              const OutputsProbabilityMatrix& g);

// H(theta | theta_prev) = -sum_i sum_x P(x | z^i; theta_prev) ln P(x | z^i; theta).
double HValue(const Distribution& theta, const Distribution& theta_prev,
              const OutputsProbabilityMatrix& g);

}  // namespace ibu

#endif  // IBU_LIKELIHOOD_HPP_
