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

#ifndef IBU_ANALYSIS_HPP_
#define IBU_ANALYSIS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ibu/grid.hpp"
#include "ibu/likelihood.hpp"
#include "ibu/simplex.hpp"

namespace ibu {

// Outcome of the MLE uniqueness check.
//
// The check deduplicates the columns of G and asks whether
// [G(I') | 1] has full row rank |X|: equivalently, no nonzero v with
// v . 1 = 0 and v G(I') = 0 exists, so distinct distributions theta, phi
// always give (theta - phi) G(I') != 0. The full deduplicated column set is
// the largest choice of I', so if any subset certifies uniqueness this one
// does too. When the rank falls short, the witness pair is built from a
// left null vector v as theta = u + c v, phi = u - c v around uniform u.
struct UniquenessReport {
  bool unique = false;
  int rank = 0;
  int required_rank = 0;
  std::size_t distinct_columns = 0;
  std::optional<std::pair<Distribution, Distribution>> witness;

  std::string ToText() const;
};

UniquenessReport CheckUniqueness(const Eigen::MatrixXd& g, double tol = 1e-9);
inline UniquenessReport CheckUniqueness(const OutputsProbabilityMatrix& g, double tol = 1e-9) {
  return CheckUniqueness(g.g(), tol);
}

enum class Metric { kTv, kKl, kEmd };
std::string_view MetricName(Metric metric);
std::optional<Metric> ParseMetric(std::string_view name);

// Half the L1 distance.
double TotalVariation(const Distribution& p, const Distribution& q);

// sum_x p_x ln(p_x / q_x), natural log; +infinity when p_x > 0 = q_x.
double KlDivergence(const Distribution& p, const Distribution& q);
double KlDivergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Exact earth mover's distance under a symmetric, nonnegative ground table
// with zero diagonal.
double Emd(const Distribution& p, const Distribution& q, const Eigen::MatrixXd& ground);

// |i - j| * spacing.
Eigen::MatrixXd LineGround(std::size_t n, double spacing = 1.0);
// Kilometres between cell centers.
Eigen::MatrixXd GridGround(const Grid& grid);

// Method-of-types bound (1 + k)^{|Z|} 2^{-k delta} on
// P(KL(q_k || a) > delta), with KL in bits.
double TypesBound(std::size_t k, std::size_t z_size, double delta);

// Smallest k from which TypesBound is nonincreasing in k.
std::size_t TypesBoundDecreasingFrom(std::size_t z_size, double delta);

struct SurfacePoint {
  double theta1 = 0.0;
  double theta3 = 0.0;
  // -infinity marks cells outside the feasible set.
  double log_likelihood = 0.0;
};

// L sampled over {theta1, theta3 >= 0, theta1 + theta3 <= 1} on a triangular
// lattice with `resolution` points per edge; theta2 = 1 - theta1 - theta3.
// Throws kUnsupported unless |X| = 3.
std::vector<SurfacePoint> LikelihoodSurface(const OutputsProbabilityMatrix& g, std::size_t resolution);

// "theta1,theta3,L" with -inf written literally.
void WriteSurfaceCsv(std::ostream& out, std::span<const SurfacePoint> surface);

}  // namespace ibu

#endif  // IBU_ANALYSIS_HPP_
