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

#ifndef IBU_SIMPLEX_HPP_
#define IBU_SIMPLEX_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ibu/error.hpp"
#include "ibu/random.hpp"

namespace ibu {

using RealVector = Eigen::VectorXd;

// Absolute tolerance on |sum - 1| accepted when constructing a Distribution.
inline constexpr double kSimplexTolerance = 1e-9;

// A point on the probability simplex over a finite space {0, ..., size-1}.
// Immutable once constructed.
class Distribution {
 public:
  // Validates nonnegativity and |sum - 1| <= kSimplexTolerance, then
  // renormalizes. Throws kInvalidInput otherwise.
  static Distribution FromWeights(RealVector weights);
  static Distribution FromWeights(std::vector<double> weights);
  static Distribution Uniform(std::size_t size);
  static Distribution PointMass(std::size_t size, std::size_t index);

  const RealVector& weights() const { return weights_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  // Number of strictly positive components.
  std::size_t SupportSize() const;
  bool HasFullSupport() const { return SupportSize() == size(); }

 private:
  explicit Distribution(RealVector weights) : weights_(std::move(weights)) {}
  // Assumes the caller already produced a simplex point up to rounding.
  friend Distribution MakeDistributionUnchecked(RealVector weights);

  RealVector weights_;
};

// Renormalizes a vector that is a simplex point up to rounding error.
// Internal helper for routines whose output is on the simplex by
// construction; clamps tiny negative rounding residue to zero.
Distribution MakeDistributionUnchecked(RealVector weights);

namespace internal {
Distribution ProjectToSimplexImpl(const RealVector& v);
Distribution TruncateNormalizeImpl(const RealVector& v);
}  // namespace internal

// Euclidean projection onto the probability simplex (sort-and-threshold).
template <typename Derived>
Distribution ProjectToSimplex(const Eigen::MatrixBase<Derived>& v) {
  return internal::ProjectToSimplexImpl(v.template cast<double>().eval());
}

// Clamps negative entries to zero and divides by the remaining sum.
// Throws kDegenerateVector when nothing positive remains.
template <typename Derived>
Distribution TruncateNormalize(const Eigen::MatrixBase<Derived>& v) {
  return internal::TruncateNormalizeImpl(v.template cast<double>().eval());
}

// Inverse-CDF sampler over a fixed distribution.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const RealVector& weights);
  explicit CategoricalSampler(const Distribution& d) : CategoricalSampler(d.weights()) {}

  std::size_t Sample(RandomSource& rng) const;

 private:
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

std::vector<std::size_t> SampleCategorical(const Distribution& d, RandomSource& rng,
                                           std::size_t count);

}  // namespace ibu

#endif  // IBU_SIMPLEX_HPP_
