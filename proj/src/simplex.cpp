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

#include "ibu/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace ibu {

namespace {

void RequireFinite(const RealVector& v, const char* what) {
  if (v.size() == 0) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + ": empty vector");
  }
  if (!v.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + ": non-finite entry");
  }
}

}  // namespace

Distribution Distribution::FromWeights(RealVector weights) {
  RequireFinite(weights, "distribution");
  if ((weights.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "distribution: negative weight");
  }
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::kInvalidInput,
                "distribution: weights sum to " + std::to_string(sum));
  }
  weights /= sum;
  return Distribution(std::move(weights));
}

Distribution Distribution::FromWeights(std::vector<double> weights) {
  return FromWeights(RealVector(
      Eigen::Map<const RealVector>(weights.data(), static_cast<Eigen::Index>(weights.size()))));
}

Distribution Distribution::Uniform(std::size_t size) {
  if (size == 0) throw Error(ErrorCode::kInvalidInput, "uniform: empty space");
  return Distribution(
      RealVector::Constant(static_cast<Eigen::Index>(size), 1.0 / static_cast<double>(size)));
}

Distribution Distribution::PointMass(std::size_t size, std::size_t index) {
  if (index >= size) throw Error(ErrorCode::kInvalidInput, "point mass: index out of range");
  RealVector w = RealVector::Zero(static_cast<Eigen::Index>(size));
  w[static_cast<Eigen::Index>(index)] = 1.0;
  return Distribution(std::move(w));
}

std::size_t Distribution::SupportSize() const {
  return static_cast<std::size_t>((weights_.array() > 0.0).count());
}

Distribution MakeDistributionUnchecked(RealVector weights) {
  weights = weights.cwiseMax(0.0);
  const double sum = weights.sum();
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(ErrorCode::kDegenerateVector, "cannot normalize vector with sum " +
                                                  std::to_string(sum));
  }
  weights /= sum;
  return Distribution(std::move(weights));
}

namespace internal {

Distribution ProjectToSimplexImpl(const RealVector& v) {
  RequireFinite(v, "project_to_simplex");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());

  // Largest rho with u_rho - (sum_{i<=rho} u_i - 1) / rho > 0.
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    prefix += u[j];
    const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  RealVector p = (v.array() - tau).cwiseMax(0.0);
  return MakeDistributionUnchecked(std::move(p));
}

Distribution TruncateNormalizeImpl(const RealVector& v) {
  RequireFinite(v, "truncate_normalize");
  RealVector clamped = v.cwiseMax(0.0);
  if (!(clamped.sum() > 0.0)) {
    throw Error(ErrorCode::kDegenerateVector,
                "truncate_normalize: no positive entries to normalize");
  }
  return MakeDistributionUnchecked(std::move(clamped));
}

}  // namespace internal

CategoricalSampler::CategoricalSampler(const RealVector& weights) {
  if (weights.size() == 0) throw Error(ErrorCode::kInvalidInput, "sampler: empty weights");
  cdf_.resize(static_cast<std::size_t>(weights.size()));
  double running = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::kInvalidInput, "sampler: invalid weight");
    }
    running += weights[i];
    cdf_[static_cast<std::size_t>(i)] = running;
    if (weights[i] > 0.0) last_positive_ = static_cast<std::size_t>(i);
  }
  if (!(running > 0.0)) throw Error(ErrorCode::kInvalidInput, "sampler: zero total weight");
}

std::size_t CategoricalSampler::Sample(RandomSource& rng) const {
  const double u = rng.Uniform() * cdf_.back();
  // First index whose cumulative mass exceeds u; zero-weight entries never
  // satisfy the strict comparison.
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return last_positive_;
  return static_cast<std::size_t>(it - cdf_.begin());
}

std::vector<std::size_t> SampleCategorical(const Distribution& d, RandomSource& rng,
                                           std::size_t count) {
  if (count == 0) throw Error(ErrorCode::kInvalidInput, "sample_categorical: count must be >= 1");
  CategoricalSampler sampler(d);
  std::vector<std::size_t> out(count);
  for (auto& s : out) s = sampler.Sample(rng);
  return out;
}

}  // namespace ibu
