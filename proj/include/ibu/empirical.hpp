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

#ifndef IBU_EMPIRICAL_HPP_
#define IBU_EMPIRICAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ibu {

// Observed output frequencies over an observable space: q_z = count_z / n.
// Counts are stored as reals so that exact frequency vectors can be used
// directly (FromFrequencies) in tests and analytic constructions.
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution FromObservations(std::span<const std::size_t> observations,
                                                std::size_t space_size);
  static EmpiricalDistribution FromCounts(std::span<const std::uint64_t> counts);
  static EmpiricalDistribution FromCounts(Eigen::VectorXd counts);
  // Treats q itself as the counts of a unit-weight sample (n = 1).
  static EmpiricalDistribution FromFrequencies(const Eigen::VectorXd& q);

  const Eigen::VectorXd& counts() const { return counts_; }
  double total() const { return total_; }
  std::size_t size() const { return static_cast<std::size_t>(counts_.size()); }
  Eigen::VectorXd frequencies() const { return counts_ / total_; }
  double frequency(std::size_t z) const { return counts_[static_cast<Eigen::Index>(z)] / total_; }
  bool HasFullSupport() const { return (counts_.array() > 0.0).all(); }

 private:
  EmpiricalDistribution(Eigen::VectorXd counts, double total)
      : counts_(std::move(counts)), total_(total) {}

  Eigen::VectorXd counts_;
  double total_ = 0.0;
};

}  // namespace ibu

#endif  // IBU_EMPIRICAL_HPP_
