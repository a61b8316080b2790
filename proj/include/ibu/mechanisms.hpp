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

#ifndef IBU_MECHANISMS_HPP_
#define IBU_MECHANISMS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ibu/grid.hpp"
#include "ibu/random.hpp"
#include "ibu/simplex.hpp"

namespace ibu {

// Row-stochasticity tolerance enforced on every constructed mechanism.
inline constexpr double kRowSumTolerance = 1e-9;

// An obfuscation mechanism as an explicit conditional probability table:
// rows are inputs, columns are observables, probs(x, z) = P(z | x).
class Mechanism {
 public:
  Mechanism(std::string id, Eigen::MatrixXd probs);
  Mechanism(std::string id, Eigen::MatrixXd probs, std::vector<std::string> input_labels,
            std::vector<std::string> output_labels);

  const std::string& id() const { return id_; }
  const Eigen::MatrixXd& probs() const { return probs_; }
  std::size_t num_inputs() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t num_outputs() const { return static_cast<std::size_t>(probs_.cols()); }
  const std::vector<std::string>& input_labels() const { return input_labels_; }
  const std::vector<std::string>& output_labels() const { return output_labels_; }
  bool is_square() const { return probs_.rows() == probs_.cols(); }

  double operator()(std::size_t x, std::size_t z) const {
    return probs_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z));
  }

  // Row per input, header "input,<output labels...>".
  void WriteCsv(std::ostream& out) const;
  static Mechanism ReadCsv(std::istream& in, std::string id);

 private:
  std::string id_;
  Eigen::MatrixXd probs_;
  std::vector<std::string> input_labels_;
  std::vector<std::string> output_labels_;
};

Mechanism IdentityMechanism(std::size_t k);

// k-ary randomized response: e^eps / (k - 1 + e^eps) on the diagonal.
Mechanism KRandomizedResponse(std::size_t k, double epsilon);

// Geometric mechanism over the integers: c * e^{-eps |z - y|},
// c = (1 - e^{-eps}) / (1 + e^{-eps}).
double GeometricProbability(long long y, long long z, double epsilon);

// Geometric mechanism truncated to [r1, r2]; boundary outputs absorb the
// folded tails.
Mechanism TruncatedGeometric(long long r1, long long r2, double epsilon);

// Planar geometric mechanism on the infinite lattice of cell centers,
// truncated to the grid by remapping each lattice point to its nearest grid
// center. Normalizer and remapped masses are summed over a square window
// whose analytic tail bound is below tail_tol, so entries are accurate to
// about tail_tol and rows sum to one.
Mechanism PlanarGeometric(const Grid& grid, double epsilon, double tail_tol = 1e-9);

// Output-space cap for the explicit RAPPOR table (2^m columns).
inline constexpr std::size_t kMaxExplicitRapporSize = 20;

// A fixed-length bit array; RAPPOR's observable.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::vector<std::uint8_t> bits);
  static BitVector OneHot(std::size_t size, std::size_t index);
  // Bit j of the result is bit j of `packed`.
  static BitVector Unpack(std::uint64_t packed, std::size_t size);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t j) const { return bits_[j] != 0; }
  // Requires size() <= 64.
  std::uint64_t Pack() const;
  std::string ToString() const;

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Basic one-time RAPPOR over {0, ..., m-1}: one-hot encode, then keep each bit
// with probability e^{eps/2} / (1 + e^{eps/2}).
class RapporModel {
 public:
  RapporModel(std::size_t space_size, double epsilon);

  std::size_t space_size() const { return m_; }
  double epsilon() const { return epsilon_; }
  double keep_probability() const { return keep_; }
  double flip_probability() const { return 1.0 - keep_; }

  BitVector Obfuscate(std::size_t x, RandomSource& rng) const;
  double Probability(std::size_t x, const BitVector& observed) const;
  // (P(observed | x))_x, one column of the outputs probability matrix.
  Eigen::VectorXd Column(const BitVector& observed) const;

 private:
  std::size_t m_;
  double epsilon_;
  double keep_;
};

// Explicit RAPPOR table. Output index k corresponds to BitVector::Unpack(k).
// Throws kCapacity when space_size > kMaxExplicitRapporSize.
Mechanism Rappor(std::size_t space_size, double epsilon);

// Draws an observable from row x.
std::size_t SampleOutput(const Mechanism& m, std::size_t x, RandomSource& rng);

// Bulk sampler with per-row CDFs precomputed.
class MechanismSampler {
 public:
  explicit MechanismSampler(const Mechanism& m);
  std::size_t Sample(std::size_t x, RandomSource& rng) const;

 private:
  std::vector<CategoricalSampler> rows_;
};

}  // namespace ibu

#endif  // IBU_MECHANISMS_HPP_
