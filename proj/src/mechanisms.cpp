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

#include "ibu/mechanisms.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ibu/error.hpp"

namespace ibu {

namespace {

std::vector<std::string> IndexLabels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

void RequirePositiveEpsilon(double epsilon, const char* what) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + ": epsilon must be positive");
  }
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Mechanism::Mechanism(std::string id, Eigen::MatrixXd probs)
    : Mechanism(std::move(id), probs, IndexLabels(static_cast<std::size_t>(probs.rows())),
                IndexLabels(static_cast<std::size_t>(probs.cols()))) {}

Mechanism::Mechanism(std::string id, Eigen::MatrixXd probs, std::vector<std::string> input_labels,
                     std::vector<std::string> output_labels)
    : id_(std::move(id)),
      probs_(std::move(probs)),
      input_labels_(std::move(input_labels)),
      output_labels_(std::move(output_labels)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) {
    throw Error(ErrorCode::kInvalidInput, "mechanism " + id_ + ": empty table");
  }
  if (input_labels_.size() != num_inputs() || output_labels_.size() != num_outputs()) {
    throw Error(ErrorCode::kDimensionMismatch, "mechanism " + id_ + ": label count mismatch");
  }
  if (!probs_.allFinite() || (probs_.array() < 0.0).any() || (probs_.array() > 1.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "mechanism " + id_ + ": entries must lie in [0, 1]");
  }
  for (Eigen::Index x = 0; x < probs_.rows(); ++x) {
    const double sum = probs_.row(x).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::kInvalidInput, "mechanism " + id_ + ": row " + std::to_string(x) +
                                                " sums to " + std::to_string(sum));
    }
  }
}

void Mechanism::WriteCsv(std::ostream& out) const {
  out << "input";
  for (const auto& label : output_labels_) out << ',' << label;
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index x = 0; x < probs_.rows(); ++x) {
    out << input_labels_[static_cast<std::size_t>(x)];
    for (Eigen::Index z = 0; z < probs_.cols(); ++z) out << ',' << probs_(x, z);
    out << '\n';
  }
}

Mechanism Mechanism::ReadCsv(std::istream& in, std::string id) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "mechanism csv: missing header");
  std::vector<std::string> header = SplitCsvLine(line);
  if (header.size() < 2) throw Error(ErrorCode::kInvalidInput, "mechanism csv: no output columns");
  std::vector<std::string> outputs(header.begin() + 1, header.end());
  std::vector<std::string> inputs;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kInvalidInput, "mechanism csv: ragged row '" + line + "'");
    }
    inputs.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        row.push_back(std::stod(fields[j]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidInput, "mechanism csv: bad number '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd probs(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(outputs.size()));
  for (std::size_t x = 0; x < rows.size(); ++x) {
    for (std::size_t z = 0; z < outputs.size(); ++z) {
      probs(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z)) = rows[x][z];
    }
  }
  return Mechanism(std::move(id), std::move(probs), std::move(inputs), std::move(outputs));
}

Mechanism IdentityMechanism(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidInput, "identity: k must be >= 1");
  const auto n = static_cast<Eigen::Index>(k);
  return Mechanism("identity-" + std::to_string(k), Eigen::MatrixXd::Identity(n, n));
}

Mechanism KRandomizedResponse(std::size_t k, double epsilon) {
  if (k < 2) throw Error(ErrorCode::kInvalidInput, "krr: k must be >= 2");
  RequirePositiveEpsilon(epsilon, "krr");
  const double e = std::exp(epsilon);
  const double denom = static_cast<double>(k) - 1.0 + e;
  const auto n = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(n, n, 1.0 / denom);
  probs.diagonal().setConstant(e / denom);
  std::ostringstream id;
  id << "krr-" << k << "-" << std::setprecision(17) << epsilon;
  return Mechanism(id.str(), std::move(probs));
}

double GeometricProbability(long long y, long long z, double epsilon) {
  RequirePositiveEpsilon(epsilon, "geometric");
  const double alpha = std::exp(-epsilon);
  const double c = (1.0 - alpha) / (1.0 + alpha);
  return c * std::exp(-epsilon * static_cast<double>(std::llabs(z - y)));
}

Mechanism TruncatedGeometric(long long r1, long long r2, double epsilon) {
  if (r1 >= r2) throw Error(ErrorCode::kInvalidInput, "truncated geometric: need r1 < r2");
  RequirePositiveEpsilon(epsilon, "truncated geometric");
  const double alpha = std::exp(-epsilon);
  const double c_boundary = 1.0 / (1.0 + alpha);
  const double c_interior = (1.0 - alpha) / (1.0 + alpha);
  const auto n = static_cast<Eigen::Index>(r2 - r1 + 1);
  Eigen::MatrixXd probs(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index z = 0; z < n; ++z) {
      const double c = (z == 0 || z == n - 1) ? c_boundary : c_interior;
      probs(y, z) = c * std::exp(-epsilon * static_cast<double>(std::abs(z - y)));
    }
  }
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = std::to_string(r1 + i);
  std::ostringstream id;
  id << "tgeo-" << r1 << "-" << r2 << "-" << std::setprecision(17) << epsilon;
  return Mechanism(id.str(), std::move(probs), labels, labels);
}

Mechanism PlanarGeometric(const Grid& grid, double epsilon, double tail_tol) {
  RequirePositiveEpsilon(epsilon, "planar geometric");
  if (!(tail_tol > 0.0) || tail_tol > 1e-6) {
    throw Error(ErrorCode::kInvalidInput, "planar geometric: tail_tol must be in (0, 1e-6]");
  }
  const double a = std::exp(-epsilon * grid.cell_side_km());
  // Lattice points with Chebyshev radius r number 8r and have Euclidean
  // distance >= r cells, so the mass beyond radius R is at most
  // sum_{r>R} 8 r a^r = 8 a^{R+1} ((R+1) - R a) / (1-a)^2.
  auto tail = [a](double r) {
    return 8.0 * std::pow(a, r + 1.0) * ((r + 1.0) - r * a) / ((1.0 - a) * (1.0 - a));
  };
  constexpr long kMaxRadius = 4000;
  long radius = 1;
  while (tail(static_cast<double>(radius)) >= tail_tol) {
    if (++radius > kMaxRadius) {
      throw Error(ErrorCode::kCapacity, "planar geometric: epsilon too small for window summation");
    }
  }
  // The window must also cover every pairwise offset inside the grid.
  radius = std::max<long>(radius, std::max(grid.rows(), grid.cols()));

  const long width = 2 * radius + 1;
  // weights(di, dj + radius) = a^{sqrt(di^2 + dj^2)} for di >= 0; prefix sums
  // along dj serve the clamped boundary columns.
  Eigen::MatrixXd prefix(radius + 1, width + 1);
  Eigen::VectorXd row_total(radius + 1);
  for (long di = 0; di <= radius; ++di) {
    prefix(di, 0) = 0.0;
    for (long k = 0; k < width; ++k) {
      const double dj = static_cast<double>(k - radius);
      prefix(di, k + 1) = prefix(di, k) + std::pow(a, std::hypot(static_cast<double>(di), dj));
    }
    row_total[di] = prefix(di, width);
  }
  double window_mass = row_total[0];
  for (long di = 1; di <= radius; ++di) window_mass += 2.0 * row_total[di];
  const double lambda = 1.0 / window_mass;

  // Sum of weights over dj in [lo, hi] (offsets), clipped to the window.
  auto range_sum = [&](long di, long lo, long hi) {
    lo = std::max(lo, -radius);
    hi = std::min(hi, radius);
    if (lo > hi) return 0.0;
    const long adi = std::labs(di);
    return prefix(adi, hi + radius + 1) - prefix(adi, lo + radius);
  };

  const int rows = grid.rows();
  const int cols = grid.cols();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd strip(cols);
  for (Eigen::Index x = 0; x < n; ++x) {
    const int xr = grid.Row(static_cast<std::size_t>(x));
    const int xc = grid.Col(static_cast<std::size_t>(x));
    for (long di = -radius; di <= radius; ++di) {
      // Mass of lattice row xr + di remapped onto the grid columns.
      if (cols == 1) {
        strip[0] = range_sum(di, -radius, radius);
      } else {
        strip[0] = range_sum(di, -radius, -xc);
        for (int zc = 1; zc < cols - 1; ++zc) strip[zc] = range_sum(di, zc - xc, zc - xc);
        strip[cols - 1] = range_sum(di, cols - 1 - xc, radius);
      }
      const long zr = std::clamp<long>(xr + di, 0, rows - 1);
      for (int zc = 0; zc < cols; ++zc) {
        probs(x, static_cast<Eigen::Index>(grid.Index(static_cast<int>(zr), zc))) += strip[zc];
      }
    }
  }
  probs *= lambda;
  std::ostringstream id;
  id << "pgeo-" << rows << "x" << cols << "-" << std::setprecision(17) << epsilon;
  return Mechanism(id.str(), std::move(probs));
}

BitVector::BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw Error(ErrorCode::kInvalidInput, "bit vector: entries must be 0 or 1");
  }
}

BitVector BitVector::OneHot(std::size_t size, std::size_t index) {
  if (index >= size) throw Error(ErrorCode::kInvalidInput, "one-hot: index out of range");
  std::vector<std::uint8_t> bits(size, 0);
  bits[index] = 1;
  return BitVector(std::move(bits));
}

BitVector BitVector::Unpack(std::uint64_t packed, std::size_t size) {
  std::vector<std::uint8_t> bits(size);
  for (std::size_t j = 0; j < size; ++j) bits[j] = static_cast<std::uint8_t>((packed >> j) & 1U);
  return BitVector(std::move(bits));
}

std::uint64_t BitVector::Pack() const {
  if (bits_.size() > 64) throw Error(ErrorCode::kCapacity, "bit vector: too long to pack");
  std::uint64_t packed = 0;
  for (std::size_t j = 0; j < bits_.size(); ++j) packed |= static_cast<std::uint64_t>(bits_[j]) << j;
  return packed;
}

std::string BitVector::ToString() const {
  std::string s(bits_.size(), '0');
  for (std::size_t j = 0; j < bits_.size(); ++j) {
    if (bits_[j]) s[j] = '1';
  }
  return s;
}

RapporModel::RapporModel(std::size_t space_size, double epsilon)
    : m_(space_size), epsilon_(epsilon) {
  if (space_size < 2) throw Error(ErrorCode::kInvalidInput, "rappor: space size must be >= 2");
  RequirePositiveEpsilon(epsilon, "rappor");
  const double h = std::exp(epsilon / 2.0);
  keep_ = h / (1.0 + h);
}

BitVector RapporModel::Obfuscate(std::size_t x, RandomSource& rng) const {
  if (x >= m_) throw Error(ErrorCode::kInvalidInput, "rappor: input out of range");
  std::vector<std::uint8_t> bits(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    const bool original = (j == x);
    const bool flip = !rng.Bernoulli(keep_);
    bits[j] = static_cast<std::uint8_t>(original != flip);
  }
  return BitVector(std::move(bits));
}

double RapporModel::Probability(std::size_t x, const BitVector& observed) const {
  if (observed.size() != m_) throw Error(ErrorCode::kDimensionMismatch, "rappor: bit vector length");
  if (x >= m_) throw Error(ErrorCode::kInvalidInput, "rappor: input out of range");
  double p = 1.0;
  for (std::size_t j = 0; j < m_; ++j) {
    const bool original = (j == x);
    p *= (observed[j] == original) ? keep_ : 1.0 - keep_;
  }
  return p;
}

Eigen::VectorXd RapporModel::Column(const BitVector& observed) const {
  if (observed.size() != m_) throw Error(ErrorCode::kDimensionMismatch, "rappor: bit vector length");
  // All inputs share the same factors except at the bit they set, so
  // P(B'|x) = base * ratio(B'_x) with base the all-zeros encoding probability.
  const double flip = 1.0 - keep_;
  double base = 1.0;
  for (std::size_t j = 0; j < m_; ++j) base *= observed[j] ? flip : keep_;
  Eigen::VectorXd column(static_cast<Eigen::Index>(m_));
  for (std::size_t x = 0; x < m_; ++x) {
    column[static_cast<Eigen::Index>(x)] =
        observed[x] ? base / flip * keep_ : base / keep_ * flip;
  }
  return column;
}

Mechanism Rappor(std::size_t space_size, double epsilon) {
  if (space_size > kMaxExplicitRapporSize) {
    throw Error(ErrorCode::kCapacity, "rappor: explicit table limited to space size " +
                                          std::to_string(kMaxExplicitRapporSize));
  }
  RapporModel model(space_size, epsilon);
  const std::uint64_t outputs = std::uint64_t{1} << space_size;
  Eigen::MatrixXd probs(static_cast<Eigen::Index>(space_size), static_cast<Eigen::Index>(outputs));
  std::vector<std::string> labels(outputs);
  for (std::uint64_t k = 0; k < outputs; ++k) {
    const BitVector bits = BitVector::Unpack(k, space_size);
    labels[k] = bits.ToString();
    probs.col(static_cast<Eigen::Index>(k)) = model.Column(bits);
  }
  std::ostringstream id;
  id << "rappor-" << space_size << "-" << std::setprecision(17) << epsilon;
  return Mechanism(id.str(), std::move(probs), IndexLabels(space_size), std::move(labels));
}

std::size_t SampleOutput(const Mechanism& m, std::size_t x, RandomSource& rng) {
  if (x >= m.num_inputs()) throw Error(ErrorCode::kInvalidInput, "sample_output: input out of range");
  const double u = rng.Uniform();
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t z = 0; z < m.num_outputs(); ++z) {
    const double p = m(x, z);
    if (p > 0.0) last_positive = z;
    running += p;
    if (u < running) return z;
  }
  return last_positive;
}

MechanismSampler::MechanismSampler(const Mechanism& m) {
  rows_.reserve(m.num_inputs());
  for (Eigen::Index x = 0; x < m.probs().rows(); ++x) {
    rows_.emplace_back(Eigen::VectorXd(m.probs().row(x).transpose()));
  }
}

std::size_t MechanismSampler::Sample(std::size_t x, RandomSource& rng) const {
  if (x >= rows_.size()) throw Error(ErrorCode::kInvalidInput, "sampler: input out of range");
  return rows_[x].Sample(rng);
}

}  // namespace ibu
