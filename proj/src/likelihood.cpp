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

#include "ibu/likelihood.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "ibu/error.hpp"

namespace ibu {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void RequireSameSpace(const Distribution& theta, const OutputsProbabilityMatrix& g) {
  if (theta.size() != g.num_inputs()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "distribution has " + std::to_string(theta.size()) + " entries, G has " +
                    std::to_string(g.num_inputs()) + " rows");
  }
}

}  // namespace

EmpiricalDistribution EmpiricalDistribution::FromObservations(
    std::span<const std::size_t> observations, std::size_t space_size) {
  if (observations.empty()) throw Error(ErrorCode::kInvalidInput, "empirical: no observations");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space_size));
  for (std::size_t z : observations) {
    if (z >= space_size) throw Error(ErrorCode::kInvalidInput, "empirical: observable out of range");
    counts[static_cast<Eigen::Index>(z)] += 1.0;
  }
  return EmpiricalDistribution(std::move(counts), static_cast<double>(observations.size()));
}

EmpiricalDistribution EmpiricalDistribution::FromCounts(std::span<const std::uint64_t> counts) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t z = 0; z < counts.size(); ++z) c[static_cast<Eigen::Index>(z)] = static_cast<double>(counts[z]);
  return FromCounts(std::move(c));
}

EmpiricalDistribution EmpiricalDistribution::FromCounts(Eigen::VectorXd counts) {
  if (counts.size() == 0) throw Error(ErrorCode::kInvalidInput, "empirical: empty space");
  if (!counts.allFinite() || (counts.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "empirical: counts must be finite and nonnegative");
  }
  const double total = counts.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidInput, "empirical: zero total count");
  return EmpiricalDistribution(std::move(counts), total);
}

EmpiricalDistribution EmpiricalDistribution::FromFrequencies(const Eigen::VectorXd& q) {
  const Distribution checked = Distribution::FromWeights(Eigen::VectorXd(q));
  return EmpiricalDistribution(checked.weights(), 1.0);
}

MechanismRegistry::MechanismRegistry(std::vector<Mechanism> mechanisms) {
  for (auto& m : mechanisms) Add(std::move(m));
}

void MechanismRegistry::Add(Mechanism mechanism) {
  const std::string id = mechanism.id();
  if (!mechanisms_.emplace(id, std::move(mechanism)).second) {
    throw Error(ErrorCode::kInvalidInput, "registry: duplicate mechanism id " + id);
  }
}

const Mechanism& MechanismRegistry::Get(const std::string& id) const {
  auto it = mechanisms_.find(id);
  if (it == mechanisms_.end()) throw Error(ErrorCode::kUnknownMechanism, "no mechanism with id " + id);
  return it->second;
}

OutputsProbabilityMatrix::OutputsProbabilityMatrix(Eigen::MatrixXd g)
    : OutputsProbabilityMatrix(g, Eigen::VectorXd::Ones(g.cols())) {}

OutputsProbabilityMatrix::OutputsProbabilityMatrix(Eigen::MatrixXd g, Eigen::VectorXd multiplicities)
    : g_(std::move(g)), multiplicities_(std::move(multiplicities)) {
  if (g_.rows() == 0) throw Error(ErrorCode::kInvalidInput, "G: empty input space");
  if (multiplicities_.size() != g_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "G: one multiplicity per column required");
  }
  if (!g_.allFinite() || (g_.array() < 0.0).any() || (g_.array() > 1.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "G: entries must lie in [0, 1]");
  }
  if (!multiplicities_.allFinite() || (multiplicities_.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "G: multiplicities must be nonnegative");
  }
  num_users_ = multiplicities_.sum();
}

OutputsProbabilityMatrix BuildG(std::span<const ObservationRecord> records,
                                const MechanismRegistry& registry) {
  if (records.empty()) throw Error(ErrorCode::kInvalidInput, "build_g: no records");
  std::optional<std::size_t> inputs;
  Eigen::MatrixXd g;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ObservationRecord& record = records[i];
    if (record.observables.empty()) {
      throw Error(ErrorCode::kInvalidInput, "build_g: record " + std::to_string(i) + " is empty");
    }
    for (const Observation& obs : record.observables) {
      const Mechanism& m = registry.Get(obs.mechanism_id);
      if (!inputs) {
        inputs = m.num_inputs();
        g = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(*inputs),
                                  static_cast<Eigen::Index>(records.size()));
      } else if (m.num_inputs() != *inputs) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "build_g: mechanism " + m.id() + " has a different input space");
      }
      if (obs.observable >= m.num_outputs()) {
        throw Error(ErrorCode::kInvalidInput, "build_g: observable " + std::to_string(obs.observable) +
                                                  " not in output space of " + m.id());
      }
      g.col(static_cast<Eigen::Index>(i)).array() *=
          m.probs().col(static_cast<Eigen::Index>(obs.observable)).array();
    }
  }
  return OutputsProbabilityMatrix(std::move(g));
}

OutputsProbabilityMatrix GroupedG(const Mechanism& mechanism, const EmpiricalDistribution& q) {
  if (q.size() != mechanism.num_outputs()) {
    throw Error(ErrorCode::kDimensionMismatch, "grouped G: empirical distribution size differs "
                                               "from mechanism output space");
  }
  std::vector<Eigen::Index> observed;
  for (Eigen::Index z = 0; z < q.counts().size(); ++z) {
    if (q.counts()[z] > 0.0) observed.push_back(z);
  }
  Eigen::MatrixXd g(mechanism.probs().rows(), static_cast<Eigen::Index>(observed.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(observed.size()));
  for (std::size_t k = 0; k < observed.size(); ++k) {
    g.col(static_cast<Eigen::Index>(k)) = mechanism.probs().col(observed[k]);
    weights[static_cast<Eigen::Index>(k)] = q.counts()[observed[k]];
  }
  return OutputsProbabilityMatrix(std::move(g), std::move(weights));
}

double LogLikelihood(const Distribution& theta, const OutputsProbabilityMatrix& g) {
  RequireSameSpace(theta, g);
  const Eigen::VectorXd inner = g.g().transpose() * theta.weights();
  double total = 0.0;
  for (Eigen::Index i = 0; i < inner.size(); ++i) {
    const double w = g.multiplicities()[i];
    if (w == 0.0) continue;
    if (!(inner[i] > 0.0)) return kNegInf;
    total += w * std::log(inner[i]);
  }
  return total;
}

Distribution Posterior(const Distribution& theta, const OutputsProbabilityMatrix& g,
                       std::size_t column) {
  RequireSameSpace(theta, g);
  if (column >= g.num_columns()) throw Error(ErrorCode::kInvalidInput, "posterior: column out of range");
  Eigen::VectorXd joint =
      theta.weights().cwiseProduct(g.g().col(static_cast<Eigen::Index>(column)));
  const double evidence = joint.sum();
  if (!(evidence > 0.0)) {
    throw Error(ErrorCode::kInfiniteLogLikelihood,
                "posterior: column " + std::to_string(column) + " has zero probability under theta");
  }
  return MakeDistributionUnchecked(joint / evidence);
}

Eigen::VectorXd ExpectedCounts(const Distribution& theta_prev, const OutputsProbabilityMatrix& g) {
  RequireSameSpace(theta_prev, g);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(theta_prev.weights().size());
  for (std::size_t i = 0; i < g.num_columns(); ++i) {
    const double w = g.multiplicities()[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    psi += w * Posterior(theta_prev, g, i).weights();
  }
  return psi;
}

double QValue(const Distribution& theta, const Distribution& theta_prev,
              const OutputsProbabilityMatrix& g) {
  RequireSameSpace(theta, g);
  RequireSameSpace(theta_prev, g);
  if (!std::isfinite(LogLikelihood(theta_prev, g))) {
    throw Error(ErrorCode::kInfeasibleStart, "q_value: theta_prev has -infinite log-likelihood");
  }
  double k_term = 0.0;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(theta.weights().size());
  for (std::size_t i = 0; i < g.num_columns(); ++i) {
    const double w = g.multiplicities()[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    const Eigen::VectorXd post = Posterior(theta_prev, g, i).weights();
    psi += w * post;
    for (Eigen::Index x = 0; x < post.size(); ++x) {
      // post_x > 0 implies g(x, i) > 0.
      if (post[x] > 0.0) k_term += w * post[x] * std::log(g.g()(x, static_cast<Eigen::Index>(i)));
    }
  }
  double value = k_term;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    if (psi[x] == 0.0) continue;
    if (theta.weights()[x] == 0.0) return kNegInf;
    value += psi[x] * std::log(theta.weights()[x]);
  }
  return value;
}

double HValue(const Distribution& theta, const Distribution& theta_prev,
              const OutputsProbabilityMatrix& g) {
  RequireSameSpace(theta, g);
  RequireSameSpace(theta_prev, g);
  double value = 0.0;
  for (std::size_t i = 0; i < g.num_columns(); ++i) {
    const double w = g.multiplicities()[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    const Eigen::VectorXd prev = Posterior(theta_prev, g, i).weights();
    const Eigen::VectorXd joint = theta.weights().cwiseProduct(g.g().col(static_cast<Eigen::Index>(i)));
    const double evidence = joint.sum();
    for (Eigen::Index x = 0; x < prev.size(); ++x) {
      if (prev[x] == 0.0) continue;
      if (!(joint[x] > 0.0)) return std::numeric_limits<double>::infinity();
      value -= w * prev[x] * std::log(joint[x] / evidence);
    }
  }
  return value;
}

}  // namespace ibu
