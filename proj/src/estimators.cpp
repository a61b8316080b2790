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

#include "ibu/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "ibu/error.hpp"

namespace ibu {

namespace {

// Weights this small are set to zero during EM. They carry no measurable
// likelihood, and once they drift into the subnormal range every product
// touching them becomes an order of magnitude slower.
constexpr double kEmFlushBelow = 1e-250;

// Weighted evidence-ratio vector r_i = w_i / (theta . g_i); throws when an
// observed column has zero evidence.
Eigen::VectorXd EvidenceRatios(const Eigen::VectorXd& evidence, const Eigen::VectorXd& weights) {
  Eigen::VectorXd r(evidence.size());
  for (Eigen::Index i = 0; i < evidence.size(); ++i) {
    if (weights[i] == 0.0) {
      r[i] = 0.0;
    } else if (!(evidence[i] > 0.0)) {
      throw Error(ErrorCode::kInfiniteLogLikelihood,
                  "column " + std::to_string(i) + " has zero probability under theta");
    } else {
      r[i] = weights[i] / evidence[i];
    }
  }
  return r;
}

double WeightedLogSum(const Eigen::VectorXd& evidence, const Eigen::VectorXd& weights) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < evidence.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (!(evidence[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    total += weights[i] * std::log(evidence[i]);
  }
  return total;
}

Distribution PostProcess(RealVector v, InvMode mode) {
  return mode == InvMode::kProject ? ProjectToSimplex(v) : TruncateNormalize(v);
}

}  // namespace

Distribution EmStep(const Distribution& theta, const OutputsProbabilityMatrix& g) {
  if (theta.size() != g.num_inputs()) throw Error(ErrorCode::kDimensionMismatch, "em_step: size mismatch");
  const Eigen::VectorXd evidence = g.g().transpose() * theta.weights();
  const Eigen::VectorXd r = EvidenceRatios(evidence, g.multiplicities());
  RealVector next = theta.weights().cwiseProduct(g.g() * r) / g.num_users();
  return MakeDistributionUnchecked(std::move(next));
}

EmTrace EmEstimate(const OutputsProbabilityMatrix& g, const EmConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw Error(ErrorCode::kInvalidInput, "em: delta must be positive");
  if (cfg.max_iters == 0) throw Error(ErrorCode::kInvalidInput, "em: max_iters must be >= 1");
  if (!(g.num_users() > 0.0)) throw Error(ErrorCode::kInvalidInput, "em: no observations");
  Distribution theta = cfg.theta0 ? *cfg.theta0 : Distribution::Uniform(g.num_inputs());
  if (theta.size() != g.num_inputs()) throw Error(ErrorCode::kDimensionMismatch, "em: theta0 size mismatch");
  if (!theta.HasFullSupport()) {
    throw Error(ErrorCode::kInvalidStart, "em: theta0 must give every input positive probability");
  }

  const Eigen::MatrixXd& gm = g.g();
  const Eigen::VectorXd& w = g.multiplicities();
  const double n = g.num_users();

  EmTrace trace;
  Eigen::VectorXd evidence = gm.transpose() * theta.weights();
  double current = WeightedLogSum(evidence, w);
  if (!std::isfinite(current)) {
    throw Error(ErrorCode::kInfeasibleStart, "em: theta0 has -infinite log-likelihood");
  }
  trace.log_likelihoods.push_back(current);

  RealVector weights = theta.weights();
  for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
    RealVector next = weights.cwiseProduct(gm * EvidenceRatios(evidence, w)) / n;
    next = (next.array() < kEmFlushBelow).select(0.0, next);
    next /= next.sum();
    evidence.noalias() = gm.transpose() * next;
    const double updated = WeightedLogSum(evidence, w);
    trace.step_tv.push_back(0.5 * (next - weights).cwiseAbs().sum());
    trace.log_likelihoods.push_back(updated);
    trace.iterations = t;
    weights = std::move(next);
    const double gap = std::abs(updated - current);
    current = updated;
    if (gap < cfg.delta) {
      trace.converged = true;
      break;
    }
  }
  trace.estimate = MakeDistributionUnchecked(std::move(weights));
  return trace;
}

Distribution EmpiricalStart(const EmpiricalDistribution& q, std::size_t input_size) {
  if (q.size() != input_size) {
    throw Error(ErrorCode::kInvalidStart, "empirical start needs observables identical to inputs");
  }
  if (!q.HasFullSupport()) {
    throw Error(ErrorCode::kInvalidStart,
                "empirical start is valid only if every observable was seen at least once");
  }
  return MakeDistributionUnchecked(q.frequencies());
}

Distribution IbuStep(const Distribution& theta, const Mechanism& mechanism,
                     const EmpiricalDistribution& q) {
  if (theta.size() != mechanism.num_inputs() || q.size() != mechanism.num_outputs()) {
    throw Error(ErrorCode::kDimensionMismatch, "ibu_step: size mismatch");
  }
  const Eigen::MatrixXd& a = mechanism.probs();
  const Eigen::VectorXd freq = q.frequencies();
  const Eigen::VectorXd evidence = a.transpose() * theta.weights();
  Eigen::VectorXd ratio = Eigen::VectorXd::Zero(freq.size());
  for (Eigen::Index z = 0; z < freq.size(); ++z) {
    if (freq[z] == 0.0) continue;
    if (!(evidence[z] > 0.0)) {
      throw Error(ErrorCode::kInfiniteLogLikelihood,
                  "ibu_step: observed output " + std::to_string(z) + " impossible under theta");
    }
    ratio[z] = freq[z] / evidence[z];
  }
  return MakeDistributionUnchecked(theta.weights().cwiseProduct(a * ratio));
}

Distribution HeterogeneousStep(const Distribution& theta, std::span<const UserReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kInvalidInput, "heterogeneous_step: no reports");
  RealVector acc = RealVector::Zero(theta.weights().size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const UserReport& report = reports[i];
    if (report.mechanism == nullptr) throw Error(ErrorCode::kInvalidInput, "heterogeneous_step: null mechanism");
    const Mechanism& m = *report.mechanism;
    if (m.num_inputs() != theta.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "heterogeneous_step: mechanism " + m.id() +
                                                     " has a different input space");
    }
    if (report.observable >= m.num_outputs()) {
      throw Error(ErrorCode::kInvalidInput, "heterogeneous_step: observable out of range");
    }
    const RealVector joint =
        theta.weights().cwiseProduct(m.probs().col(static_cast<Eigen::Index>(report.observable)));
    const double evidence = joint.sum();
    if (!(evidence > 0.0)) {
      throw Error(ErrorCode::kInfiniteLogLikelihood,
                  "heterogeneous_step: user " + std::to_string(i) + " impossible under theta");
    }
    acc += joint / evidence;
  }
  return MakeDistributionUnchecked(acc / static_cast<double>(reports.size()));
}

std::vector<std::size_t> SingleInputMleSet(const Eigen::VectorXd& column, double rel_tol) {
  if (column.size() == 0 || !(column.maxCoeff() > 0.0)) {
    throw Error(ErrorCode::kNoFeasibleMle, "single input: every input has zero probability");
  }
  const double threshold = (1.0 - rel_tol) * column.maxCoeff();
  std::vector<std::size_t> best;
  for (Eigen::Index x = 0; x < column.size(); ++x) {
    if (column[x] >= threshold) best.push_back(static_cast<std::size_t>(x));
  }
  return best;
}

std::vector<std::size_t> SingleInputMleKl(const EmpiricalDistribution& q, const Mechanism& mechanism,
                                          double abs_tol) {
  if (q.size() != mechanism.num_outputs()) {
    throw Error(ErrorCode::kDimensionMismatch, "single input kl: size mismatch");
  }
  const Eigen::VectorXd freq = q.frequencies();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> divergence(mechanism.num_inputs(), 0.0);
  for (std::size_t x = 0; x < mechanism.num_inputs(); ++x) {
    for (Eigen::Index z = 0; z < freq.size(); ++z) {
      if (freq[z] == 0.0) continue;
      const double a = mechanism(x, static_cast<std::size_t>(z));
      if (a == 0.0) {
        divergence[x] = inf;
        break;
      }
      divergence[x] += freq[z] * std::log(freq[z] / a);
    }
  }
  const double best = *std::min_element(divergence.begin(), divergence.end());
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::kNoFeasibleMle, "single input kl: every row has infinite divergence");
  }
  std::vector<std::size_t> result;
  for (std::size_t x = 0; x < divergence.size(); ++x) {
    if (divergence[x] <= best + abs_tol) result.push_back(x);
  }
  return result;
}

RealVector InvertEmpirical(const EmpiricalDistribution& q, const Mechanism& mechanism) {
  if (!mechanism.is_square()) {
    throw Error(ErrorCode::kNotInvertible, "inv: mechanism " + mechanism.id() + " is not square");
  }
  if (q.size() != mechanism.num_outputs()) throw Error(ErrorCode::kDimensionMismatch, "inv: size mismatch");
  const Eigen::MatrixXd& a = mechanism.probs();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0) || sv[0] / smin >= kMaxConditionNumber) {
    throw Error(ErrorCode::kNotInvertible, "inv: mechanism " + mechanism.id() + " is singular or "
                                           "ill-conditioned");
  }
  // v A = q  <=>  A^T v^T = q^T.
  return a.transpose().partialPivLu().solve(q.frequencies());
}

Distribution InvEstimate(const EmpiricalDistribution& q, const Mechanism& mechanism, InvMode mode) {
  return PostProcess(InvertEmpirical(q, mechanism), mode);
}

Distribution RapporInvFromBitFrequencies(const Eigen::VectorXd& bit_frequencies, double epsilon,
                                         InvMode mode) {
  const double h = std::exp(epsilon / 2.0);
  const double keep = h / (1.0 + h);
  const double flip = 1.0 - keep;
  if (!(keep - flip > 0.0)) {
    throw Error(ErrorCode::kNotIdentifiable, "rappor inv: keep and flip probabilities coincide");
  }
  RealVector t = (bit_frequencies.array() - flip) / (keep - flip);
  return PostProcess(std::move(t), mode);
}

Distribution RapporInvEstimate(std::span<const BitVector> observed, double epsilon, InvMode mode) {
  if (observed.empty()) throw Error(ErrorCode::kInvalidInput, "rappor inv: no observations");
  const std::size_t m = observed.front().size();
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (const BitVector& bits : observed) {
    if (bits.size() != m) throw Error(ErrorCode::kDimensionMismatch, "rappor inv: ragged bit vectors");
    for (std::size_t b = 0; b < m; ++b) {
      if (bits[b]) freq[static_cast<Eigen::Index>(b)] += 1.0;
    }
  }
  freq /= static_cast<double>(observed.size());
  return RapporInvFromBitFrequencies(freq, epsilon, mode);
}

void WriteTraceCsv(std::ostream& out, const EmTrace& trace) {
  out << "iteration,log_likelihood,tv_to_previous\n";
  out << std::setprecision(17);
  for (std::size_t t = 0; t < trace.log_likelihoods.size(); ++t) {
    out << t << ',' << trace.log_likelihoods[t] << ',';
    if (t > 0) out << trace.step_tv[t - 1];
    out << '\n';
  }
}

}  // namespace ibu
