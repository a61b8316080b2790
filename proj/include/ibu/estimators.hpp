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

#ifndef IBU_ESTIMATORS_HPP_
#define IBU_ESTIMATORS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ibu/empirical.hpp"
#include "ibu/likelihood.hpp"
#include "ibu/mechanisms.hpp"
#include "ibu/simplex.hpp"

namespace ibu {

struct EmConfig {
  // Stop once |L(theta^t) - L(theta^{t-1})| < delta.
  double delta = 1e-10;
  std::size_t max_iters = 1'000'000;
  // Starting point; uniform when empty. Must have every component > 0.
  std::optional<Distribution> theta0;
};

struct EmTrace {
  Distribution estimate = Distribution::Uniform(1);
  // L(theta^0), L(theta^1), ..., L(theta^iterations).
  std::vector<double> log_likelihoods;
  // TV(theta^t, theta^{t-1}) for t = 1..iterations.
  std::vector<double> step_tv;
  std::size_t iterations = 0;
  // False when max_iters was reached before the stopping rule fired.
  bool converged = false;
};

// One M-step: theta'_x = (1/n) sum_i theta_x g(x,i) / sum_u theta_u g(u,i).
// Components with theta_x = 0 stay zero. Throws kInfiniteLogLikelihood when a
// column has zero probability under theta.
Distribution EmStep(const Distribution& theta, const OutputsProbabilityMatrix& g);

// Iterates EmStep from cfg.theta0 (uniform by default). Throws kInvalidStart
// for a start with a zero component, kInfeasibleStart when L(theta^0) is
// -infinity, kInvalidInput for delta <= 0 or max_iters == 0.
EmTrace EmEstimate(const OutputsProbabilityMatrix& g, const EmConfig& cfg = {});

// theta^0 = q, allowed only when q has full support on an input space of the
// same size (throws kInvalidStart otherwise).
Distribution EmpiricalStart(const EmpiricalDistribution& q, std::size_t input_size);

// theta'_x = sum_z q_z theta_x a(x,z) / sum_u theta_u a(u,z).
Distribution IbuStep(const Distribution& theta, const Mechanism& mechanism,
                     const EmpiricalDistribution& q);

// One observable per user, each through its own mechanism.
struct UserReport {
  std::size_t observable = 0;
  const Mechanism* mechanism = nullptr;
};

// theta'_x = (1/n) sum_i theta_x a^i(x, z^i) / sum_u theta_u a^i(u, z^i).
Distribution HeterogeneousStep(const Distribution& theta, std::span<const UserReport> reports);

// {x : g_x >= (1 - rel_tol) max_u g_u}; every distribution supported on this
// set maximizes the likelihood of a single input. Throws kNoFeasibleMle for
// an all-zero column.
std::vector<std::size_t> SingleInputMleSet(const Eigen::VectorXd& column, double rel_tol = 1e-12);

// Same set via argmin_x KL(q || a_x); rows at infinite divergence excluded.
// Ties are taken within abs_tol in nats.
std::vector<std::size_t> SingleInputMleKl(const EmpiricalDistribution& q, const Mechanism& mechanism,
                                          double abs_tol = 1e-12);

enum class InvMode { kTruncateNormalize, kProject };

// Condition-number limit for the inversion baselines.
inline constexpr double kMaxConditionNumber = 1e12;

// v = q A^{-1}. Throws kNotInvertible for non-square or ill-conditioned A.
RealVector InvertEmpirical(const EmpiricalDistribution& q, const Mechanism& mechanism);

// INV-N (kTruncateNormalize) or INV-P (kProject) applied to q A^{-1}.
Distribution InvEstimate(const EmpiricalDistribution& q, const Mechanism& mechanism, InvMode mode);

// Per-bit debiasing t_b = (f_b - p_flip) / (p_keep - p_flip) of observed bit
// frequencies, followed by the mode's post-processing.
Distribution RapporInvEstimate(std::span<const BitVector> observed, double epsilon, InvMode mode);
Distribution RapporInvFromBitFrequencies(const Eigen::VectorXd& bit_frequencies, double epsilon,
                                         InvMode mode);

// Writes "iteration,log_likelihood,tv_to_previous".
void WriteTraceCsv(std::ostream& out, const EmTrace& trace);

}  // namespace ibu

#endif  // IBU_ESTIMATORS_HPP_
