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

#include "ibu/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ibu/error.hpp"

namespace ibu {

TransportPlan SolveTransport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                             const Eigen::MatrixXd& cost) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "transport: cost table shape");
  }
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any() || (cost.array() < 0.0).any() ||
      !cost.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "transport: masses and costs must be nonnegative");
  }
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-9) {
    throw Error(ErrorCode::kInfeasibleStart, "transport: supply and demand masses differ");
  }

  std::vector<Eigen::Index> src, dst;
  for (Eigen::Index i = 0; i < supply.size(); ++i) if (supply[i] > 0.0) src.push_back(i);
  for (Eigen::Index j = 0; j < demand.size(); ++j) if (demand[j] > 0.0) dst.push_back(j);

  TransportPlan plan;
  plan.flow = Eigen::MatrixXd::Zero(supply.size(), demand.size());
  if (src.empty() || dst.empty()) return plan;

  const std::size_t ns = src.size();
  const std::size_t nt = dst.size();
  const std::size_t nv = ns + nt;
  const double eps = 1e-14 * std::max(total, 1.0);
  const double inf = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd c(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t t = 0; t < nt; ++t) c(s, t) = cost(src[s], dst[t]);
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));

  std::vector<double> left(ns), need(nt);
  for (std::size_t s = 0; s < ns; ++s) left[s] = supply[src[s]];
  for (std::size_t t = 0; t < nt; ++t) need[t] = demand[dst[t]];
  // Scale the smaller side so both totals agree exactly.
  {
    double sl = 0, sn = 0;
    for (double v : left) sl += v;
    for (double v : need) sn += v;
    for (double& v : need) v *= sl / sn;
  }

  // Node layout: [0, ns) supplies, [ns, nv) demands.
  std::vector<double> potential(nv, 0.0), dist(nv);
  std::vector<std::size_t> parent(nv);
  std::vector<char> done(nv);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  double remaining = 0.0;
  for (double v : left) remaining += v;
  while (remaining > eps) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), kNone);
    for (std::size_t s = 0; s < ns; ++s) {
      if (left[s] > eps) dist[s] = 0.0;
    }
    for (std::size_t iter = 0; iter < nv; ++iter) {
      std::size_t u = kNone;
      double best = inf;
      for (std::size_t v = 0; v < nv; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == kNone) break;
      done[u] = 1;
      if (u < ns) {
        for (std::size_t t = 0; t < nt; ++t) {
          const std::size_t v = ns + t;
          if (done[v]) continue;
          const double reduced = c(u, t) + potential[u] - potential[v];
          const double cand = dist[u] + std::max(reduced, 0.0);
          if (cand < dist[v]) {
            dist[v] = cand;
            parent[v] = u;
          }
        }
      } else {
        const std::size_t t = u - ns;
        for (std::size_t s = 0; s < ns; ++s) {
          if (done[s] || flow(s, t) <= eps) continue;
          const double reduced = -c(s, t) + potential[u] - potential[s];
          const double cand = dist[u] + std::max(reduced, 0.0);
          if (cand < dist[s]) {
            dist[s] = cand;
            parent[s] = u;
          }
        }
      }
    }

    std::size_t sink = kNone;
    for (std::size_t t = 0; t < nt; ++t) {
      if (need[t] > eps && (sink == kNone || dist[ns + t] < dist[sink])) sink = ns + t;
    }
    if (sink == kNone || !std::isfinite(dist[sink])) {
      throw Error(ErrorCode::kInvalidInput, "transport: no augmenting path");
    }

    // Bottleneck along the path back to its originating supply.
    double amount = need[sink - ns];
    std::size_t v = sink;
    while (parent[v] != kNone) {
      const std::size_t u = parent[v];
      if (u >= ns) amount = std::min(amount, flow(v, u - ns));  // backward arc t -> s
      v = u;
    }
    amount = std::min(amount, left[v]);

    v = sink;
    while (parent[v] != kNone) {
      const std::size_t u = parent[v];
      if (u < ns) {
        flow(u, v - ns) += amount;
      } else {
        flow(v, u - ns) -= amount;
      }
      v = u;
    }
    left[v] -= amount;
    need[sink - ns] -= amount;
    remaining -= amount;

    const double cap = dist[sink];
    for (std::size_t u = 0; u < nv; ++u) potential[u] += std::min(dist[u], cap);
  }

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      const double f = std::max(flow(s, t), 0.0);
      plan.flow(src[s], dst[t]) = f;
      plan.cost += f * c(s, t);
    }
  }
  return plan;
}

}  // namespace ibu
