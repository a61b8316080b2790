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

#ifndef IBU_TRANSPORT_HPP_
#define IBU_TRANSPORT_HPP_

#include <Eigen/Core>

namespace ibu {

struct TransportPlan {
  double cost = 0.0;
  // flow(i, j): mass moved from supply i to demand j.
  Eigen::MatrixXd flow;
};

// Exact minimum-cost transportation between nonnegative supply and demand
// vectors of equal total mass (within 1e-9), under a nonnegative cost table.
// Successive shortest paths with Dijkstra on reduced costs over the dense
// bipartite residual graph.
TransportPlan SolveTransport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                             const Eigen::MatrixXd& cost);

}  // namespace ibu

#endif  // IBU_TRANSPORT_HPP_
