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

#include "ibu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>

#include "ibu/error.hpp"
#include "ibu/transport.hpp"

namespace ibu {

namespace {

void RequireSameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": length mismatch");
}

// Indices of the first occurrence of every distinct column.
std::vector<Eigen::Index> DistinctColumns(const Eigen::MatrixXd& g) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(g.cols()));
  for (Eigen::Index i = 0; i < g.cols(); ++i) order[static_cast<std::size_t>(i)] = i;
  auto less = [&g](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index x = 0; x < g.rows(); ++x) {
      if (g(x, a) != g(x, b)) return g(x, a) < g(x, b);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<Eigen::Index> distinct;
  for (Eigen::Index i : order) {
    if (distinct.empty() || !(g.col(distinct.back()) == g.col(i))) distinct.push_back(i);
  }
  std::sort(distinct.begin(), distinct.end());
  return distinct;
}

}  // namespace

std::string UniquenessReport::ToText() const {
  std::ostringstream out;
  out << "unique: " << (unique ? "yes" : "no") << '\n';
  out << "rank: " << rank << '\n';
  out << "required_rank: " << required_rank << '\n';
  out << "distinct_columns: " << distinct_columns << '\n';
  if (witness) {
    out << std::setprecision(17);
    auto emit = [&out](const char* name, const Distribution& d) {
      out << name << ':';
      for (std::size_t x = 0; x < d.size(); ++x) out << ' ' << d[x];
      out << '\n';
    };
    emit("witness_theta", witness->first);
    emit("witness_phi", witness->second);
  }
  return out.str();
}

UniquenessReport CheckUniqueness(const Eigen::MatrixXd& g, double tol) {
  if (g.rows() == 0 || g.cols() == 0) throw Error(ErrorCode::kInvalidInput, "uniqueness: empty G");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidInput, "uniqueness: tol must be positive");
  const std::vector<Eigen::Index> distinct = DistinctColumns(g);
  const Eigen::Index rows = g.rows();
  Eigen::MatrixXd augmented(rows, static_cast<Eigen::Index>(distinct.size()) + 1);
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    augmented.col(static_cast<Eigen::Index>(k)) = g.col(distinct[k]);
  }
  augmented.col(augmented.cols() - 1).setOnes();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(augmented, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double threshold = tol * sv[0];
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > threshold) ++rank;
  }

  UniquenessReport report;
  report.rank = rank;
  report.required_rank = static_cast<int>(rows);
  report.distinct_columns = distinct.size();
  report.unique = rank == rows;
  if (!report.unique) {
    Eigen::VectorXd v = svd.matrixU().col(rank);
    v.array() -= v.mean();
    const double scale = v.cwiseAbs().maxCoeff();
    const double c = (1.0 / static_cast<double>(rows)) / scale;
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(rows, 1.0 / static_cast<double>(rows));
    report.witness.emplace(MakeDistributionUnchecked(u + c * v), MakeDistributionUnchecked(u - c * v));
  }
  return report;
}

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kTv: return "tv";
    case Metric::kKl: return "kl";
    case Metric::kEmd: return "emd";
  }
  return "unknown";
}

std::optional<Metric> ParseMetric(std::string_view name) {
  if (name == "tv") return Metric::kTv;
  if (name == "kl") return Metric::kKl;
  if (name == "emd") return Metric::kEmd;
  return std::nullopt;
}

double TotalVariation(const Distribution& p, const Distribution& q) {
  RequireSameLength(p.size(), q.size(), "total_variation");
  return 0.5 * (p.weights() - q.weights()).cwiseAbs().sum();
}

double KlDivergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  RequireSameLength(static_cast<std::size_t>(p.size()), static_cast<std::size_t>(q.size()), "kl_divergence");
  double total = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    if (q[x] == 0.0) return std::numeric_limits<double>::infinity();
    total += p[x] * std::log(p[x] / q[x]);
  }
  return std::max(total, 0.0);
}

double KlDivergence(const Distribution& p, const Distribution& q) {
  return KlDivergence(p.weights(), q.weights());
}

double Emd(const Distribution& p, const Distribution& q, const Eigen::MatrixXd& ground) {
  RequireSameLength(p.size(), q.size(), "emd");
  if (ground.rows() != static_cast<Eigen::Index>(p.size()) || ground.cols() != ground.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "emd: ground table shape");
  }
  return SolveTransport(p.weights(), q.weights(), ground).cost;
}

Eigen::MatrixXd LineGround(std::size_t n, double spacing) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd ground(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) ground(i, j) = spacing * static_cast<double>(std::abs(i - j));
  return ground;
}

Eigen::MatrixXd GridGround(const Grid& grid) {
  const auto size = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd ground(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j)
      ground(i, j) = grid.DistanceKm(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return ground;
}

double TypesBound(std::size_t k, std::size_t z_size, double delta) {
  if (k == 0 || z_size == 0 || !(delta > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "types_bound: arguments must be positive");
  }
  const double log_bound = static_cast<double>(z_size) * std::log1p(static_cast<double>(k)) -
                           static_cast<double>(k) * delta * std::log(2.0);
  return std::exp(log_bound);
}

std::size_t TypesBoundDecreasingFrom(std::size_t z_size, double delta) {
  // d/dk [|Z| ln(1+k) - k delta ln 2] <= 0  <=>  k >= |Z| / (delta ln 2) - 1.
  const double k0 = static_cast<double>(z_size) / (delta * std::log(2.0)) - 1.0;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(k0)));
}

std::vector<SurfacePoint> LikelihoodSurface(const OutputsProbabilityMatrix& g, std::size_t resolution) {
  if (g.num_inputs() != 3) {
    throw Error(ErrorCode::kUnsupported, "likelihood_surface: only |X| = 3 is supported");
  }
  if (resolution < 2) throw Error(ErrorCode::kInvalidInput, "likelihood_surface: resolution must be >= 2");
  const double h = 1.0 / static_cast<double>(resolution - 1);
  std::vector<SurfacePoint> surface;
  surface.reserve(resolution * (resolution + 1) / 2);
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; i + j < resolution; ++j) {
      const double t1 = static_cast<double>(i) * h;
      const double t3 = static_cast<double>(j) * h;
      const double t2 = std::max(0.0, 1.0 - t1 - t3);
      const double l = LogLikelihood(MakeDistributionUnchecked(Eigen::Vector3d(t1, t2, t3)), g);
      surface.push_back({t1, t3, l});
    }
  }
  return surface;
}

void WriteSurfaceCsv(std::ostream& out, std::span<const SurfacePoint> surface) {
  out << "theta1,theta3,L\n";
  out << std::setprecision(17);
  for (const SurfacePoint& p : surface) {
    out << p.theta1 << ',' << p.theta3 << ',';
    if (std::isinf(p.log_likelihood)) {
      out << "-inf";
    } else {
      out << p.log_likelihood;
    }
    out << '\n';
  }
}

}  // namespace ibu
