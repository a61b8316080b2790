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

#ifndef IBU_HARNESS_HPP_
#define IBU_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ibu/analysis.hpp"
#include "ibu/empirical.hpp"
#include "ibu/estimators.hpp"
#include "ibu/grid.hpp"
#include "ibu/mechanisms.hpp"
#include "ibu/simplex.hpp"

namespace ibu {

// Mechanism named by the CLI or a config file. Mechanisms whose shape depends
// on the input space (krr, identity, rappor, truncated-geometric) take it
// from `size` / `range_lo..range_hi`; planar-geometric takes the grid.
struct MechanismSpec {
  std::string name;  // identity | krr | truncated-geometric | planar-geometric | rappor
  std::size_t size = 0;
  double epsilon = 1.0;
  long long range_lo = 0;
  long long range_hi = 0;
  std::optional<Grid> grid;
  double tail_tol = 1e-9;
};

Mechanism BuildMechanism(const MechanismSpec& spec);

// Parses "sf" or "lat_min,lat_max,lon_min,lon_max,rows,cols,cell_side_km".
Grid ParseGrid(const std::string& text);

struct GowallaIngest {
  EmpiricalDistribution counts;
  // Cell of every in-box record, in file order.
  std::vector<std::size_t> cells;
  std::size_t data_lines = 0;
  std::size_t in_box = 0;
  std::size_t skipped_outside = 0;
  std::size_t skipped_malformed = 0;
};

// Whitespace-separated check-in records; lat/lon read from the given
// 0-indexed columns (2 and 3 in the public Gowalla dump: user, time, lat,
// lon, location id). Blank lines are ignored; malformed and out-of-box lines
// are skipped and tallied. Throws kIo for an unreadable file and
// kInvalidInput when no record falls inside the grid.
GowallaIngest IngestGowalla(const std::filesystem::path& path, const Grid& grid,
                            std::size_t lat_col = 2, std::size_t lon_col = 3);

enum class SourceKind { kBinomial, kUniformInterval, kCustom, kGowalla };

struct ExperimentConfig {
  SourceKind source = SourceKind::kBinomial;
  std::size_t space_size = 100;
  double binomial_p = 0.5;
  std::size_t interval_lo = 0;
  std::size_t interval_hi = 0;
  std::vector<double> weights;
  std::string gowalla_path;
  std::size_t gowalla_lat_col = 2;
  std::size_t gowalla_lon_col = 3;
  std::optional<Grid> grid;

  std::string mechanism = "truncated-geometric";
  double tail_tol = 1e-9;
  std::vector<double> epsilons{0.1};
  // 0 with a gowalla source means "obfuscate every check-in once".
  std::size_t samples = 100000;
  std::size_t repetitions = 1;
  std::vector<std::string> estimators{"em", "invn", "invp"};
  std::vector<Metric> metrics{Metric::kTv};
  std::uint64_t seed = 1;
  double em_delta = 1e-10;
  std::size_t em_max_iters = 1'000'000;
  bool em_empirical_start = false;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys and invalid
// values throw kInvalidInput.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
void ValidateConfig(const ExperimentConfig& cfg);

// Canonical key=value text (every field, fixed order) and its FNV-1a hash;
// output filenames derive from the hash.
std::string CanonicalConfigText(const ExperimentConfig& cfg);
std::uint64_t ConfigHash(const ExperimentConfig& cfg);

// Binomial(space_size - 1, p) over {0, ..., space_size - 1}.
Distribution BinomialDistribution(std::size_t space_size, double p);
// Uniform on {lo, ..., hi}, zero elsewhere.
Distribution UniformOnInterval(std::size_t space_size, std::size_t lo, std::size_t hi);

std::uint64_t CellSeed(std::uint64_t seed, double epsilon, std::size_t repetition);

struct MetricRow {
  double epsilon = 0.0;
  std::size_t repetition = 0;
  std::string estimator;
  Metric metric = Metric::kTv;
  double value = 0.0;
};

struct EstimateRecord {
  double epsilon = 0.0;
  std::size_t repetition = 0;
  std::string estimator;
  Distribution estimate = Distribution::Uniform(1);
  // Populated for "em" only.
  std::vector<double> log_likelihoods;
  std::size_t em_iterations = 0;
  bool em_converged = false;
};

struct CellError {
  double epsilon = 0.0;
  std::size_t repetition = 0;
  std::string estimator;
  std::string message;
};

struct RunResult {
  Distribution truth = Distribution::Uniform(1);
  std::optional<Grid> grid;
  std::vector<MetricRow> values;
  // Distance from the raw noisy data to the truth ("noisy" estimator): the
  // empirical output distribution for square mechanisms, normalized bit
  // frequencies for rappor.
  std::vector<MetricRow> baselines;
  std::vector<EstimateRecord> estimates;
  std::vector<CellError> errors;
};

// For every (epsilon, repetition): sample inputs, obfuscate, estimate with
// each estimator and score against the true distribution. Cells run in
// parallel; results are merged in (epsilon, repetition) order and depend
// only on the config.
RunResult RunExperiment(const ExperimentConfig& cfg);

// Output formats for EmitResults.
struct EmitFormats {
  bool csv = true;
  bool heatmap_svg = false;
};
EmitFormats ParseFormats(const std::string& text);

// results-<hash>.csv (epsilon,repetition,estimator,metric,value) and
// summary-<hash>.csv (baselines, EM iteration counts); heatmaps for
// grid-shaped runs. Returns the written paths.
std::vector<std::filesystem::path> EmitResults(const RunResult& result, const ExperimentConfig& cfg,
                                               const std::filesystem::path& out_dir,
                                               const EmitFormats& formats);

void WriteResultsCsv(std::ostream& out, const RunResult& result);
void WriteHeatmapSvg(std::ostream& out, const Grid& grid, const Distribution& d,
                     const std::string& title);

// --- counterexamples ---------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct CounterexampleReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool AllPassed() const;
  std::string ToText() const;
};

// The non-invertible mechanism [[1/2,1/3,1/6],[1/3,1/3,1/3],[1/6,1/3,1/2]].
Eigen::Matrix3d NonInvertibleExample();
// 3-RR with e^eps = 2: 1/2 on the diagonal, 1/4 elsewhere.
Eigen::Matrix3d ThreeRrExample();

// Central finite difference of L at (0,1,0) for observations {1,2,2,3}
// under `a`, moving `coordinate` (0 or 2) against theta2 = 1 - theta1 - theta3.
double BoundaryPartial(const Eigen::Matrix3d& a, int coordinate, double step = 1e-6);

// Runs the four checks: non-unique MLE, IBU fixed point, boundary partial
// derivatives of -0.5, and EM convergence to (0,1,0).
CounterexampleReport VerifyCounterexamples(const Eigen::Matrix3d& three_rr = ThreeRrExample());

}  // namespace ibu

#endif  // IBU_HARNESS_HPP_
