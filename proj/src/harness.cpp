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

#include "ibu/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <atomic>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ibu/error.hpp"
#include "ibu/likelihood.hpp"
#include "ibu/random.hpp"

namespace ibu {

namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseDouble(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput, "config: " + key + " expects a number, got '" + value + "'");
  }
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput,
                "config: " + key + " expects a nonnegative integer, got '" + value + "'");
  }
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string SourceName(SourceKind kind) {
  switch (kind) {
    case SourceKind::kBinomial: return "binomial";
    case SourceKind::kUniformInterval: return "uniform-interval";
    case SourceKind::kCustom: return "custom";
    case SourceKind::kGowalla: return "gowalla";
  }
  return "unknown";
}

std::string GridText(const Grid& g) {
  std::ostringstream out;
  out << std::setprecision(17) << g.lat_min() << ',' << g.lat_max() << ',' << g.lon_min() << ','
      << g.lon_max() << ',' << g.rows() << ',' << g.cols() << ',' << g.cell_side_km();
  return out.str();
}

}  // namespace

Mechanism BuildMechanism(const MechanismSpec& spec) {
  if (spec.name == "identity") return IdentityMechanism(spec.size);
  if (spec.name == "krr") return KRandomizedResponse(spec.size, spec.epsilon);
  if (spec.name == "rappor") return Rappor(spec.size, spec.epsilon);
  if (spec.name == "truncated-geometric") {
    if (spec.range_lo == 0 && spec.range_hi == 0 && spec.size > 0) {
      return TruncatedGeometric(0, static_cast<long long>(spec.size) - 1, spec.epsilon);
    }
    return TruncatedGeometric(spec.range_lo, spec.range_hi, spec.epsilon);
  }
  if (spec.name == "planar-geometric") {
    if (!spec.grid) throw Error(ErrorCode::kInvalidInput, "planar-geometric needs a grid");
    return PlanarGeometric(*spec.grid, spec.epsilon, spec.tail_tol);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown mechanism '" + spec.name + "'");
}

Grid ParseGrid(const std::string& text) {
  if (Trim(text) == "sf") return Grid::SanFranciscoNorth();
  const std::vector<std::string> parts = SplitList(text);
  if (parts.size() != 7) {
    throw Error(ErrorCode::kInvalidInput,
                "grid: expected 'sf' or lat_min,lat_max,lon_min,lon_max,rows,cols,cell_side_km");
  }
  return Grid::Create(ParseDouble("grid", parts[0]), ParseDouble("grid", parts[1]),
                      ParseDouble("grid", parts[2]), ParseDouble("grid", parts[3]),
                      static_cast<int>(ParseUnsigned("grid", parts[4])),
                      static_cast<int>(ParseUnsigned("grid", parts[5])), ParseDouble("grid", parts[6]));
}

GowallaIngest IngestGowalla(const std::filesystem::path& path, const Grid& grid, std::size_t lat_col,
                            std::size_t lon_col) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  const std::size_t needed = std::max(lat_col, lon_col) + 1;
  std::vector<std::uint64_t> counts(grid.size(), 0);
  std::vector<std::size_t> cells;
  std::size_t data_lines = 0, outside = 0, malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string token;
    while (fields >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    ++data_lines;
    if (tokens.size() < needed) {
      ++malformed;
      continue;
    }
    double lat = 0, lon = 0;
    try {
      std::size_t used_lat = 0, used_lon = 0;
      lat = std::stod(tokens[lat_col], &used_lat);
      lon = std::stod(tokens[lon_col], &used_lon);
      if (used_lat != tokens[lat_col].size() || used_lon != tokens[lon_col].size()) {
        throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception&) {
      ++malformed;
      continue;
    }
    const auto cell = grid.LocateCell(lat, lon);
    if (!cell) {
      ++outside;
      continue;
    }
    ++counts[*cell];
    cells.push_back(*cell);
  }
  if (cells.empty()) throw Error(ErrorCode::kInvalidInput, "gowalla: no check-ins inside the grid");
  const std::size_t in_box = cells.size();
  return GowallaIngest{EmpiricalDistribution::FromCounts(counts), std::move(cells), data_lines, in_box,
                       outside, malformed};
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  bool samples_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidInput, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key == "source") {
      if (value == "binomial") cfg.source = SourceKind::kBinomial;
      else if (value == "uniform-interval") cfg.source = SourceKind::kUniformInterval;
      else if (value == "custom") cfg.source = SourceKind::kCustom;
      else if (value == "gowalla") cfg.source = SourceKind::kGowalla;
      else throw Error(ErrorCode::kInvalidInput, "config: unknown source '" + value + "'");
    } else if (key == "space_size") {
      cfg.space_size = ParseUnsigned(key, value);
    } else if (key == "binomial_p") {
      cfg.binomial_p = ParseDouble(key, value);
    } else if (key == "interval") {
      const auto parts = SplitList(value);
      if (parts.size() != 2) throw Error(ErrorCode::kInvalidInput, "config: interval expects lo,hi");
      cfg.interval_lo = ParseUnsigned(key, parts[0]);
      cfg.interval_hi = ParseUnsigned(key, parts[1]);
    } else if (key == "weights") {
      cfg.weights.clear();
      for (const auto& w : SplitList(value)) cfg.weights.push_back(ParseDouble(key, w));
    } else if (key == "gowalla_path") {
      cfg.gowalla_path = value;
    } else if (key == "gowalla_lat_col") {
      cfg.gowalla_lat_col = ParseUnsigned(key, value);
    } else if (key == "gowalla_lon_col") {
      cfg.gowalla_lon_col = ParseUnsigned(key, value);
    } else if (key == "grid") {
      if (value.empty()) cfg.grid.reset();
      else cfg.grid = ParseGrid(value);
    } else if (key == "mechanism") {
      cfg.mechanism = value;
    } else if (key == "tail_tol") {
      cfg.tail_tol = ParseDouble(key, value);
    } else if (key == "epsilons") {
      cfg.epsilons.clear();
      for (const auto& e : SplitList(value)) cfg.epsilons.push_back(ParseDouble(key, e));
    } else if (key == "samples") {
      cfg.samples = ParseUnsigned(key, value);
      samples_set = true;
    } else if (key == "repetitions") {
      cfg.repetitions = ParseUnsigned(key, value);
    } else if (key == "estimators") {
      cfg.estimators = SplitList(value);
    } else if (key == "metrics") {
      cfg.metrics.clear();
      for (const auto& m : SplitList(value)) {
        const auto metric = ParseMetric(m);
        if (!metric) throw Error(ErrorCode::kInvalidInput, "config: unknown metric '" + m + "'");
        cfg.metrics.push_back(*metric);
      }
    } else if (key == "seed") {
      cfg.seed = ParseUnsigned(key, value);
    } else if (key == "em_delta") {
      cfg.em_delta = ParseDouble(key, value);
    } else if (key == "em_max_iters") {
      cfg.em_max_iters = ParseUnsigned(key, value);
    } else if (key == "em_start") {
      if (value == "uniform") cfg.em_empirical_start = false;
      else if (value == "empirical") cfg.em_empirical_start = true;
      else throw Error(ErrorCode::kInvalidInput, "config: em_start must be uniform or empirical");
    } else {
      throw Error(ErrorCode::kInvalidInput, "config: unknown key '" + key + "'");
    }
  }
  if (cfg.source == SourceKind::kGowalla && !samples_set) cfg.samples = 0;
  ValidateConfig(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  return ParseConfig(in);
}

void ValidateConfig(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidInput, "config: " + why); };
  if (cfg.repetitions < 1) fail("repetitions must be >= 1");
  if (cfg.samples < 1 && cfg.source != SourceKind::kGowalla) fail("samples must be >= 1");
  if (cfg.estimators.empty()) fail("at least one estimator is required");
  if (cfg.metrics.empty()) fail("at least one metric is required");
  if (cfg.epsilons.empty()) fail("at least one epsilon is required");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0)) fail("epsilons must be positive");
  }
  for (const auto& e : cfg.estimators) {
    if (e != "em" && e != "invn" && e != "invp") fail("unknown estimator '" + e + "'");
  }
  if (!(cfg.em_delta > 0.0)) fail("em_delta must be positive");
  if (cfg.em_max_iters < 1) fail("em_max_iters must be >= 1");
  switch (cfg.source) {
    case SourceKind::kBinomial:
    case SourceKind::kUniformInterval:
      if (cfg.space_size < 2) fail("space_size must be >= 2");
      if (cfg.source == SourceKind::kUniformInterval &&
          (cfg.interval_lo > cfg.interval_hi || cfg.interval_hi >= cfg.space_size)) {
        fail("interval must satisfy lo <= hi < space_size");
      }
      break;
    case SourceKind::kCustom:
      if (cfg.weights.size() < 2) fail("custom source needs at least two weights");
      for (double w : cfg.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) fail("custom weights must be finite and nonnegative");
      }
      if (!(std::accumulate(cfg.weights.begin(), cfg.weights.end(), 0.0) > 0.0)) {
        fail("custom weights must not all be zero");
      }
      break;
    case SourceKind::kGowalla:
      if (cfg.gowalla_path.empty()) fail("gowalla source needs gowalla_path");
      if (!cfg.grid) fail("gowalla source needs a grid");
      break;
  }
  if (cfg.mechanism == "planar-geometric" && !cfg.grid) fail("planar-geometric needs a grid");
}

std::string CanonicalConfigText(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto list = [](const auto& items, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += ',';
      s += fmt(items[i]);
    }
    return s;
  };
  out << "source=" << SourceName(cfg.source) << '\n'
      << "space_size=" << cfg.space_size << '\n'
      << "binomial_p=" << FormatDouble(cfg.binomial_p) << '\n'
      << "interval=" << cfg.interval_lo << ',' << cfg.interval_hi << '\n'
      << "weights=" << list(cfg.weights, FormatDouble) << '\n'
      << "gowalla_path=" << cfg.gowalla_path << '\n'
      << "gowalla_lat_col=" << cfg.gowalla_lat_col << '\n'
      << "gowalla_lon_col=" << cfg.gowalla_lon_col << '\n'
      << "grid=" << (cfg.grid ? GridText(*cfg.grid) : "") << '\n'
      << "mechanism=" << cfg.mechanism << '\n'
      << "tail_tol=" << FormatDouble(cfg.tail_tol) << '\n'
      << "epsilons=" << list(cfg.epsilons, FormatDouble) << '\n'
      << "samples=" << cfg.samples << '\n'
      << "repetitions=" << cfg.repetitions << '\n'
      << "estimators=" << list(cfg.estimators, [](const std::string& s) { return s; }) << '\n'
      << "metrics=" << list(cfg.metrics, [](Metric m) { return std::string(MetricName(m)); }) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "em_delta=" << FormatDouble(cfg.em_delta) << '\n'
      << "em_max_iters=" << cfg.em_max_iters << '\n'
      << "em_start=" << (cfg.em_empirical_start ? "empirical" : "uniform") << '\n';
  return out.str();
}

std::uint64_t ConfigHash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : CanonicalConfigText(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Distribution BinomialDistribution(std::size_t space_size, double p) {
  if (space_size < 2 || !(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "binomial: need space_size >= 2 and p in [0, 1]");
  }
  const double trials = static_cast<double>(space_size - 1);
  RealVector w(static_cast<Eigen::Index>(space_size));
  for (std::size_t k = 0; k < space_size; ++k) {
    const double kk = static_cast<double>(k);
    const double log_choose = std::lgamma(trials + 1) - std::lgamma(kk + 1) - std::lgamma(trials - kk + 1);
    double log_p = log_choose;
    log_p += (kk > 0) ? kk * std::log(p) : 0.0;
    log_p += (trials - kk > 0) ? (trials - kk) * std::log1p(-p) : 0.0;
    w[static_cast<Eigen::Index>(k)] = std::exp(log_p);
  }
  return MakeDistributionUnchecked(std::move(w));
}

Distribution UniformOnInterval(std::size_t space_size, std::size_t lo, std::size_t hi) {
  if (lo > hi || hi >= space_size) throw Error(ErrorCode::kInvalidInput, "uniform interval: bad bounds");
  RealVector w = RealVector::Zero(static_cast<Eigen::Index>(space_size));
  w.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo + 1)).setConstant(1.0);
  return MakeDistributionUnchecked(std::move(w));
}

std::uint64_t CellSeed(std::uint64_t seed, double epsilon, std::size_t repetition) {
  return seed + MixSeed(std::bit_cast<std::uint64_t>(epsilon) ^ MixSeed(repetition));
}

namespace {

struct Source {
  Distribution truth;
  // Actual records to obfuscate when sampling is disabled (gowalla, samples = 0).
  std::vector<std::size_t> fixed_inputs;
};

Source BuildSource(const ExperimentConfig& cfg) {
  switch (cfg.source) {
    case SourceKind::kBinomial:
      return {BinomialDistribution(cfg.space_size, cfg.binomial_p), {}};
    case SourceKind::kUniformInterval:
      return {UniformOnInterval(cfg.space_size, cfg.interval_lo, cfg.interval_hi), {}};
    case SourceKind::kCustom:
      return {MakeDistributionUnchecked(Eigen::Map<const RealVector>(
                  cfg.weights.data(), static_cast<Eigen::Index>(cfg.weights.size()))),
              {}};
    case SourceKind::kGowalla: {
      GowallaIngest ingest = IngestGowalla(cfg.gowalla_path, *cfg.grid, cfg.gowalla_lat_col,
                                           cfg.gowalla_lon_col);
      Source s{MakeDistributionUnchecked(ingest.counts.frequencies()), {}};
      if (cfg.samples == 0) s.fixed_inputs = std::move(ingest.cells);
      return s;
    }
  }
  throw Error(ErrorCode::kInvalidInput, "unknown source");
}

double Score(Metric metric, const Distribution& estimate, const Distribution& truth,
             const Eigen::MatrixXd& ground) {
  switch (metric) {
    case Metric::kTv: return TotalVariation(estimate, truth);
    case Metric::kKl: return KlDivergence(truth, estimate);
    case Metric::kEmd: return Emd(estimate, truth, ground);
  }
  return 0.0;
}

struct CellOutput {
  std::vector<MetricRow> values;
  std::vector<MetricRow> baselines;
  std::vector<EstimateRecord> estimates;
  std::vector<CellError> errors;
};

// Observations of one cell, in the form each estimator needs.
struct Observed {
  std::optional<EmpiricalDistribution> q;             // table mechanisms
  std::optional<OutputsProbabilityMatrix> rappor_g;   // rappor, grouped by bit pattern
  Eigen::VectorXd bit_frequencies;                    // rappor
};

CellOutput RunCell(const ExperimentConfig& cfg, const Source& source, double epsilon,
                   std::size_t repetition, const Mechanism* mechanism,
                   const std::optional<RapporModel>& rappor, const Eigen::MatrixXd& ground) {
  CellOutput out;
  RandomSource rng(CellSeed(cfg.seed, epsilon, repetition));
  std::vector<std::size_t> inputs = source.fixed_inputs.empty()
                                        ? SampleCategorical(source.truth, rng, cfg.samples)
                                        : source.fixed_inputs;
  const std::size_t space = source.truth.size();

  Observed observed;
  std::optional<Distribution> noisy;
  if (rappor) {
    std::map<std::string, std::pair<BitVector, double>> patterns;
    Eigen::VectorXd ones = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space));
    for (std::size_t x : inputs) {
      const BitVector bits = rappor->Obfuscate(x, rng);
      auto it = patterns.try_emplace(bits.ToString(), bits, 0.0).first;
      it->second.second += 1.0;
      for (std::size_t b = 0; b < space; ++b) {
        if (bits[b]) ones[static_cast<Eigen::Index>(b)] += 1.0;
      }
    }
    Eigen::MatrixXd g(static_cast<Eigen::Index>(space), static_cast<Eigen::Index>(patterns.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(patterns.size()));
    Eigen::Index k = 0;
    for (const auto& [key, entry] : patterns) {
      g.col(k) = rappor->Column(entry.first);
      w[k++] = entry.second;
    }
    observed.rappor_g.emplace(std::move(g), std::move(w));
    observed.bit_frequencies = ones / static_cast<double>(inputs.size());
    if (ones.sum() > 0.0) noisy = MakeDistributionUnchecked(ones);
  } else {
    MechanismSampler sampler(*mechanism);
    std::vector<std::size_t> outputs(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) outputs[i] = sampler.Sample(inputs[i], rng);
    observed.q = EmpiricalDistribution::FromObservations(outputs, mechanism->num_outputs());
    if (mechanism->is_square()) noisy = MakeDistributionUnchecked(observed.q->frequencies());
  }

  if (noisy) {
    for (Metric metric : cfg.metrics) {
      out.baselines.push_back({epsilon, repetition, "noisy", metric, Score(metric, *noisy, source.truth, ground)});
    }
  }

  for (const std::string& estimator : cfg.estimators) {
    try {
      EstimateRecord record{epsilon, repetition, estimator, Distribution::Uniform(space), {}, 0, false};
      if (estimator == "em") {
        EmConfig em{cfg.em_delta, cfg.em_max_iters, std::nullopt};
        if (cfg.em_empirical_start) {
          if (!observed.q) throw Error(ErrorCode::kInvalidStart, "empirical start needs a table mechanism");
          em.theta0 = EmpiricalStart(*observed.q, space);
        }
        const OutputsProbabilityMatrix g =
            observed.rappor_g ? *observed.rappor_g : GroupedG(*mechanism, *observed.q);
        EmTrace trace = EmEstimate(g, em);
        record.estimate = trace.estimate;
        record.log_likelihoods = std::move(trace.log_likelihoods);
        record.em_iterations = trace.iterations;
        record.em_converged = trace.converged;
      } else {
        const InvMode mode = estimator == "invn" ? InvMode::kTruncateNormalize : InvMode::kProject;
        record.estimate = rappor ? RapporInvFromBitFrequencies(observed.bit_frequencies, epsilon, mode)
                                 : InvEstimate(*observed.q, *mechanism, mode);
      }
      for (Metric metric : cfg.metrics) {
        out.values.push_back({epsilon, repetition, estimator, metric,
                              Score(metric, record.estimate, source.truth, ground)});
      }
      out.estimates.push_back(std::move(record));
    } catch (const Error& e) {
      out.errors.push_back({epsilon, repetition, estimator, e.what()});
    }
  }
  return out;
}

}  // namespace

RunResult RunExperiment(const ExperimentConfig& cfg) {
  ValidateConfig(cfg);
  const Source source = BuildSource(cfg);
  const std::size_t space = source.truth.size();
  if (cfg.mechanism == "planar-geometric" && cfg.grid && cfg.grid->size() != space) {
    throw Error(ErrorCode::kDimensionMismatch, "planar-geometric grid does not match the source space");
  }

  Eigen::MatrixXd ground;
  if (std::find(cfg.metrics.begin(), cfg.metrics.end(), Metric::kEmd) != cfg.metrics.end()) {
    ground = (cfg.grid && cfg.grid->size() == space) ? GridGround(*cfg.grid) : LineGround(space);
  }

  // Mechanisms are built once per epsilon and shared read-only by the cells.
  std::vector<std::optional<Mechanism>> mechanisms(cfg.epsilons.size());
  std::vector<std::optional<RapporModel>> rappors(cfg.epsilons.size());
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const double eps = cfg.epsilons[e];
    if (cfg.mechanism == "rappor") {
      rappors[e].emplace(space, eps);
    } else {
      MechanismSpec spec{cfg.mechanism, space, eps, 0, 0, cfg.grid, cfg.tail_tol};
      mechanisms[e].emplace(BuildMechanism(spec));
      if (mechanisms[e]->num_inputs() != space) {
        throw Error(ErrorCode::kDimensionMismatch, "mechanism input space does not match the source");
      }
    }
  }

  const std::size_t cells = cfg.epsilons.size() * cfg.repetitions;
  std::vector<CellOutput> outputs(cells);
  std::vector<std::exception_ptr> failures(cells);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(cells, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < cells; c = next++) {
        const std::size_t e = c / cfg.repetitions;
        const std::size_t rep = c % cfg.repetitions;
        try {
          outputs[c] = RunCell(cfg, source, cfg.epsilons[e], rep,
                               mechanisms[e] ? &*mechanisms[e] : nullptr, rappors[e], ground);
        } catch (...) {
          failures[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  RunResult result;
  result.truth = source.truth;
  if (cfg.grid && cfg.grid->size() == space) result.grid = cfg.grid;
  for (auto& cell : outputs) {
    for (auto& v : cell.values) result.values.push_back(std::move(v));
    for (auto& v : cell.baselines) result.baselines.push_back(std::move(v));
    for (auto& v : cell.estimates) result.estimates.push_back(std::move(v));
    for (auto& v : cell.errors) result.errors.push_back(std::move(v));
  }
  return result;
}

}  // namespace ibu
