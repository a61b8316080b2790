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

// Command-line front end: estimate, experiment, counterexamples, surface,
// uniqueness.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ibu/analysis.hpp"
#include "ibu/error.hpp"
#include "ibu/estimators.hpp"
#include "ibu/harness.hpp"
#include "ibu/likelihood.hpp"
#include "ibu/mechanisms.hpp"

namespace {

struct MechanismFlags {
  std::string name = "krr";
  std::size_t size = 0;
  double epsilon = 1.0;
  std::string range;
  std::string grid;
  double tail_tol = 1e-9;
  std::string csv;
  std::string dump;

  void Register(CLI::App* cmd) {
    cmd->add_option("--mechanism", name,
                    "identity | krr | truncated-geometric | planar-geometric | rappor")
        ->capture_default_str();
    cmd->add_option("--size", size, "input space size");
    cmd->add_option("--epsilon", epsilon, "privacy parameter")->capture_default_str();
    cmd->add_option("--range", range, "lo,hi for truncated-geometric");
    cmd->add_option("--grid", grid, "'sf' or lat_min,lat_max,lon_min,lon_max,rows,cols,km");
    cmd->add_option("--tail-tol", tail_tol, "planar-geometric truncation tolerance")->capture_default_str();
    cmd->add_option("--mechanism-csv", csv, "read the mechanism matrix from CSV instead");
    cmd->add_option("--dump-mechanism", dump, "write the mechanism matrix as CSV");
  }

  ibu::MechanismSpec Spec() const {
    ibu::MechanismSpec spec;
    spec.name = name;
    spec.size = size;
    spec.epsilon = epsilon;
    spec.tail_tol = tail_tol;
    if (!range.empty()) {
      const auto comma = range.find(',');
      if (comma == std::string::npos) throw ibu::Error(ibu::ErrorCode::kInvalidInput, "--range expects lo,hi");
      spec.range_lo = std::stoll(range.substr(0, comma));
      spec.range_hi = std::stoll(range.substr(comma + 1));
    }
    if (!grid.empty()) spec.grid = ibu::ParseGrid(grid);
    return spec;
  }

  ibu::Mechanism Build() const {
    std::optional<ibu::Mechanism> m;
    if (!csv.empty()) {
      std::ifstream in(csv);
      if (!in) throw ibu::Error(ibu::ErrorCode::kIo, "cannot read " + csv);
      m.emplace(ibu::Mechanism::ReadCsv(in, csv));
    } else {
      m.emplace(ibu::BuildMechanism(Spec()));
    }
    if (!dump.empty()) {
      std::ofstream out(dump);
      if (!out) throw ibu::Error(ibu::ErrorCode::kIo, "cannot write " + dump);
      m->WriteCsv(out);
    }
    return *m;
  }
};

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) throw ibu::Error(ibu::ErrorCode::kIo, "cannot read " + path);
    in = &file;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(*in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    lines.push_back(line.substr(begin, end - begin + 1));
  }
  if (lines.empty()) throw ibu::Error(ibu::ErrorCode::kInvalidInput, "no observations in " + path);
  return lines;
}

ibu::EmpiricalDistribution ReadIndexObservations(const std::string& path, std::size_t num_outputs) {
  std::vector<std::size_t> obs;
  for (const auto& line : ReadLines(path)) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size() || line[0] == '-') {
      throw ibu::Error(ibu::ErrorCode::kInvalidInput, "observation '" + line + "' is not an output index");
    }
    obs.push_back(static_cast<std::size_t>(v));
  }
  return ibu::EmpiricalDistribution::FromObservations(obs, num_outputs);
}

std::vector<ibu::BitVector> ReadBitObservations(const std::string& path, std::size_t m) {
  std::vector<ibu::BitVector> out;
  for (const auto& line : ReadLines(path)) {
    if (line.size() != m || line.find_first_not_of("01") != std::string::npos) {
      throw ibu::Error(ibu::ErrorCode::kInvalidInput,
                       "observation '" + line + "' is not a " + std::to_string(m) + "-bit string");
    }
    std::vector<std::uint8_t> bits(m);
    for (std::size_t j = 0; j < m; ++j) bits[j] = line[j] == '1';
    out.emplace_back(std::move(bits));
  }
  return out;
}

// G grouped by distinct reports.
ibu::OutputsProbabilityMatrix RapporG(const ibu::RapporModel& model, const std::vector<ibu::BitVector>& obs) {
  std::map<std::string, std::pair<ibu::BitVector, double>> groups;
  for (const auto& b : obs) groups.try_emplace(b.ToString(), b, 0.0).first->second.second += 1.0;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(model.space_size()), static_cast<Eigen::Index>(groups.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(groups.size()));
  Eigen::Index k = 0;
  for (const auto& [key, entry] : groups) {
    g.col(k) = model.Column(entry.first);
    w[k++] = entry.second;
  }
  return ibu::OutputsProbabilityMatrix(std::move(g), std::move(w));
}

void PrintDistribution(std::ostream& out, const ibu::Distribution& d) {
  out << "input,probability\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.size(); ++i) out << i << ',' << d[i] << '\n';
}

std::ostream& OutputStream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ibu::Error(ibu::ErrorCode::kIo, "cannot write " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution estimation from locally obfuscated data"};
  app.require_subcommand(1);

  // estimate
  MechanismFlags est_mech;
  std::string est_obs, est_estimator = "em", est_out, est_trace;
  double est_delta = 1e-10;
  std::size_t est_max_iters = 1'000'000;
  bool est_empirical_start = false;
  auto* estimate = app.add_subcommand("estimate", "estimate the original distribution from one dataset");
  est_mech.Register(estimate);
  estimate->add_option("--observations", est_obs, "one output index (or RAPPOR bit string) per line; '-' for stdin")
      ->required();
  estimate->add_option("--estimator", est_estimator, "em | invn | invp")->capture_default_str();
  estimate->add_option("--delta", est_delta, "EM stopping threshold on the log-likelihood")->capture_default_str();
  estimate->add_option("--max-iters", est_max_iters, "EM iteration cap")->capture_default_str();
  estimate->add_flag("--empirical-start", est_empirical_start, "start EM from the noisy frequencies");
  estimate->add_option("--out", est_out, "write the estimate CSV here instead of stdout");
  estimate->add_option("--trace", est_trace, "write the EM log-likelihood trace CSV");

  // experiment
  std::string exp_config, exp_out = ".", exp_format = "csv";
  std::optional<std::uint64_t> exp_seed;
  auto* experiment = app.add_subcommand("experiment", "run a config-driven sweep");
  experiment->add_option("--config", exp_config, "key = value config file")->required();
  experiment->add_option("--seed", exp_seed, "override the config seed");
  experiment->add_option("--out", exp_out, "output directory")->capture_default_str();
  experiment->add_option("--format", exp_format, "csv,heatmap-svg")->capture_default_str();

  // counterexamples
  auto* counter = app.add_subcommand("counterexamples", "verify the small worked counterexamples");

  // surface
  MechanismFlags surf_mech;
  std::string surf_obs, surf_out;
  std::size_t surf_resolution = 101;
  auto* surface = app.add_subcommand("surface", "log-likelihood over the 3-point simplex as CSV");
  surf_mech.Register(surface);
  surface->add_option("--observations", surf_obs, "one output index per line")->required();
  surface->add_option("--resolution", surf_resolution, "points per edge")->capture_default_str();
  surface->add_option("--out", surf_out, "CSV path (stdout if omitted)");

  // uniqueness
  MechanismFlags uniq_mech;
  std::string uniq_obs;
  double uniq_tol = 1e-9;
  auto* uniqueness = app.add_subcommand("uniqueness", "check whether the MLE is unique");
  uniq_mech.Register(uniqueness);
  uniqueness->add_option("--observations", uniq_obs, "one output index per line")->required();
  uniqueness->add_option("--tol", uniq_tol, "rank threshold relative to the largest singular value")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      std::ofstream file;
      if (est_mech.csv.empty() && est_mech.name == "rappor") {
        if (est_mech.size == 0) throw ibu::Error(ibu::ErrorCode::kInvalidInput, "--size is required");
        const auto obs = ReadBitObservations(est_obs, est_mech.size);
        ibu::Distribution result = ibu::Distribution::Uniform(est_mech.size);
        if (est_estimator == "em") {
          ibu::RapporModel model(est_mech.size, est_mech.epsilon);
          ibu::EmConfig cfg{est_delta, est_max_iters, std::nullopt};
          const ibu::EmTrace trace = ibu::EmEstimate(RapporG(model, obs), cfg);
          if (!trace.converged) std::cerr << "warning: EM hit the iteration cap\n";
          if (!est_trace.empty()) {
            std::ofstream t(est_trace);
            ibu::WriteTraceCsv(t, trace);
          }
          result = trace.estimate;
        } else if (est_estimator == "invn" || est_estimator == "invp") {
          result = ibu::RapporInvEstimate(obs, est_mech.epsilon,
                                          est_estimator == "invn" ? ibu::InvMode::kTruncateNormalize
                                                                  : ibu::InvMode::kProject);
        } else {
          throw ibu::Error(ibu::ErrorCode::kInvalidInput, "unknown estimator '" + est_estimator + "'");
        }
        PrintDistribution(OutputStream(est_out, file), result);
        return 0;
      }
      const ibu::Mechanism mech = est_mech.Build();
      const auto q = ReadIndexObservations(est_obs, mech.num_outputs());
      ibu::Distribution result = ibu::Distribution::Uniform(mech.num_inputs());
      if (est_estimator == "em") {
        ibu::EmConfig cfg{est_delta, est_max_iters, std::nullopt};
        if (est_empirical_start) cfg.theta0 = ibu::EmpiricalStart(q, mech.num_inputs());
        const ibu::EmTrace trace = ibu::EmEstimate(ibu::GroupedG(mech, q), cfg);
        if (!trace.converged) std::cerr << "warning: EM hit the iteration cap\n";
        if (!est_trace.empty()) {
          std::ofstream t(est_trace);
          ibu::WriteTraceCsv(t, trace);
        }
        result = trace.estimate;
      } else if (est_estimator == "invn") {
        result = ibu::InvEstimate(q, mech, ibu::InvMode::kTruncateNormalize);
      } else if (est_estimator == "invp") {
        result = ibu::InvEstimate(q, mech, ibu::InvMode::kProject);
      } else {
        throw ibu::Error(ibu::ErrorCode::kInvalidInput, "unknown estimator '" + est_estimator + "'");
      }
      PrintDistribution(OutputStream(est_out, file), result);
      return 0;
    }

    if (*experiment) {
      ibu::ExperimentConfig cfg = ibu::LoadConfig(exp_config);
      if (exp_seed) cfg.seed = *exp_seed;
      const ibu::EmitFormats formats = ibu::ParseFormats(exp_format);
      const ibu::RunResult result = ibu::RunExperiment(cfg);
      for (const auto& err : result.errors) {
        std::cerr << "cell eps=" << err.epsilon << " rep=" << err.repetition << " " << err.estimator
                  << ": " << err.message << '\n';
      }
      for (const auto& path : ibu::EmitResults(result, cfg, exp_out, formats)) {
        std::cout << path.string() << '\n';
      }
      return 0;
    }

    if (*counter) {
      const ibu::CounterexampleReport report = ibu::VerifyCounterexamples();
      std::cout << report.ToText();
      return report.AllPassed() ? 0 : 1;
    }

    if (*surface) {
      const ibu::Mechanism mech = surf_mech.Build();
      const auto q = ReadIndexObservations(surf_obs, mech.num_outputs());
      const auto points = ibu::LikelihoodSurface(ibu::GroupedG(mech, q), surf_resolution);
      std::ofstream file;
      ibu::WriteSurfaceCsv(OutputStream(surf_out, file), points);
      return 0;
    }

    if (*uniqueness) {
      const ibu::Mechanism mech = uniq_mech.Build();
      const auto q = ReadIndexObservations(uniq_obs, mech.num_outputs());
      std::cout << ibu::CheckUniqueness(ibu::GroupedG(mech, q), uniq_tol).ToText();
      return 0;
    }
  } catch (const ibu::Error& e) {
    std::cerr << "error [" << ibu::ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
