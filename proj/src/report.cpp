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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ibu/error.hpp"
#include "ibu/harness.hpp"

namespace ibu {

namespace {

std::string G17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string HashHex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void WriteRow(std::ostream& out, const MetricRow& row) {
  out << G17(row.epsilon) << ',' << row.repetition << ',' << row.estimator << ','
      << MetricName(row.metric) << ',' << G17(row.value) << '\n';
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void CloseOut(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

// White to dark blue.
std::string Color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto mix = [t](int from, int to) { return static_cast<int>(from + (to - from) * t + 0.5); };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", mix(255, 8), mix(255, 48), mix(255, 107));
  return buf;
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

EmitFormats ParseFormats(const std::string& text) {
  EmitFormats f{false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") f.csv = true;
    else if (item == "heatmap-svg") f.heatmap_svg = true;
    else if (!item.empty()) throw Error(ErrorCode::kInvalidInput, "unknown format '" + item + "'");
  }
  if (!f.csv && !f.heatmap_svg) throw Error(ErrorCode::kInvalidInput, "no output format selected");
  return f;
}

void WriteResultsCsv(std::ostream& out, const RunResult& result) {
  out << "epsilon,repetition,estimator,metric,value\n";
  for (const auto& row : result.values) WriteRow(out, row);
}

void WriteHeatmapSvg(std::ostream& out, const Grid& grid, const Distribution& d, const std::string& title) {
  if (d.size() != grid.size()) throw Error(ErrorCode::kDimensionMismatch, "heatmap: size does not match grid");
  constexpr int kCell = 20;
  constexpr int kTitle = 24;
  const int width = grid.cols() * kCell;
  const int height = grid.rows() * kCell + kTitle;
  const double peak = d.weights().maxCoeff();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<text x=\"4\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">" << XmlEscape(title)
      << "</text>\n";
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    // Row 0 is the southern edge; draw it at the bottom.
    const int x = grid.Col(cell) * kCell;
    const int y = kTitle + (grid.rows() - 1 - grid.Row(cell)) * kCell;
    const double t = peak > 0 ? d[cell] / peak : 0.0;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
        << "\" fill=\"" << Color(t) << "\"><title>" << cell << ": " << G17(d[cell]) << "</title></rect>\n";
  }
  out << "</svg>\n";
}

std::vector<std::filesystem::path> EmitResults(const RunResult& result, const ExperimentConfig& cfg,
                                               const std::filesystem::path& out_dir,
                                               const EmitFormats& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  const std::string hash = HashHex(ConfigHash(cfg));
  std::vector<std::filesystem::path> written;

  if (formats.csv) {
    const auto results_path = out_dir / ("results-" + hash + ".csv");
    std::ofstream results = OpenOut(results_path);
    WriteResultsCsv(results, result);
    CloseOut(results, results_path);
    written.push_back(results_path);

    const auto summary_path = out_dir / ("summary-" + hash + ".csv");
    std::ofstream summary = OpenOut(summary_path);
    summary << "kind,epsilon,repetition,estimator,metric,value\n";
    for (const auto& row : result.baselines) {
      summary << "baseline,";
      WriteRow(summary, row);
    }
    for (const auto& e : result.estimates) {
      if (e.estimator != "em") continue;
      summary << "em_iterations," << G17(e.epsilon) << ',' << e.repetition << ",em,," << e.em_iterations << '\n';
      summary << "em_converged," << G17(e.epsilon) << ',' << e.repetition << ",em,,"
              << (e.em_converged ? 1 : 0) << '\n';
    }
    for (const auto& err : result.errors) {
      std::string message = err.message;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      summary << "error," << G17(err.epsilon) << ',' << err.repetition << ',' << err.estimator << ",,"
              << message << '\n';
    }
    CloseOut(summary, summary_path);
    written.push_back(summary_path);
  }

  if (formats.heatmap_svg && result.grid) {
    const auto truth_path = out_dir / ("heatmap-" + hash + "-truth.svg");
    std::ofstream truth = OpenOut(truth_path);
    WriteHeatmapSvg(truth, *result.grid, result.truth, "original");
    CloseOut(truth, truth_path);
    written.push_back(truth_path);
    for (const auto& e : result.estimates) {
      if (e.repetition != 0) continue;
      const auto eps_index = static_cast<std::size_t>(
          std::find(cfg.epsilons.begin(), cfg.epsilons.end(), e.epsilon) - cfg.epsilons.begin());
      const auto path =
          out_dir / ("heatmap-" + hash + "-" + e.estimator + "-eps" + std::to_string(eps_index) + ".svg");
      std::ofstream svg = OpenOut(path);
      WriteHeatmapSvg(svg, *result.grid, e.estimate, e.estimator + " eps=" + G17(e.epsilon));
      CloseOut(svg, path);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace ibu
