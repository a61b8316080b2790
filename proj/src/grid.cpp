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

#include "ibu/grid.hpp"

#include <cmath>

#include "ibu/error.hpp"

namespace ibu {

Grid Grid::Create(double lat_min, double lat_max, double lon_min, double lon_max, int rows,
                  int cols, double cell_side_km) {
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
    throw Error(ErrorCode::kInvalidInput, "grid: empty bounding box");
  }
  if (rows < 1 || cols < 1) throw Error(ErrorCode::kInvalidInput, "grid: rows and cols must be >= 1");
  if (!(cell_side_km > 0.0)) throw Error(ErrorCode::kInvalidInput, "grid: cell side must be positive");
  Grid g;
  g.lat_min_ = lat_min;
  g.lat_max_ = lat_max;
  g.lon_min_ = lon_min;
  g.lon_max_ = lon_max;
  g.rows_ = rows;
  g.cols_ = cols;
  g.cell_side_km_ = cell_side_km;
  return g;
}

Grid Grid::SanFranciscoNorth() {
  return Create(37.7228, 37.7946, -122.5153, -122.3789, 16, 24, 0.5);
}

std::optional<std::size_t> Grid::LocateCell(double lat, double lon) const {
  if (!(lat >= lat_min_ && lat <= lat_max_ && lon >= lon_min_ && lon <= lon_max_)) {
    return std::nullopt;
  }
  const double dlat = (lat_max_ - lat_min_) / rows_;
  const double dlon = (lon_max_ - lon_min_) / cols_;
  int row = static_cast<int>(std::floor((lat - lat_min_) / dlat));
  int col = static_cast<int>(std::floor((lon - lon_min_) / dlon));
  if (row >= rows_) row = rows_ - 1;
  if (col >= cols_) col = cols_ - 1;
  return Index(row, col);
}

std::pair<double, double> Grid::CellCenter(std::size_t cell) const {
  const double dlat = (lat_max_ - lat_min_) / rows_;
  const double dlon = (lon_max_ - lon_min_) / cols_;
  return {lat_min_ + (Row(cell) + 0.5) * dlat, lon_min_ + (Col(cell) + 0.5) * dlon};
}

double Grid::DistanceKm(std::size_t a, std::size_t b) const {
  const double dr = Row(a) - Row(b);
  const double dc = Col(a) - Col(b);
  return cell_side_km_ * std::hypot(dr, dc);
}

}  // namespace ibu
