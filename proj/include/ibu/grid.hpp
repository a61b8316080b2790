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

#ifndef IBU_GRID_HPP_
#define IBU_GRID_HPP_

#include <cstddef>
#include <optional>
#include <utility>

namespace ibu {

// Planar discretization of a lat/lon bounding box into rows x cols cells of
// equal angular size. Cells are indexed row-major from the (lat_min, lon_min)
// corner: index = row * cols + col, rows along latitude.
//
// Distances between cell centers are measured on the square lattice of side
// cell_side_km, i.e. the box is treated as locally flat.
class Grid {
 public:
  static Grid Create(double lat_min, double lat_max, double lon_min, double lon_max,
                     int rows, int cols, double cell_side_km);

  // North San Francisco: lat [37.7228, 37.7946], lon [-122.5153, -122.3789],
  // 16 latitude rows x 24 longitude columns of 0.5 km (12 km x 8 km).
  static Grid SanFranciscoNorth();

  double lat_min() const { return lat_min_; }
  double lat_max() const { return lat_max_; }
  double lon_min() const { return lon_min_; }
  double lon_max() const { return lon_max_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_side_km() const { return cell_side_km_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }

  // Cell index containing (lat, lon); nullopt outside the box. Points on
  // the max edges belong to the last row/column.
  std::optional<std::size_t> LocateCell(double lat, double lon) const;

  int Row(std::size_t cell) const { return static_cast<int>(cell / static_cast<std::size_t>(cols_)); }
  int Col(std::size_t cell) const { return static_cast<int>(cell % static_cast<std::size_t>(cols_)); }
  std::size_t Index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
  }

  // (lat, lon) of the cell center.
  std::pair<double, double> CellCenter(std::size_t cell) const;

  double DistanceKm(std::size_t a, std::size_t b) const;

 private:
  Grid() = default;

  double lat_min_ = 0, lat_max_ = 0, lon_min_ = 0, lon_max_ = 0;
  int rows_ = 0, cols_ = 0;
  double cell_side_km_ = 0;
};

}  // namespace ibu

#endif  // IBU_GRID_HPP_
