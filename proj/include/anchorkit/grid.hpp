#pragma once

#include <cstddef>
#include <vector>

namespace anchorkit {

/// Dense row-major raster over feature cells; (i, j) = (column, row).
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> cells;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int i, int j) { return cells[static_cast<std::size_t>(j) * width + i]; }
  const T& at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * width + i];
  }

  std::size_t count() const { return cells.size(); }

  template <typename U>
  bool same_shape_as(const Grid<U>& other) const {
    return width == other.width && height == other.height;
  }
};

}  // namespace anchorkit
