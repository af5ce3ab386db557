#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gtp {

using Point = std::vector<double>;

/// Dense row-major matrix of doubles; one row per batch element.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  void set_row(std::size_t r, std::span<const double> v);

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

Matrix from_rows(const std::vector<Point>& rows);

bool all_finite(std::span<const double> v);
double squared_norm(std::span<const double> v);

}  // namespace gtp
