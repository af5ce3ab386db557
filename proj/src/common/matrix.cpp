#include "gtp/common/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "gtp/common/error.hpp"

namespace gtp {

void Matrix::set_row(std::size_t r, std::span<const double> v) {
  if (v.size() != cols) throw ConfigError("Matrix::set_row: width mismatch");
  std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(r * cols));
}

Matrix from_rows(const std::vector<Point>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) m.set_row(r, rows[r]);
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace gtp
