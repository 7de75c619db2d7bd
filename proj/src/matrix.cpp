#include "negkit/matrix.hpp"

#include <cmath>

#include "negkit/errors.hpp"

namespace negkit {

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  if (x.size() != m.cols) fail(ErrKind::ShapeMismatch, "matvec: vector length != matrix cols");
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrKind::ShapeMismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double row_dot(const Matrix& m, std::size_t r, const std::vector<double>& v) {
  if (v.size() != m.cols) fail(ErrKind::ShapeMismatch, "row_dot: probe length != matrix cols");
  double acc = 0.0;
  const double* row = m.row(r);
  for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
  return acc;
}

}  // namespace negkit
