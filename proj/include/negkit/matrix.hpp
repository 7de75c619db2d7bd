#pragma once

// Dense row-major matrix of doubles.  All numeric state in the toolkit
// (embeddings, merged rows, adapter weights, attention maps) uses this type;
// accumulation is always done in 64-bit even when files store 32-bit floats.

#include <cstddef>
#include <vector>

namespace negkit {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows * cols entries

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// y = m * x with ascending-column accumulation order (tests rely on the
// summation order being reproducible).
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// Dot product of probe v against matrix row r, ascending-column order.
double row_dot(const Matrix& m, std::size_t r, const std::vector<double>& v);

}  // namespace negkit
