#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fzsl {

// Dense row-major float32 matrix. All training arithmetic is float32 with
// left-to-right reductions so runs are bit-reproducible.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(int r, int c, float fill = 0.0f)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  float& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  float at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }

  float* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const float* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }

  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

// [a | b] with matching row counts.
Matrix hcat(const Matrix& a, const Matrix& b);

// Columns [begin, end) of m.
Matrix slice_cols(const Matrix& m, int begin, int end);

}  // namespace fzsl
