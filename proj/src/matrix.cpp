#include "fzsl/matrix.hpp"

#include <stdexcept>

namespace fzsl {

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows)
    throw std::invalid_argument("hcat: row counts differ");
  Matrix out(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) out.at(r, c) = a.at(r, c);
    for (int c = 0; c < b.cols; ++c) out.at(r, a.cols + c) = b.at(r, c);
  }
  return out;
}

Matrix slice_cols(const Matrix& m, int begin, int end) {
  if (begin < 0 || end > m.cols || begin > end)
    throw std::invalid_argument("slice_cols: bad column range");
  Matrix out(m.rows, end - begin);
  for (int r = 0; r < m.rows; ++r)
    for (int c = begin; c < end; ++c) out.at(r, c - begin) = m.at(r, c);
  return out;
}

}  // namespace fzsl
