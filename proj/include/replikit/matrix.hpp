#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "replikit/error.hpp"

namespace replikit {

// Dense row-major matrix. Rows are features, columns are studies.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    Matrix out;
    if (rows.empty()) return out;
    out.rows_ = rows.size();
    out.cols_ = rows.front().size();
    out.data_.reserve(out.rows_ * out.cols_);
    for (const auto& row : rows) {
      if (row.size() != out.cols_) throw InputError("matrix rows have unequal lengths");
      out.data_.insert(out.data_.end(), row.begin(), row.end());
    }
    return out;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T> column(std::size_t j) const {
    std::vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  // Columns listed in `cols`, in that order.
  Matrix select_columns(std::span<const std::size_t> cols) const {
    Matrix out(rows_, cols.size());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols.size(); ++k) out(i, k) = (*this)(i, cols[k]);
    }
    return out;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using PValueMatrix = Matrix<double>;
using ZMatrix = Matrix<double>;

// Left-sided p-values under the continuous convention q = 1 - p.
inline PValueMatrix left_sided(const PValueMatrix& p) {
  PValueMatrix q = p;
  for (double& v : q.data()) v = 1.0 - v;
  return q;
}

inline void validate_pvalues(const PValueMatrix& p) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError("p-value out of [0,1] at feature " + std::to_string(i + 1) + ", study " +
                         std::to_string(j + 1));
      }
    }
  }
}

}  // namespace replikit
