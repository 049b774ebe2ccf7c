// Copyright 2026 The Artivae Authors.
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

#ifndef ARTIVAE_MATRIX_HPP_
#define ARTIVAE_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace artivae {

// Dense row-major matrix of doubles. Deliberately small: just the storage
// and the handful of kernels the pipeline needs, nothing resembling a
// general linear-algebra library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<const double> row_span(std::size_t r) const {
    return {row(r), cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

  // Intended for hot loops where shape is already sized by the caller.
  void fill(double value) { data_.assign(data_.size(), value); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B^T.  A: m x k, B: n x k, C: m x n.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
// C = A * B.  A: m x k, B: k x n, C: m x n.
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);
// C = A^T * B.  A: k x m, B: k x n, C: m x n.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

Matrix transpose(const Matrix& a);

std::vector<double> col_means(const Matrix& a);
// Subtracts `means` from every row.
Matrix center_columns(const Matrix& a, const std::vector<double>& means);
// Sample covariance of the columns of `a` (divisor n-1).
Matrix sample_covariance(const Matrix& a);

// Solves A x = b for square A by Gaussian elimination with partial pivoting.
// Throws std::runtime_error when A is numerically singular.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);
// Column-wise solve: returns X with A X = B.
Matrix solve_linear(Matrix a, const Matrix& b);

double dot(std::span<const double> x, std::span<const double> y);

}  // namespace artivae

#endif  // ARTIVAE_MATRIX_HPP_
