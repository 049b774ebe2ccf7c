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

#include "artivae/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace artivae {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (c.rows() != m || c.cols() != n) c = Matrix(m, n);
  // Eight independent partial sums per dot product so the reduction
  // vectorizes without reassociating the final summation order.
  const std::size_t k8 = k - k % 8;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
      for (std::size_t l = 0; l < k8; l += 8) {
        s0 += ai[l] * bj[l];
        s1 += ai[l + 1] * bj[l + 1];
        s2 += ai[l + 2] * bj[l + 2];
        s3 += ai[l + 3] * bj[l + 3];
        s4 += ai[l + 4] * bj[l + 4];
        s5 += ai[l + 5] * bj[l + 5];
        s6 += ai[l + 6] * bj[l + 6];
        s7 += ai[l + 7] * bj[l + 7];
      }
      double acc = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
      for (std::size_t l = k8; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = acc;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (c.rows() != m || c.cols() != n)
    c = Matrix(m, n);
  else
    c.fill(0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = b.row(l);
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (c.rows() != m || c.cols() != n)
    c = Matrix(m, n);
  else
    c.fill(0.0);
  for (std::size_t l = 0; l < k; ++l) {
    const double* al = a.row(l);
    const double* bl = b.row(l);
    for (std::size_t i = 0; i < m; ++i) {
      const double ali = al[i];
      if (ali == 0.0) continue;
      double* ci = c.row(i);
      for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
    }
  }
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> col_means(const Matrix& a) {
  std::vector<double> means(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) means[j] += row[j];
  }
  const double inv = a.rows() > 0 ? 1.0 / static_cast<double>(a.rows()) : 0.0;
  for (double& m : means) m *= inv;
  return means;
}

Matrix center_columns(const Matrix& a, const std::vector<double>& means) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - means[j];
  return c;
}

Matrix sample_covariance(const Matrix& a) {
  if (a.rows() < 2)
    throw std::runtime_error("sample_covariance: need at least 2 rows");
  const Matrix centered = center_columns(a, col_means(a));
  Matrix cov;
  matmul_tn(centered, centered, cov);
  const double inv = 1.0 / static_cast<double>(a.rows() - 1);
  for (double& v : cov.data()) v *= inv;
  return cov;
}

namespace {

// In-place LU factorization with partial pivoting shared by both solve
// overloads. Returns the permutation as a row index map.
std::vector<std::size_t> lu_decompose(Matrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::runtime_error("solve_linear: matrix not square");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-14)
      throw std::runtime_error("solve_linear: singular matrix at column " +
                               std::to_string(col));
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(perm[col], perm[pivot]);
    }
    const double inv_pivot = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv_pivot;
      a(r, col) = f;
      for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return perm;
}

std::vector<double> lu_solve(const Matrix& lu,
                             const std::vector<std::size_t>& perm,
                             const std::vector<double>& b) {
  const std::size_t n = lu.rows();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu(i, j) * x[j];
    x[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= lu(ii, j) * x[j];
    x[ii] = acc / lu(ii, ii);
  }
  return x;
}

}  // namespace

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  if (a.rows() != b.size())
    throw std::runtime_error("solve_linear: shape mismatch");
  const auto perm = lu_decompose(a);
  return lu_solve(a, perm, b);
}

Matrix solve_linear(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw std::runtime_error("solve_linear: shape mismatch");
  const auto perm = lu_decompose(a);
  Matrix x(b.rows(), b.cols());
  std::vector<double> col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    const auto xj = lu_solve(a, perm, col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace artivae
