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

#ifndef ARTIVAE_NUMERICS_HPP_
#define ARTIVAE_NUMERICS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "artivae/matrix.hpp"

namespace artivae {

// Principal components of a mean-centered sample matrix.
//
// `components` holds one orthonormal row per retained PC, ordered by
// non-increasing explained variance. Sign convention: the entry of largest
// magnitude in each component is nonnegative, so results are deterministic
// even when the underlying eigenvectors are only defined up to sign.
struct PcaResult {
  std::vector<double> mean;
  Matrix components;                       // k x dims
  std::vector<double> explained_variance;  // k, non-increasing
};

// Multi-response least-squares fit  Y ~ X * coefficients + intercept.
struct OlsResult {
  Matrix coefficients;            // p x q
  std::vector<double> intercept;  // q
};

// v(t) = offset + amplitude * exp(-rate * t), rate >= 0.
struct ExpFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double rate = 0.0;
};

// Top-k PCA of `data` (samples x dims) using the sample covariance
// (divisor n-1). Degenerate data (zero variance) is legal and yields zero
// explained variance with a deterministic orthonormal basis; fewer than two
// samples is an error.
PcaResult pca(const Matrix& data, std::size_t k);

// Projects rows of `data` onto the retained components after centering.
Matrix pca_project(const PcaResult& p, const Matrix& data);

// Ordinary least squares with intercept. Throws when X has fewer rows than
// columns + 1 or when a predictor column is linearly dependent (the message
// names the offending column; nothing is silently regularized).
OlsResult ols_fit(const Matrix& x, const Matrix& y);

Matrix ols_predict(const OlsResult& fit, const Matrix& x);

// Y minus the fit's prediction on X. Shape mismatches throw.
Matrix residualize(const Matrix& x, const Matrix& y, const OlsResult& fit);

// Least-squares fit of a + b*exp(-c*t): log-spaced 200-point grid over
// c in [1e-3, 10] with a closed-form linear solve for (a, b) at each c,
// then golden-section refinement of c within the best grid bracket.
// Deterministic; requires at least 4 points and strictly increasing t.
ExpFit fit_exponential_decay(const std::vector<double>& t,
                             const std::vector<double>& v);

inline double exp_fit_eval(const ExpFit& f, double t) {
  return f.offset + f.amplitude * std::exp(-f.rate * t);
}

// Sum of squared residuals of an ExpFit on (t, v); shared by the fitter and
// by tests that compare against denser grids.
double exp_fit_objective(const ExpFit& f, const std::vector<double>& t,
                         const std::vector<double>& v);

// Eigendecomposition of a symmetric matrix via Householder tridiagonalization
// followed by implicit-shift QL. Eigenvalues sorted non-increasing, one
// eigenvector per row. Exposed for the articulatory model stages.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;  // n x n, row i pairs with values[i]
};
SymmetricEigen symmetric_eigen(const Matrix& sym);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace artivae

#endif  // ARTIVAE_NUMERICS_HPP_
