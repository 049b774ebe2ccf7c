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

#include "artivae/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace artivae {

namespace {

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction of a real symmetric matrix to tridiagonal form,
// accumulating the orthogonal transform in `z` (classic tred2).
void tridiagonalize(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k)
            z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
        for (std::size_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal form (classic tqli); eigenvectors end
// up in the columns of `z`.
void ql_implicit(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iterations = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) <= 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iterations == 60)
          throw std::runtime_error("symmetric_eigen: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void apply_sign_convention(Matrix& components) {
  for (std::size_t i = 0; i < components.rows(); ++i) {
    double* row = components.row(i);
    std::size_t arg = 0;
    double best = std::abs(row[0]);
    for (std::size_t j = 1; j < components.cols(); ++j) {
      if (std::abs(row[j]) > best) {
        best = std::abs(row[j]);
        arg = j;
      }
    }
    if (row[arg] < 0.0)
      for (std::size_t j = 0; j < components.cols(); ++j) row[j] = -row[j];
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0)
    throw std::runtime_error("symmetric_eigen: matrix must be square");
  const std::size_t n = sym.rows();
  Matrix z = sym;
  std::vector<double> d, e;
  if (n == 1) {
    SymmetricEigen out;
    out.values = {sym(0, 0)};
    out.vectors = Matrix(1, 1, 1.0);
    return out;
  }
  tridiagonalize(z, d, e);
  ql_implicit(z, d, e);

  // Sort eigenpairs by value, non-increasing; ties keep original column order
  // so results stay deterministic for degenerate spectra.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = d[order[i]];
    for (std::size_t k = 0; k < n; ++k) out.vectors(i, k) = z(k, order[i]);
  }
  return out;
}

PcaResult pca(const Matrix& data, std::size_t k) {
  if (data.rows() < 2) throw std::runtime_error("pca: need at least 2 samples");
  if (k < 1 || k > data.cols())
    throw std::runtime_error("pca: k must be in [1, dims]");
  if (!data.all_finite()) throw std::runtime_error("pca: non-finite input");

  PcaResult out;
  out.mean = col_means(data);
  const Matrix cov = sample_covariance(data);
  SymmetricEigen eig = symmetric_eigen(cov);

  out.components = Matrix(k, data.cols());
  out.explained_variance.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.explained_variance[i] = std::max(0.0, eig.values[i]);
    for (std::size_t j = 0; j < data.cols(); ++j)
      out.components(i, j) = eig.vectors(i, j);
  }
  apply_sign_convention(out.components);
  return out;
}

Matrix pca_project(const PcaResult& p, const Matrix& data) {
  if (data.cols() != p.components.cols())
    throw std::runtime_error("pca_project: dimension mismatch");
  const Matrix centered = center_columns(data, p.mean);
  Matrix scores;
  matmul_nt(centered, p.components, scores);
  return scores;
}

OlsResult ols_fit(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.rows(), p = x.cols(), q = y.cols();
  if (y.rows() != n) throw std::runtime_error("ols_fit: row count mismatch");
  if (n <= p)
    throw std::runtime_error("ols_fit: need more samples than predictors");

  const auto x_mean = col_means(x);
  const auto y_mean = col_means(y);
  const Matrix xc = center_columns(x, x_mean);
  const Matrix yc = center_columns(y, y_mean);

  Matrix gram;  // Xc^T Xc
  matmul_tn(xc, xc, gram);
  Matrix rhs;  // Xc^T Yc
  matmul_tn(xc, yc, rhs);

  // Cholesky with a relative pivot check: a dependent (or constant) predictor
  // makes a diagonal entry collapse, and the error names that column.
  Matrix chol(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double diag = gram(j, j);
    for (std::size_t s = 0; s < j; ++s) diag -= chol(j, s) * chol(j, s);
    if (!(diag > 1e-12 * std::max(1.0, gram(j, j))))
      throw std::runtime_error(
          "ols_fit: predictor column " + std::to_string(j) +
          " is constant or linearly dependent on earlier columns");
    chol(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < p; ++i) {
      double acc = gram(i, j);
      for (std::size_t s = 0; s < j; ++s) acc -= chol(i, s) * chol(j, s);
      chol(i, j) = acc / chol(j, j);
    }
  }

  OlsResult fit;
  fit.coefficients = Matrix(p, q);
  std::vector<double> w(p);
  for (std::size_t col = 0; col < q; ++col) {
    for (std::size_t i = 0; i < p; ++i) {
      double acc = rhs(i, col);
      for (std::size_t s = 0; s < i; ++s) acc -= chol(i, s) * w[s];
      w[i] = acc / chol(i, i);
    }
    for (std::size_t ii = p; ii-- > 0;) {
      double acc = w[ii];
      for (std::size_t s = ii + 1; s < p; ++s)
        acc -= chol(s, ii) * fit.coefficients(s, col);
      fit.coefficients(ii, col) = acc / chol(ii, ii);
    }
  }

  fit.intercept.resize(q);
  for (std::size_t col = 0; col < q; ++col) {
    double acc = y_mean[col];
    for (std::size_t i = 0; i < p; ++i)
      acc -= fit.coefficients(i, col) * x_mean[i];
    fit.intercept[col] = acc;
  }
  return fit;
}

Matrix ols_predict(const OlsResult& fit, const Matrix& x) {
  if (x.cols() != fit.coefficients.rows())
    throw std::runtime_error("ols_predict: predictor dimension mismatch");
  Matrix pred;
  matmul_nn(x, fit.coefficients, pred);
  for (std::size_t i = 0; i < pred.rows(); ++i)
    for (std::size_t j = 0; j < pred.cols(); ++j)
      pred(i, j) += fit.intercept[j];
  return pred;
}

Matrix residualize(const Matrix& x, const Matrix& y, const OlsResult& fit) {
  if (x.rows() != y.rows())
    throw std::runtime_error("residualize: row count mismatch");
  if (y.cols() != fit.intercept.size())
    throw std::runtime_error("residualize: response dimension mismatch");
  Matrix res = ols_predict(fit, x);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j)
      res(i, j) = y(i, j) - res(i, j);
  return res;
}

double exp_fit_objective(const ExpFit& f, const std::vector<double>& t,
                         const std::vector<double>& v) {
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = v[i] - exp_fit_eval(f, t[i]);
    sse += r * r;
  }
  return sse;
}

namespace {

// Profiled objective: for fixed rate c, the optimal (a, b) solve a 2x2
// normal system in the basis {1, exp(-c t)}.
ExpFit solve_linear_part(double c, const std::vector<double>& t,
                         const std::vector<double>& v) {
  const std::size_t n = t.size();
  double se = 0.0, see = 0.0, sv = 0.0, sev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ei = std::exp(-c * t[i]);
    se += ei;
    see += ei * ei;
    sv += v[i];
    sev += ei * v[i];
  }
  const double nn = static_cast<double>(n);
  const double det = nn * see - se * se;
  ExpFit f;
  f.rate = c;
  if (std::abs(det) < 1e-14 * nn * std::max(1.0, see)) {
    // exp(-c t) numerically constant over the sample; fall back to the mean.
    f.offset = sv / nn;
    f.amplitude = 0.0;
  } else {
    f.offset = (see * sv - se * sev) / det;
    f.amplitude = (nn * sev - se * sv) / det;
  }
  return f;
}

}  // namespace

ExpFit fit_exponential_decay(const std::vector<double>& t,
                             const std::vector<double>& v) {
  if (t.size() < 4)
    throw std::runtime_error("fit_exponential_decay: need at least 4 points");
  if (t.size() != v.size())
    throw std::runtime_error("fit_exponential_decay: length mismatch");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw std::runtime_error(
          "fit_exponential_decay: t must be strictly increasing");

  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return ExpFit{v.front(), 0.0, 0.0};

  constexpr int kGridPoints = 200;
  constexpr double kCMin = 1e-3, kCMax = 10.0;
  const double log_lo = std::log(kCMin), log_hi = std::log(kCMax);

  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i)
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));

  ExpFit best;
  double best_obj = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  for (int i = 0; i < kGridPoints; ++i) {
    const ExpFit f = solve_linear_part(grid[i], t, v);
    const double obj = exp_fit_objective(f, t, v);
    if (obj < best_obj) {
      best_obj = obj;
      best = f;
      best_idx = i;
    }
  }

  // Golden-section refinement of c in the bracket around the best grid point.
  double a = grid[std::max(0, best_idx - 1)];
  double b = grid[std::min(kGridPoints - 1, best_idx + 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = exp_fit_objective(solve_linear_part(x1, t, v), t, v);
  double f2 = exp_fit_objective(solve_linear_part(x2, t, v), t, v);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = exp_fit_objective(solve_linear_part(x1, t, v), t, v);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = exp_fit_objective(solve_linear_part(x2, t, v), t, v);
    }
  }
  const double c_refined = 0.5 * (a + b);
  const ExpFit refined = solve_linear_part(c_refined, t, v);
  if (exp_fit_objective(refined, t, v) < best_obj) best = refined;
  return best;
}

double pearson_correlation(std::span<const double> x,
                           std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace artivae
