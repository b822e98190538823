#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "lavlev/model.hpp"

namespace oracle {

using lavlev::Index;
using lavlev::Matrix;
using lavlev::Vector;

// H (H^T H)^-1 H^T with an explicit inverse.
inline Matrix hat_matrix(const Matrix& h) { return h * (h.transpose() * h).inverse() * h.transpose(); }

// C(n, k) from Pascal's triangle.
inline boost::multiprecision::cpp_int binomial(int n, int k) {
  std::vector<boost::multiprecision::cpp_int> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j > 0; --j) row[j] += row[j - 1];
  }
  return row[static_cast<std::size_t>(k)];
}

// Chi-square CDF by composite Simpson quadrature of the density. For d = 1
// the substitution x = t^2 removes the endpoint singularity.
inline double chi2_cdf(int d, double x, int panels = 20000) {
  const double k = d / 2.0;
  const double norm = 1.0 / (std::pow(2.0, k) * std::tgamma(k));
  auto simpson = [&](auto f, double a, double b) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
  };
  if (d == 1) {
    return simpson([&](double t) { return 2.0 * norm * std::exp(-t * t / 2.0); }, 0.0, std::sqrt(x));
  }
  return simpson([&](double t) { return norm * std::pow(t, k - 1.0) * std::exp(-t / 2.0); }, 0.0, x);
}

// Unit normal to N-1 rows for N = 2 (perpendicular) and N = 3 (cross
// product), same sign convention as the library.
inline std::optional<Vector> normal(const Matrix& rows) {
  Vector v;
  if (rows.cols() == 2) {
    v = Vector(2);
    v << -rows(0, 1), rows(0, 0);
  } else {
    const Eigen::Vector3d a = rows.row(0).transpose();
    const Eigen::Vector3d b = rows.row(1).transpose();
    v = a.cross(b);
  }
  const double n = v.norm();
  if (n <= 1e-10 * std::max(1.0, rows.norm())) return std::nullopt;
  v /= n;
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      if (v(k) < 0) v = -v;
      break;
    }
  }
  return v;
}

// Every k-subset of {0..n-1} in lexicographic order.
inline std::vector<std::vector<Index>> subsets(Index n, Index k) {
  std::vector<std::vector<Index>> out;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

// Leverage-test brute force for N in {2, 3}: smallest s - q over all bases
// (+inf when every basis is degenerate).
inline double min_gap(const Matrix& h, Index j) {
  const Index m = h.rows();
  const Index n = h.cols();
  std::vector<Index> others;
  for (Index i = 0; i < m; ++i) {
    if (i != j) others.push_back(i);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sub : subsets(static_cast<Index>(others.size()), n - 1)) {
    Matrix rows(n - 1, n);
    for (Index r = 0; r < n - 1; ++r) rows.row(r) = h.row(others[static_cast<std::size_t>(sub[static_cast<std::size_t>(r)])]);
    const auto v = normal(rows);
    if (!v) continue;
    const Vector p = (h * *v).cwiseAbs();
    best = std::min(best, (p.sum() - p(j)) - p(j));
  }
  return best;
}

// Best objective over every nonsingular N-row interpolation.
inline double lav_min_objective(const Matrix& h, const Vector& z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sub : subsets(h.rows(), h.cols())) {
    Matrix a(h.cols(), h.cols());
    Vector b(h.cols());
    for (Index r = 0; r < h.cols(); ++r) {
      a.row(r) = h.row(sub[static_cast<std::size_t>(r)]);
      b(r) = z(sub[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) continue;
    const Vector theta = lu.solve(b);
    best = std::min(best, (z - h * theta).cwiseAbs().sum());
  }
  return best;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Projection statistics with the S_n scale, written the slow way: lomed and
// himed by full sorting.
inline Vector ps_sn(const Matrix& h) {
  const Index m = h.rows();
  const Index n = h.cols();
  Vector med(n);
  for (Index k = 0; k < n; ++k) {
    std::vector<double> col(h.col(k).data(), h.col(k).data() + m);
    med(k) = median(col);
  }
  Vector ps = Vector::Zero(m);
  for (Index d = 0; d < m; ++d) {
    Vector u = h.row(d).transpose() - med;
    if (u.norm() == 0.0) continue;
    u.normalize();
    std::vector<double> z(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) z[static_cast<std::size_t>(i)] = h.row(i).dot(u);
    std::vector<double> inner;
    for (std::size_t i = 0; i < z.size(); ++i) {
      std::vector<double> diffs;
      for (std::size_t k = 0; k < z.size(); ++k) diffs.push_back(std::abs(z[i] - z[k]));
      std::sort(diffs.begin(), diffs.end());
      inner.push_back(diffs[diffs.size() / 2]);  // high median
    }
    std::sort(inner.begin(), inner.end());
    const double scale = 1.1926 * inner[(inner.size() + 1) / 2 - 1];  // low median
    if (scale == 0.0) continue;
    const double center = median(z);
    for (Index i = 0; i < m; ++i) ps(i) = std::max(ps(i), std::abs(z[static_cast<std::size_t>(i)] - center) / scale);
  }
  return ps;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) a(i, k) = g(rng);
  }
  return a;
}

inline Vector random_vector(std::mt19937_64& rng, Index n, double sd = 1.0) {
  return random_matrix(rng, n, 1, sd).col(0);
}

// Random full-column-rank model, redrawn until well conditioned.
inline Matrix random_full_rank(std::mt19937_64& rng, Index rows, Index cols) {
  while (true) {
    Matrix a = random_matrix(rng, rows, cols);
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) > 1e-3 * s(0)) return a;
  }
}

}  // namespace oracle
