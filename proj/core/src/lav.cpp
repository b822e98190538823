#include "lavlev/lav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lavlev/errors.hpp"

namespace lavlev {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-10;
constexpr double kDualDegeneracyTol = 1e-9;

// Dense tableau over variables [theta (N) | u (M) | w (M)]. Every row holds
// exactly one basic variable; rows whose basic variable is a state are
// exempt from the ratio test.
class Tableau {
 public:
  explicit Tableau(const MeasurementModel& model)
      : m_(model.rows()), n_(model.cols()), t_(m_, n_ + 2 * m_), rhs_(model.z), basic_(m_) {
    t_.setZero();
    t_.leftCols(n_) = model.h;
    for (Index i = 0; i < m_; ++i) {
      t_(i, n_ + i) = 1.0;
      t_(i, n_ + m_ + i) = -1.0;
      if (rhs_(i) < 0) {
        t_.row(i) *= -1.0;
        rhs_(i) = -rhs_(i);
        basic_[static_cast<std::size_t>(i)] = n_ + m_ + i;
      } else {
        basic_[static_cast<std::size_t>(i)] = n_ + i;
      }
    }
  }

  Index vars() const { return t_.cols(); }
  bool is_state(Index var) const { return var < n_; }
  Index basic(Index row) const { return basic_[static_cast<std::size_t>(row)]; }

  void pivot(Index row, Index col) {
    const double p = t_(row, col);
    t_.row(row) /= p;
    rhs_(row) /= p;
    for (Index i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) {
        t_.row(i) -= f * t_.row(row);
        rhs_(i) -= f * rhs_(row);
      }
    }
    t_.col(col).setZero();
    t_(row, col) = 1.0;
    basic_[static_cast<std::size_t>(row)] = col;
  }

  // Residual rows with a negative value swap u_i <-> w_i by negating the row.
  void restore_feasibility() {
    for (Index i = 0; i < m_; ++i) {
      const Index b = basic(i);
      if (is_state(b) || rhs_(i) >= 0) continue;
      t_.row(i) *= -1.0;
      rhs_(i) = -rhs_(i);
      const Index row_of_pair = (b < n_ + m_) ? b - n_ : b - n_ - m_;
      basic_[static_cast<std::size_t>(i)] = (b < n_ + m_) ? n_ + m_ + row_of_pair : n_ + row_of_pair;
    }
  }

  // Phase 0: bring every state into the basis with partial pivoting.
  void enter_states() {
    for (Index k = 0; k < n_; ++k) {
      Index best = -1;
      double best_abs = 0.0;
      for (Index i = 0; i < m_; ++i) {
        if (is_state(basic(i))) continue;
        if (std::abs(t_(i, k)) > best_abs) {
          best_abs = std::abs(t_(i, k));
          best = i;
        }
      }
      if (best < 0 || best_abs <= kPivotTol) {
        throw Error(ErrorCode::kRankDeficient, "state column " + std::to_string(k) +
                                                   " cannot enter the basis");
      }
      pivot(best, k);
      restore_feasibility();
    }
  }

  Eigen::RowVectorXd reduced_costs() const {
    Eigen::RowVectorXd d(vars());
    for (Index j = 0; j < vars(); ++j) d(j) = is_state(j) ? 0.0 : 1.0;
    for (Index i = 0; i < m_; ++i) {
      if (!is_state(basic(i))) d -= t_.row(i);
    }
    return d;
  }

  // Ratio test over residual rows only; ties go to the smallest basic index.
  Index leaving_row(Index col, double* step) const {
    Index best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m_; ++i) {
      if (is_state(basic(i))) continue;
      const double a = t_(i, col);
      if (a <= kPivotTol) continue;
      const double ratio = rhs_(i) / a;
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && best >= 0 && basic(i) < basic(best))) {
        best_ratio = std::min(best_ratio, ratio);
        best = i;
      }
    }
    *step = best_ratio;
    return best;
  }

  std::vector<bool> basic_mask() const {
    std::vector<bool> mask(static_cast<std::size_t>(vars()), false);
    for (Index b : basic_) mask[static_cast<std::size_t>(b)] = true;
    return mask;
  }

  // Rows whose u_i and w_i are both nonbasic (interpolated measurements).
  std::vector<Index> interpolated_rows() const {
    const auto mask = basic_mask();
    std::vector<Index> rows;
    for (Index i = 0; i < m_; ++i) {
      if (!mask[static_cast<std::size_t>(n_ + i)] && !mask[static_cast<std::size_t>(n_ + m_ + i)]) {
        rows.push_back(i);
      }
    }
    return rows;
  }

  Vector states() const {
    Vector theta = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      if (is_state(basic(i))) theta(basic(i)) = rhs_(i);
    }
    return theta;
  }

 private:
  Index m_;
  Index n_;
  Matrix t_;
  Vector rhs_;
  std::vector<Index> basic_;
};

LavSolution finish(const MeasurementModel& model, Vector theta, double zero_tol) {
  LavSolution sol;
  sol.residuals = model.z - model.h * theta;
  sol.theta_hat = std::move(theta);
  sol.objective = sol.residuals.lpNorm<1>();
  for (Index i = 0; i < sol.residuals.size(); ++i) {
    if (std::abs(sol.residuals(i)) < zero_tol) sol.zero_set.push_back(i);
  }
  return sol;
}

}  // namespace

double objective_at(const MeasurementModel& model, const Eigen::Ref<const Vector>& theta) {
  if (theta.size() != model.cols() || model.z.size() != model.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta has length " + std::to_string(theta.size()) +
                                                   ", expected " + std::to_string(model.cols()));
  }
  return (model.z - model.h * theta).lpNorm<1>();
}

LavSolution solve_lav(const MeasurementModel& model, double zero_tol) {
  LavOptions options;
  options.zero_tol = zero_tol;
  return solve_lav(model, options);
}

LavSolution solve_lav(const MeasurementModel& input, const LavOptions& options) {
  const MeasurementModel& model = input;
  validate_model(model);
  const Index m = model.rows();
  const Index n = model.cols();
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(100 * (m + n) + 1000);

  Tableau tab(model);
  tab.enter_states();
  int iterations = static_cast<int>(n);

  bool bland = false;
  int degenerate_run = 0;
  Eigen::RowVectorXd d = tab.reduced_costs();
  for (;;) {
    Index entering = -1;
    double most_negative = -kCostTol;
    const auto mask = tab.basic_mask();
    for (Index j = n; j < tab.vars(); ++j) {
      if (mask[static_cast<std::size_t>(j)]) continue;
      if (d(j) < most_negative) {
        entering = j;
        if (bland) break;
        most_negative = d(j);
      }
    }
    if (entering < 0) break;

    double step = 0.0;
    const Index row = tab.leaving_row(entering, &step);
    if (row < 0) throw Error(ErrorCode::kUnbounded, "LAV objective unbounded below");
    if (step <= 1e-12) {
      if (++degenerate_run > 2 * m) bland = true;
    } else {
      degenerate_run = 0;
    }
    tab.pivot(row, entering);
    d = tab.reduced_costs();
    if (++iterations > max_iterations) {
      throw Error(ErrorCode::kMaxIterations,
                  "simplex exceeded " + std::to_string(max_iterations) + " iterations");
    }
  }

  // Re-solve the interpolated rows directly to strip tableau round-off.
  Vector theta = tab.states();
  const std::vector<Index> rows = tab.interpolated_rows();
  if (static_cast<Index>(rows.size()) == n) {
    Matrix hs(n, n);
    Vector zs(n);
    for (Index r = 0; r < n; ++r) {
      hs.row(r) = model.h.row(rows[static_cast<std::size_t>(r)]);
      zs(r) = model.z(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Matrix> lu(hs);
    if (lu.isInvertible()) theta = lu.solve(zs);
  }

  LavSolution sol = finish(model, std::move(theta), options.zero_tol);
  sol.iterations = iterations;
  const auto mask = tab.basic_mask();
  for (Index j = n; j < tab.vars(); ++j) {
    if (!mask[static_cast<std::size_t>(j)] && std::abs(d(j)) <= kDualDegeneracyTol) {
      sol.degenerate = true;
      break;
    }
  }
  return sol;
}

LavSolution lav_vertex_oracle(const MeasurementModel& model, double zero_tol) {
  check_invariants(model);
  const Index m = model.rows();
  const Index n = model.cols();
  if (m > 20 || n > 4) {
    throw Error(ErrorCode::kTooLarge, "vertex oracle limited to M <= 20, N <= 4");
  }
  validate_model(model);

  std::vector<Index> subset(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) subset[static_cast<std::size_t>(k)] = k;

  double best = std::numeric_limits<double>::infinity();
  Vector best_theta;
  bool tie = false;
  int examined = 0;
  Matrix hs(n, n);
  Vector zs(n);
  for (;;) {
    for (Index r = 0; r < n; ++r) {
      hs.row(r) = model.h.row(subset[static_cast<std::size_t>(r)]);
      zs(r) = model.z(subset[static_cast<std::size_t>(r)]);
    }
    ++examined;
    if (rank(hs) == n) {
      const Vector theta = hs.fullPivLu().solve(zs);
      const double f = objective_at(model, theta);
      if (f < best - 1e-9) {
        best = f;
        best_theta = theta;
        tie = false;
      } else if (std::abs(f - best) <= 1e-9 && (theta - best_theta).lpNorm<Eigen::Infinity>() > 1e-9) {
        tie = true;
      }
    }
    // Next subset in lexicographic order.
    Index k = n - 1;
    while (k >= 0 && subset[static_cast<std::size_t>(k)] == m - n + k) --k;
    if (k < 0) break;
    ++subset[static_cast<std::size_t>(k)];
    for (Index t = k + 1; t < n; ++t) {
      subset[static_cast<std::size_t>(t)] = subset[static_cast<std::size_t>(t - 1)] + 1;
    }
  }

  LavSolution sol = finish(model, best_theta, zero_tol);
  sol.iterations = examined;
  sol.degenerate = tie;
  return sol;
}

}  // namespace lavlev
