#pragma once

#include <vector>

#include "lavlev/model.hpp"

namespace lavlev {

// Result of a least-absolute-value fit.
struct LavSolution {
  Vector theta_hat;
  Vector residuals;           // z - H * theta_hat
  double objective = 0.0;     // sum |residuals|
  std::vector<Index> zero_set;  // rows with |r_i| < zero_tol
  int iterations = 0;
  bool degenerate = false;    // optimal basis admits an alternative optimum
};

struct LavOptions {
  double zero_tol = 1e-8;
  int max_iterations = 0;  // 0: 100 * (M + N) + 1000
};

// Solves  min sum |z - H theta|  as the LP
//   min 1^T (u + w)  s.t.  H theta + u - w = z,  u, w >= 0,  theta free
// with a dense primal simplex. The states enter the basis first and never
// leave, so the optimal vertex interpolates at least N rows. Pricing is
// Dantzig's rule, falling back to Bland's rule after a run of degenerate
// pivots.
LavSolution solve_lav(const MeasurementModel& model, const LavOptions& options = {});
LavSolution solve_lav(const MeasurementModel& model, double zero_tol);

// Brute-force reference: tries every nonsingular N-row interpolation and
// keeps the best (lowest lexicographic subset on ties). Guarded to M <= 20,
// N <= 4; throws kTooLarge otherwise.
LavSolution lav_vertex_oracle(const MeasurementModel& model, double zero_tol = 1e-8);

// F(theta) = sum |z_i - h_i . theta|.
double objective_at(const MeasurementModel& model, const Eigen::Ref<const Vector>& theta);

}  // namespace lavlev
