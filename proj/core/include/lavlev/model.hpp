#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lavlev {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Linear measurement model  H * theta + e = z.
//
// h is M x N with M >= N >= 1, z has length M and labels name the M
// measurements. state_labels is optional (empty, or one name per column).
// true_states is only set by experiment fixtures and model builders.
struct MeasurementModel {
  Matrix h;
  Vector z;
  std::vector<std::string> labels;
  std::vector<std::string> state_labels;
  std::optional<Vector> true_states;

  Index rows() const { return h.rows(); }
  Index cols() const { return h.cols(); }

  // Throws Error(kUnknownLabel) when the label is absent.
  Index row_index(std::string_view label) const;
};

// Builds a model with default labels "m1".."mM" and z = 0 when not given.
MeasurementModel make_model(Matrix h, std::optional<Vector> z = std::nullopt,
                            std::vector<std::string> labels = {});

// Shape, label-uniqueness and finiteness checks only (no rank test).
void check_invariants(const MeasurementModel& model);

// Full validation: invariants plus full column rank. Throws
// kDimensionMismatch, kNonFinite, kInvalidArgument (duplicate labels) or
// kRankDeficient carrying the computed rank.
MeasurementModel validate_model(MeasurementModel model);

// Numerical rank; singular values above max(M,N) * sigma_max * 1e-12 count.
Index rank(const Eigen::Ref<const Matrix>& matrix);

// Restriction of a model to the given rows and columns (in the given order).
MeasurementModel submodel(const MeasurementModel& model, std::span<const Index> rows,
                          std::span<const Index> cols);

struct ProjectionDiagnostics {
  Matrix p;     // M x M hat matrix H (H^T H)^-1 H^T
  Vector diag;  // influence values p_ii
};

// Hat matrix computed from a thin Householder QR (P = Q Q^T).
ProjectionDiagnostics projection_matrix(const MeasurementModel& model);

// Unit vector spanning the null space of an (N-1) x N matrix of rank N-1.
// Sign convention: the first component with |v_k| > 1e-12 is positive.
// Throws kDegenerateBasis if the rows have rank below N-1 and
// kDimensionMismatch if the matrix is not (N-1) x N.
Vector nullspace_unit_vector(const Eigen::Ref<const Matrix>& rows);

// Flips v so its first non-negligible component is positive.
void canonicalize_sign(Vector& v);

}  // namespace lavlev
