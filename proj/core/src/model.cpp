#include "lavlev/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "lavlev/errors.hpp"

namespace lavlev {

Index MeasurementModel::row_index(std::string_view label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw Error(ErrorCode::kUnknownLabel, "no measurement labelled '" + std::string(label) + "'");
  }
  return static_cast<Index>(it - labels.begin());
}

MeasurementModel make_model(Matrix h, std::optional<Vector> z, std::vector<std::string> labels) {
  MeasurementModel model;
  model.z = z ? std::move(*z) : Vector::Zero(h.rows());
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(h.rows()));
    for (Index i = 0; i < h.rows(); ++i) labels.push_back("m" + std::to_string(i + 1));
  }
  model.h = std::move(h);
  model.labels = std::move(labels);
  return model;
}

void check_invariants(const MeasurementModel& model) {
  const Index m = model.rows();
  const Index n = model.cols();
  if (n < 1 || m < n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need M >= N >= 1, got M=" + std::to_string(m) + " N=" + std::to_string(n));
  }
  if (model.z.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "z has length " + std::to_string(model.z.size()) +
                                                   ", expected " + std::to_string(m));
  }
  if (static_cast<Index>(model.labels.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "expected one label per measurement row");
  }
  if (!model.state_labels.empty() && static_cast<Index>(model.state_labels.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "expected one state label per column");
  }
  if (model.true_states && model.true_states->size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "true_states has wrong length");
  }
  if (!model.h.allFinite() || !model.z.allFinite() ||
      (model.true_states && !model.true_states->allFinite())) {
    throw Error(ErrorCode::kNonFinite, "model contains NaN or infinite entries");
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : model.labels) {
    if (!seen.insert(label).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate measurement label '" + label + "'");
    }
  }
}

MeasurementModel validate_model(MeasurementModel model) {
  check_invariants(model);
  const Index r = rank(model.h);
  if (r < model.cols()) {
    throw Error(ErrorCode::kRankDeficient,
                "H has rank " + std::to_string(r) + " < N=" + std::to_string(model.cols()), r);
  }
  return model;
}

Index rank(const Eigen::Ref<const Matrix>& matrix) {
  if (matrix.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(matrix);
  const Vector& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  if (sigma_max == 0.0) return 0;
  const double threshold =
      static_cast<double>(std::max(matrix.rows(), matrix.cols())) * sigma_max * 1e-12;
  return static_cast<Index>((sigma.array() > threshold).count());
}

MeasurementModel submodel(const MeasurementModel& model, std::span<const Index> rows,
                          std::span<const Index> cols) {
  MeasurementModel out;
  out.h.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.z.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= model.rows()) {
      throw Error(ErrorCode::kIndexOutOfRange, "row " + std::to_string(rows[r]));
    }
    out.z(static_cast<Index>(r)) = model.z(rows[r]);
    out.labels.push_back(model.labels[static_cast<std::size_t>(rows[r])]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] < 0 || cols[c] >= model.cols()) {
        throw Error(ErrorCode::kIndexOutOfRange, "column " + std::to_string(cols[c]));
      }
      out.h(static_cast<Index>(r), static_cast<Index>(c)) = model.h(rows[r], cols[c]);
    }
  }
  if (!model.state_labels.empty()) {
    for (Index c : cols) out.state_labels.push_back(model.state_labels[static_cast<std::size_t>(c)]);
  }
  if (model.true_states) {
    Vector t(static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) t(static_cast<Index>(c)) = (*model.true_states)(cols[c]);
    out.true_states = std::move(t);
  }
  return out;
}

ProjectionDiagnostics projection_matrix(const MeasurementModel& model) {
  check_invariants(model);
  const Index m = model.rows();
  const Index n = model.cols();
  const Index r = rank(model.h);
  if (r < n) {
    throw Error(ErrorCode::kRankDeficient, "projection needs full column rank", r);
  }
  Eigen::HouseholderQR<Matrix> qr(model.h);
  const Matrix q = qr.householderQ() * Matrix::Identity(m, n);
  ProjectionDiagnostics out;
  out.p = q * q.transpose();
  out.diag = out.p.diagonal();
  return out;
}

void canonicalize_sign(Vector& v) {
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      if (v(k) < 0) v = -v;
      return;
    }
  }
}

Vector nullspace_unit_vector(const Eigen::Ref<const Matrix>& rows) {
  const Index n = rows.cols();
  if (n < 1 || rows.rows() != n - 1) {
    throw Error(ErrorCode::kDimensionMismatch, "expected an (N-1) x N basis, got " +
                                                   std::to_string(rows.rows()) + " x " +
                                                   std::to_string(n));
  }
  if (n == 1) return Vector::Ones(1);
  if (!rows.allFinite()) throw Error(ErrorCode::kNonFinite, "basis rows are not finite");
  const Index r = rank(rows);
  if (r < n - 1) {
    throw Error(ErrorCode::kDegenerateBasis,
                "basis has rank " + std::to_string(r) + " < " + std::to_string(n - 1), r);
  }
  // The last column of the full Q of rows^T is orthogonal to the row span.
  Eigen::HouseholderQR<Matrix> qr(rows.transpose());
  const Matrix q = qr.householderQ();
  Vector v = q.col(n - 1);
  v.normalize();
  canonicalize_sign(v);
  return v;
}

}  // namespace lavlev
