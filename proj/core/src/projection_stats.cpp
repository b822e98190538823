#include "lavlev/projection_stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "lavlev/errors.hpp"

namespace lavlev {
namespace {

constexpr double kSnConstant = 1.1926;
constexpr double kMadConstant = 1.4826;
constexpr double kZeroScale = 1e-12;

// k-th smallest (1-based) of the values.
double order_statistic(std::vector<double>& values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k - 1), values.end());
  return values[k - 1];
}

double low_median(std::vector<double> values) { return order_statistic(values, (values.size() + 1) / 2); }
double high_median(std::vector<double> values) { return order_statistic(values, values.size() / 2 + 1); }

double sn_scale(const std::vector<double>& z) {
  std::vector<double> inner(z.size());
  std::vector<double> diffs(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j) diffs[j] = std::abs(z[i] - z[j]);
    inner[i] = high_median(diffs);
  }
  return kSnConstant * low_median(std::move(inner));
}

double mad_scale(const std::vector<double>& z, double center) {
  std::vector<double> dev(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) dev[i] = std::abs(z[i] - center);
  return kMadConstant * median(std::move(dev));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double chi2_quantile(int d, double p) {
  if (d < 1 || !(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "chi2_quantile needs d >= 1 and 0 < p < 1");
  }
  return 2.0 * boost::math::gamma_p_inv(0.5 * d, p);
}

PsReport compute_ps(const MeasurementModel& model, const PsOptions& options) {
  check_invariants(model);
  const Index m = model.rows();
  const Index n = model.cols();
  if (m < 2) throw Error(ErrorCode::kDimensionMismatch, "projection statistics need M >= 2");

  PsReport report;
  report.variant = std::string("directions h_k - coordinatewise median; scale ") +
                   (options.scale == PsScale::kSn ? "S_n (c=1.1926)" : "MAD (c=1.4826)");
  report.ps = Vector::Zero(m);
  report.dof.resize(static_cast<std::size_t>(m));
  report.cutoff.resize(m);
  report.flagged.assign(static_cast<std::size_t>(m), false);

  Vector center(n);
  for (Index c = 0; c < n; ++c) {
    std::vector<double> col(model.h.col(c).data(), model.h.col(c).data() + m);
    center(c) = median(std::move(col));
  }

  std::vector<double> z(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    Vector u = model.h.row(k).transpose() - center;
    const double norm = u.norm();
    if (norm < kZeroScale) {
      ++report.directions_skipped_zero_scale;
      continue;
    }
    u /= norm;
    for (Index i = 0; i < m; ++i) z[static_cast<std::size_t>(i)] = model.h.row(i).dot(u);
    const double med = median(z);
    const double scale = options.scale == PsScale::kSn ? sn_scale(z) : mad_scale(z, med);
    if (scale < kZeroScale) {
      ++report.directions_skipped_zero_scale;
      continue;
    }
    ++report.directions_used;
    for (Index i = 0; i < m; ++i) {
      report.ps(i) = std::max(report.ps(i), std::abs(z[static_cast<std::size_t>(i)] - med) / scale);
    }
  }
  report.defined = report.directions_used > 0;

  for (Index i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    report.dof[ui] = static_cast<int>((model.h.row(i).array() != 0.0).count());
    report.cutoff(i) = report.dof[ui] > 0 ? chi2_quantile(report.dof[ui], options.quantile)
                                          : std::numeric_limits<double>::infinity();
    report.flagged[ui] = report.defined && report.ps(i) > report.cutoff(i);
  }
  return report;
}

}  // namespace lavlev
