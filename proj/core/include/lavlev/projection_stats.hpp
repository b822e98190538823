#pragma once

#include <string>
#include <vector>

#include "lavlev/model.hpp"

namespace lavlev {

// Robust scale applied to the projections along each direction.
enum class PsScale {
  kSn,   // Rousseeuw-Croux S_n: 1.1926 * lomed_i himed_j |z_i - z_j|
  kMad,  // 1.4826 * median |z_i - median(z)|
};

struct PsOptions {
  PsScale scale = PsScale::kSn;
  double quantile = 0.975;
};

struct PsReport {
  Vector ps;               // projection statistic per row (0 when undefined)
  std::vector<int> dof;    // nonzero entries per row
  Vector cutoff;           // chi2_{dof, quantile}
  std::vector<bool> flagged;
  bool defined = true;     // false when every direction had zero scale
  int directions_used = 0;
  int directions_skipped_zero_scale = 0;  // zero direction or zero scale
  std::string variant;
};

// Projection statistics. Directions are h_k - m (m the coordinate-wise
// median of the rows, zero directions dropped); along each unit direction
// the projections z are standardized as |z_i - med(z)| / scale(z) and ps_i
// is the maximum over directions. Directions with zero scale are skipped
// and counted. Needs M >= 2.
PsReport compute_ps(const MeasurementModel& model, const PsOptions& options = {});

// p-quantile of the chi-square distribution with d degrees of freedom.
// Throws kInvalidArgument unless d >= 1 and 0 < p < 1.
double chi2_quantile(int d, double p = 0.975);

// Median; even-sized inputs average the two central values.
double median(std::vector<double> values);

}  // namespace lavlev
