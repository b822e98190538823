#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lavlev/fixtures.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/projection_stats.hpp"

namespace lavlev {

// Random extra-row experiment on the 3-bus DC model: a row h8 is appended,
// its measurement carries a gross error, and the LAV fit either follows the
// true state or is dragged away.
struct MCConfig {
  int trials = 2000;
  double row_mean = 0.0;
  double row_variance = 30.0;
  double state_variance = 1.0;
  double gross_error = 10.0;
  std::uint64_t seed = 0;
  double boundary_band = 0.05;  // |q - s| / max(q, eps) below this is excluded
  double deviation_tol = 0.1;   // max-norm state error counted as a deviation
  unsigned threads = 0;         // 0: hardware concurrency
};

enum class TrialStatus { kOk, kSkipped, kSolverError };
const char* to_string(TrialStatus status);

struct MCTrialRecord {
  int trial = 0;
  Vector extra_row;
  Vector theta_true;
  bool detector_flagged = false;
  Verdict verdict = Verdict::kClean;
  bool lav_deviated = false;
  double deviation = 0.0;   // || theta_hat - theta_true ||_inf
  double s_q_margin = 0.0;  // best (q - s) / max(q, eps) over all bases
  bool near_boundary = false;
  TrialStatus status = TrialStatus::kOk;
  std::string note;
};

struct MCSummary {
  int trials = 0;
  int skipped = 0;
  int solver_errors = 0;
  int near_boundary = 0;
  int outside_band = 0;
  int agree_outside_band = 0;
  int flagged = 0;
  int deviated = 0;
  double agreement() const {
    return outside_band == 0 ? 0.0 : static_cast<double>(agree_outside_band) / outside_band;
  }
};

// One trial on base + extra_row with z = H theta_true and the gross error
// added to the last measurement. A zero extra row is recorded as skipped.
MCTrialRecord run_trial(const MeasurementModel& base, const Vector& extra_row,
                        const Vector& theta_true, const MCConfig& cfg);

// Draws every (extra_row, theta_true) pair from one mt19937_64 stream, then
// runs the trials (in parallel when allowed). Records come back in trial
// order, so the output depends only on the seed.
std::vector<MCTrialRecord> run_monte_carlo(const MeasurementModel& base, const MCConfig& cfg);

MCSummary summarize(const std::vector<MCTrialRecord>& records);

// Columns: h81,h82,...,flagged,deviated,margin,deviation,near_boundary,status
void write_mc_csv(std::ostream& out, const std::vector<MCTrialRecord>& records);

// Leverage-test sums for the five directions of the printed 3-bus table. The
// table's "s" column holds |h_j . v| and its "q" column the sum over the
// other rows.
struct Table4Entry {
  Index row = 0;
  int column = 0;
  Vector v;
  double own = 0.0;     // |h_j . v|
  double others = 0.0;  // sum_{i != j} |h_i . v|
  double printed_own = 0.0;
  double printed_others = 0.0;
  int decimals_own = 0;
  int decimals_others = 0;
  bool match = false;
};

struct Table4Report {
  std::vector<Table4Entry> entries;
  std::vector<std::string> directions;  // printed headers
  int matched = 0;                      // (own, others) pairs in agreement
  int total = 0;
  double tolerance = 1e-2;
  bool passed() const { return matched == total; }
};

Table4Report reproduce_table4();

struct Table2Report {
  PsReport ps;
  Vector printed_ps;
  Vector printed_cutoff;
  std::vector<int> printed_dof;
  std::vector<Index> expected_flagged;  // 0-based
  bool flags_match = false;
  bool cutoffs_match = false;  // to 3 decimals
  bool dof_match = false;
  bool passed() const { return flags_match && cutoffs_match && dof_match; }
};

Table2Report reproduce_table2(const PsOptions& options = {});

struct Table1Comparison {
  Index row = 0;
  std::string label;
  fixtures::Table1Mark blue = fixtures::Table1Mark::kAbsent;
  fixtures::Table1Mark red = fixtures::Table1Mark::kAbsent;
  bool table_leverage = false;
  Verdict verdict = Verdict::kClean;
  bool match = false;         // flagged (Leverage or Boundary) == table_leverage
  bool strict_match = false;  // verdict Leverage == table_leverage
};

struct Table1Report {
  PartitionedReport report;
  std::vector<Table1Comparison> rows;
  int agree = 0;
  int strict_agree = 0;
  bool data_independent = false;
  double required_agreement = 0.9;
  double agreement() const { return rows.empty() ? 0.0 : static_cast<double>(agree) / rows.size(); }
  double strict_agreement() const {
    return rows.empty() ? 0.0 : static_cast<double>(strict_agree) / rows.size();
  }
  bool full_match() const { return agree == static_cast<int>(rows.size()); }
  bool passed() const { return data_independent && agreement() >= required_agreement; }
};

// Runs the 14-bus partitions (the built-in ones when `partitions` is empty),
// compares against the reference classification and repeats the run with
// 10 p.u. errors on the biased rows to confirm the flags do not change.
Table1Report reproduce_table1(const std::vector<PartitionSpec>& partitions = {},
                              const DetectOptions& options = {});

}  // namespace lavlev
