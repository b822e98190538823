#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lavlev/model.hpp"

namespace lavlev {

enum class Verdict { kClean, kBoundary, kLeverage };

const char* to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view text);

// Certificate for a flagged row j: a basis of N-1 other rows, the unit
// vector v completing it, and the two sides of the test
//   s = sum_{i != j} |h_i . v|   <=   q = |h_j . v|.
struct LeverageWitness {
  Index row_index = 0;
  std::vector<Index> basis;
  Vector v;
  double s = 0.0;
  double q = 0.0;
  Verdict verdict = Verdict::kLeverage;
  std::string partition;  // empty when found on the whole model
};

struct DetectOptions {
  double boundary_tol = 1e-9;
  double strict_margin = 1e-6;
  // Maximum number of full-rank bases evaluated per row.
  std::optional<std::uint64_t> budget;
  // Disable early exit. The stored witness is then the one with the largest
  // relative margin (q - s) / max(q, eps), earliest subset on ties.
  bool exhaustive = false;
  unsigned threads = 0;  // 0: std::thread::hardware_concurrency()
};

struct RowScan {
  Index row_index = 0;
  Verdict verdict = Verdict::kClean;
  std::optional<LeverageWitness> witness;
  std::uint64_t combos_examined = 0;
  std::uint64_t combos_skipped_degenerate = 0;
  bool inconclusive = false;  // budget exhausted before any witness
  bool early_exit = false;
  // Largest (q - s) / max(q, eps) over evaluated bases; only meaningful
  // after an exhaustive scan. -inf when no basis was evaluated.
  double best_margin = 0.0;
};

struct RowVerdict {
  Index row = 0;
  std::string label;
  Verdict verdict = Verdict::kClean;
  bool inconclusive = false;
};

struct LeverageReport {
  std::vector<RowVerdict> rows;
  std::vector<LeverageWitness> witnesses;  // one per flagged row, by row
  std::uint64_t combos_examined = 0;
  std::uint64_t combos_skipped_degenerate = 0;
  bool exhaustive = true;
  std::vector<std::string> notes;

  std::vector<Index> flagged() const;  // Leverage or Boundary rows
  const LeverageWitness* witness_for(Index row) const;
};

// Classification of a single (s, q) pair under the given tolerances.
std::optional<Verdict> classify(double s, double q, const DetectOptions& options);

// Leverage scan of one row. Throws kIndexOutOfRange or kRankDeficient.
RowScan scan_row(const MeasurementModel& model, Index j, const DetectOptions& options = {});

// First witness (lexicographic subset order) for row j, if any.
std::optional<LeverageWitness> detect_row(const MeasurementModel& model, Index j,
                                          const DetectOptions& options = {});

LeverageReport detect_all(const MeasurementModel& model, const DetectOptions& options = {});

// C(m-1, n-1): number of (n-1)-row bases per tested row. Throws
// kInvalidArgument unless m >= n >= 1.
boost::multiprecision::cpp_int combination_count(long m, long n);

// Measurement subset analysed on its own. state_columns is derived from the
// support of the selected rows.
struct Partition {
  std::string name;
  std::vector<Index> measurement_indices;
  std::vector<Index> state_columns;
  std::vector<Index> fixed_columns;  // support columns held at zero
};

// User-facing membership: labels or row indices.
struct PartitionSpec {
  std::string name;
  std::vector<std::variant<Index, std::string>> measurements;
  // States held at zero inside this partition, e.g. a local angle reference
  // for an island that does not reach the global one. Labels or columns.
  std::vector<std::variant<Index, std::string>> fixed_states;
};

// Resolves and validates a partition (kEmptyPartition, kUnknownLabel,
// kIndexOutOfRange, kRankDeficient with the partition name in the message).
Partition make_partition(const MeasurementModel& model, const PartitionSpec& spec);

struct PartitionOutcome {
  std::string name;
  Partition partition;
  LeverageReport report;  // indices refer to the parent model
};

struct ConsistencyNote {
  Index row = 0;
  std::string label;
  std::vector<std::pair<std::string, Verdict>> verdicts;  // per partition
  std::string text;
};

struct PartitionedReport {
  LeverageReport merged;
  std::vector<PartitionOutcome> partitions;
  std::vector<ConsistencyNote> consistency;
  std::vector<bool> covered;  // row appears in at least one partition
};

// Runs detect_all per partition and merges conservatively: a row takes the
// most severe verdict it received in any partition.
PartitionedReport detect_partitioned(const MeasurementModel& model,
                                     const std::vector<Partition>& partitions,
                                     const DetectOptions& options = {});

}  // namespace lavlev
