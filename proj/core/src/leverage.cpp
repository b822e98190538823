#include "lavlev/leverage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "lavlev/errors.hpp"

namespace lavlev {
namespace {

using u64 = std::uint64_t;

constexpr double kDependenceTol = 1e-10;
constexpr double kMarginEps = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

u64 saturating_add(u64 a, u64 b) {
  return a > std::numeric_limits<u64>::max() - b ? std::numeric_limits<u64>::max() : a + b;
}

class BinomialTable {
 public:
  explicit BinomialTable(Index n_max)
      : size_(n_max + 1), table_(static_cast<std::size_t>(size_ * size_), 0) {
    for (Index n = 0; n < size_; ++n) {
      at(n, 0) = 1;
      for (Index k = 1; k <= n; ++k) at(n, k) = saturating_add(at(n - 1, k - 1), at(n - 1, k));
    }
  }

  u64 operator()(Index n, Index k) const {
    if (n < 0 || k < 0 || k > n || n >= size_) return 0;
    return table_[static_cast<std::size_t>(n * size_ + k)];
  }

 private:
  u64& at(Index n, Index k) { return table_[static_cast<std::size_t>(n * size_ + k)]; }
  Index size_;
  std::vector<u64> table_;
};

double relative_margin(double s, double q) { return (q - s) / std::max(q, kMarginEps); }

struct BranchResult {
  std::optional<LeverageWitness> witness;
  double witness_margin = kNegInf;
  double best_margin = kNegInf;
  u64 examined = 0;
  u64 skipped = 0;
  bool found = false;
  bool budget_hit = false;
  bool cancelled = false;
};

// Shared, read-only view of the model for every branch of every row.
struct SearchContext {
  const MeasurementModel* model = nullptr;
  std::vector<double> h;  // row-major copy
  std::vector<double> row_norm;
  Index m = 0;
  Index n = 0;
  const DetectOptions* options = nullptr;
  BinomialTable binomial{0};

  const double* row(Index i) const { return h.data() + i * n; }
};

// Depth-first enumeration of (N-1)-subsets of the rows other than j, in
// lexicographic order, with an incrementally built orthonormal basis. A row
// that is dependent on the current prefix makes every completion degenerate,
// so the whole subtree is counted as skipped without being visited.
class BranchSearch {
 public:
  BranchSearch(const SearchContext& ctx, Index j, Index branch,
               const std::atomic<Index>* winning_branch)
      : ctx_(ctx),
        j_(j),
        branch_(branch),
        winning_branch_(winning_branch),
        basis_(static_cast<std::size_t>(std::max<Index>(ctx.n - 1, 0) * ctx.n), 0.0),
        v_(static_cast<std::size_t>(ctx.n), 0.0) {
    for (Index i = 0; i < ctx.m; ++i) {
      if (i != j) candidates_.push_back(i);
    }
  }

  BranchResult run() {
    const Index need = ctx_.n - 1;
    if (need == 0) {
      evaluate_leaf();
      return std::move(result_);
    }
    if (branch_ < 0) {
      descend(0, 0);
    } else {
      try_candidate(0, branch_, need);
    }
    return std::move(result_);
  }

 private:
  bool stopped() const { return result_.found || result_.budget_hit || result_.cancelled; }

  void descend(Index depth, Index start) {
    const Index need = ctx_.n - 1 - depth;
    const Index count = static_cast<Index>(candidates_.size());
    for (Index p = start; p <= count - need && !stopped(); ++p) try_candidate(depth, p, need);
  }

  void try_candidate(Index depth, Index p, Index need) {
    const Index count = static_cast<Index>(candidates_.size());
    const Index r = candidates_[static_cast<std::size_t>(p)];
    if (!orthogonalize_into(depth, r)) {
      result_.skipped = saturating_add(result_.skipped, ctx_.binomial(count - p - 1, need - 1));
      return;
    }
    chosen_.push_back(r);
    if (need == 1) {
      evaluate_leaf();
    } else {
      descend(depth + 1, p + 1);
    }
    chosen_.pop_back();
  }

  // Writes the normalized component of row r orthogonal to the first
  // `depth` basis vectors into slot `depth`. Classical Gram-Schmidt applied
  // twice, which is enough for orthogonality at working precision.
  bool orthogonalize_into(Index depth, Index r) {
    const Index n = ctx_.n;
    const double* hr = ctx_.row(r);
    const double norm = ctx_.row_norm[static_cast<std::size_t>(r)];
    if (norm == 0.0) return false;
    double* out = basis_.data() + depth * n;
    std::copy(hr, hr + n, out);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < depth; ++k) {
        const double* qk = basis_.data() + k * n;
        double dot = 0.0;
        for (Index c = 0; c < n; ++c) dot += qk[c] * out[c];
        for (Index c = 0; c < n; ++c) out[c] -= dot * qk[c];
      }
    }
    double res = 0.0;
    for (Index c = 0; c < n; ++c) res += out[c] * out[c];
    res = std::sqrt(res);
    if (res <= kDependenceTol * norm) return false;
    for (Index c = 0; c < n; ++c) out[c] /= res;
    return true;
  }

  void completion_vector() {
    const Index n = ctx_.n;
    const Index k_count = n - 1;
    // Start from the coordinate axis least covered by the basis.
    Index axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < n; ++c) {
      double cover = 0.0;
      for (Index k = 0; k < k_count; ++k) {
        const double x = basis_[static_cast<std::size_t>(k * n + c)];
        cover += x * x;
      }
      if (cover < best) {
        best = cover;
        axis = c;
      }
    }
    std::fill(v_.begin(), v_.end(), 0.0);
    v_[static_cast<std::size_t>(axis)] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < k_count; ++k) {
        const double* qk = basis_.data() + k * n;
        double dot = 0.0;
        for (Index c = 0; c < n; ++c) dot += qk[c] * v_[static_cast<std::size_t>(c)];
        for (Index c = 0; c < n; ++c) v_[static_cast<std::size_t>(c)] -= dot * qk[c];
      }
    }
    double norm = 0.0;
    for (double x : v_) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v_) x /= norm;
  }

  double abs_dot(Index i) const {
    const double* hi = ctx_.row(i);
    double dot = 0.0;
    for (Index c = 0; c < ctx_.n; ++c) dot += hi[c] * v_[static_cast<std::size_t>(c)];
    return std::abs(dot);
  }

  void evaluate_leaf() {
    const DetectOptions& opt = *ctx_.options;
    if (winning_branch_ != nullptr &&
        winning_branch_->load(std::memory_order_relaxed) < branch_) {
      result_.cancelled = true;
      return;
    }
    if (ctx_.n > 1) {
      completion_vector();
    } else {
      v_[0] = 1.0;
    }
    const double q = abs_dot(j_);
    const double limit = q + opt.boundary_tol;
    double s = 0.0;
    for (Index i = 0; i < ctx_.m; ++i) {
      if (i == j_) continue;
      s += abs_dot(i);
      if (!opt.exhaustive && s > limit) break;
    }
    ++result_.examined;
    if (opt.exhaustive) result_.best_margin = std::max(result_.best_margin, relative_margin(s, q));

    if (s <= limit) record_candidate();

    if (opt.budget && result_.examined >= *opt.budget && !stopped()) {
      // Exhaustive scans keep a witness found before the cap, but the row is
      // still truncated.
      result_.budget_hit = true;
    }
  }

  // Recomputes the witness on the canonical QR path before accepting it.
  void record_candidate() {
    const DetectOptions& opt = *ctx_.options;
    const Index n = ctx_.n;
    Matrix rows(n - 1, n);
    for (Index k = 0; k < n - 1; ++k) rows.row(k) = ctx_.model->h.row(chosen_[static_cast<std::size_t>(k)]);
    Vector v;
    try {
      v = nullspace_unit_vector(rows);
    } catch (const Error&) {
      return;
    }
    const Vector proj = (ctx_.model->h * v).cwiseAbs();
    const double q = proj(j_);
    const double s = proj.sum() - q;
    const auto verdict = classify(s, q, opt);
    if (!verdict) return;
    const double margin = relative_margin(s, q);
    if (opt.exhaustive && result_.witness && margin <= result_.witness_margin) return;
    LeverageWitness w;
    w.row_index = j_;
    w.basis = chosen_;
    w.v = std::move(v);
    w.s = s;
    w.q = q;
    w.verdict = *verdict;
    result_.witness = std::move(w);
    result_.witness_margin = margin;
    if (!opt.exhaustive) result_.found = true;
  }

  const SearchContext& ctx_;
  Index j_;
  Index branch_;
  const std::atomic<Index>* winning_branch_;
  std::vector<Index> candidates_;
  std::vector<Index> chosen_;
  std::vector<double> basis_;
  std::vector<double> v_;
  BranchResult result_;
};

SearchContext make_context(const MeasurementModel& model, const DetectOptions& options) {
  SearchContext ctx;
  ctx.model = &model;
  ctx.m = model.rows();
  ctx.n = model.cols();
  ctx.options = &options;
  ctx.h.resize(static_cast<std::size_t>(ctx.m * ctx.n));
  ctx.row_norm.resize(static_cast<std::size_t>(ctx.m));
  for (Index i = 0; i < ctx.m; ++i) {
    for (Index c = 0; c < ctx.n; ++c) ctx.h[static_cast<std::size_t>(i * ctx.n + c)] = model.h(i, c);
    ctx.row_norm[static_cast<std::size_t>(i)] = model.h.row(i).norm();
  }
  ctx.binomial = BinomialTable(ctx.m);
  return ctx;
}

struct Task {
  Index row;
  Index branch;  // first basis position, or -1 for the whole row
};

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Scans the requested rows. Rows are split into one task per first basis
// element; tasks are merged in lexicographic order so the reported witness
// and counters do not depend on scheduling.
std::vector<RowScan> scan_rows(const MeasurementModel& model, const std::vector<Index>& rows,
                               const DetectOptions& options) {
  const SearchContext ctx = make_context(model, options);
  const Index need = ctx.n - 1;
  const Index candidates = ctx.m - 1;
  const bool split = need > 0 && !options.budget;

  std::vector<Task> tasks;
  std::vector<std::size_t> first_task(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    first_task[r] = tasks.size();
    if (split) {
      for (Index p = 0; p <= candidates - need; ++p) tasks.push_back({rows[r], p});
    } else {
      tasks.push_back({rows[r], -1});
    }
  }

  std::vector<std::atomic<Index>> winning(rows.size());
  for (auto& w : winning) w.store(std::numeric_limits<Index>::max());
  std::vector<std::size_t> task_slot(tasks.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t end = r + 1 < rows.size() ? first_task[r + 1] : tasks.size();
    for (std::size_t t = first_task[r]; t < end; ++t) task_slot[t] = r;
  }

  std::vector<BranchResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      std::atomic<Index>& win = winning[task_slot[t]];
      const bool cancellable = split && !options.exhaustive;
      if (cancellable && win.load(std::memory_order_relaxed) < task.branch) {
        results[t].cancelled = true;
        continue;
      }
      BranchSearch search(ctx, task.row, task.branch, cancellable ? &win : nullptr);
      results[t] = search.run();
      if (cancellable && results[t].found) {
        Index current = win.load();
        while (task.branch < current && !win.compare_exchange_weak(current, task.branch)) {
        }
      }
    }
  };

  const unsigned threads = std::min<std::size_t>(resolve_threads(options.threads), tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<RowScan> scans(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    RowScan& scan = scans[r];
    scan.row_index = rows[r];
    scan.best_margin = kNegInf;
    const std::size_t end = r + 1 < rows.size() ? first_task[r + 1] : tasks.size();
    double witness_margin = kNegInf;
    bool budget_hit = false;
    for (std::size_t t = first_task[r]; t < end; ++t) {
      BranchResult& br = results[t];
      scan.combos_examined = saturating_add(scan.combos_examined, br.examined);
      scan.combos_skipped_degenerate = saturating_add(scan.combos_skipped_degenerate, br.skipped);
      scan.best_margin = std::max(scan.best_margin, br.best_margin);
      budget_hit = budget_hit || br.budget_hit;
      if (br.witness && (!scan.witness || br.witness_margin > witness_margin)) {
        witness_margin = br.witness_margin;
        scan.witness = std::move(br.witness);
      }
      if (br.found) {
        scan.early_exit = true;
        break;
      }
    }
    if (scan.witness) scan.verdict = scan.witness->verdict;
    scan.inconclusive = budget_hit && !scan.witness;
    if (budget_hit) scan.early_exit = true;
  }
  return scans;
}

void require_full_rank(const MeasurementModel& model) { validate_model(model); }

}  // namespace

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kClean: return "Clean";
    case Verdict::kBoundary: return "Boundary";
    case Verdict::kLeverage: return "Leverage";
  }
  return "Clean";
}

Verdict verdict_from_string(std::string_view text) {
  if (text == "Clean") return Verdict::kClean;
  if (text == "Boundary") return Verdict::kBoundary;
  if (text == "Leverage") return Verdict::kLeverage;
  throw Error(ErrorCode::kParse, "unknown verdict '" + std::string(text) + "'");
}

std::vector<Index> LeverageReport::flagged() const {
  std::vector<Index> out;
  for (const auto& r : rows) {
    if (r.verdict != Verdict::kClean) out.push_back(r.row);
  }
  return out;
}

const LeverageWitness* LeverageReport::witness_for(Index row) const {
  for (const auto& w : witnesses) {
    if (w.row_index == row) return &w;
  }
  return nullptr;
}

std::optional<Verdict> classify(double s, double q, const DetectOptions& options) {
  if (s <= q - options.strict_margin * std::max(1.0, q)) return Verdict::kLeverage;
  if (s <= q + options.boundary_tol) return Verdict::kBoundary;
  return std::nullopt;
}

RowScan scan_row(const MeasurementModel& model, Index j, const DetectOptions& options) {
  require_full_rank(model);
  if (j < 0 || j >= model.rows()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "row " + std::to_string(j) + " outside [0, " + std::to_string(model.rows()) + ")");
  }
  return scan_rows(model, {j}, options).front();
}

std::optional<LeverageWitness> detect_row(const MeasurementModel& model, Index j,
                                          const DetectOptions& options) {
  return scan_row(model, j, options).witness;
}

LeverageReport detect_all(const MeasurementModel& model, const DetectOptions& options) {
  require_full_rank(model);
  std::vector<Index> rows(static_cast<std::size_t>(model.rows()));
  for (Index i = 0; i < model.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  std::vector<RowScan> scans = scan_rows(model, rows, options);

  LeverageReport report;
  for (auto& scan : scans) {
    RowVerdict rv;
    rv.row = scan.row_index;
    rv.label = model.labels[static_cast<std::size_t>(scan.row_index)];
    rv.verdict = scan.verdict;
    rv.inconclusive = scan.inconclusive;
    report.rows.push_back(rv);
    report.combos_examined = saturating_add(report.combos_examined, scan.combos_examined);
    report.combos_skipped_degenerate =
        saturating_add(report.combos_skipped_degenerate, scan.combos_skipped_degenerate);
    if (scan.early_exit) report.exhaustive = false;
    if (scan.inconclusive) {
      report.notes.push_back(rv.label + ": inconclusive within budget of " +
                             std::to_string(*options.budget) + " combinations");
    }
    if (scan.witness) report.witnesses.push_back(std::move(*scan.witness));
  }
  return report;
}

boost::multiprecision::cpp_int combination_count(long m, long n) {
  if (n < 1 || m < n) {
    throw Error(ErrorCode::kInvalidArgument,
                "combination_count needs m >= n >= 1, got m=" + std::to_string(m) +
                    " n=" + std::to_string(n));
  }
  const long top = m - 1;
  const long k = std::min(n - 1, top - (n - 1));
  boost::multiprecision::cpp_int result = 1;
  for (long i = 1; i <= k; ++i) {
    result *= top - k + i;
    result /= i;
  }
  return result;
}

Partition make_partition(const MeasurementModel& model, const PartitionSpec& spec) {
  if (spec.measurements.empty()) {
    throw Error(ErrorCode::kEmptyPartition, "partition '" + spec.name + "' has no measurements");
  }
  std::set<Index> rows;
  for (const auto& entry : spec.measurements) {
    Index idx = 0;
    if (std::holds_alternative<Index>(entry)) {
      idx = std::get<Index>(entry);
      if (idx < 0 || idx >= model.rows()) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "partition '" + spec.name + "': row " + std::to_string(idx));
      }
    } else {
      idx = model.row_index(std::get<std::string>(entry));
    }
    rows.insert(idx);
  }
  Partition part;
  part.name = spec.name;
  part.measurement_indices.assign(rows.begin(), rows.end());
  std::set<Index> fixed;
  for (const auto& entry : spec.fixed_states) {
    Index col = -1;
    if (std::holds_alternative<Index>(entry)) {
      col = std::get<Index>(entry);
    } else {
      const auto& name = std::get<std::string>(entry);
      const auto it = std::find(model.state_labels.begin(), model.state_labels.end(), name);
      if (it == model.state_labels.end()) {
        throw Error(ErrorCode::kUnknownLabel, "partition '" + spec.name + "': state '" + name + "'");
      }
      col = it - model.state_labels.begin();
    }
    if (col < 0 || col >= model.cols()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "partition '" + spec.name + "': state column " + std::to_string(col));
    }
    fixed.insert(col);
  }
  part.fixed_columns.assign(fixed.begin(), fixed.end());
  for (Index c = 0; c < model.cols(); ++c) {
    if (fixed.count(c) != 0) continue;
    for (Index r : part.measurement_indices) {
      if (model.h(r, c) != 0.0) {
        part.state_columns.push_back(c);
        break;
      }
    }
  }
  if (part.state_columns.empty()) {
    throw Error(ErrorCode::kRankDeficient, "partition '" + spec.name + "' touches no states", 0);
  }
  const MeasurementModel sub = submodel(model, part.measurement_indices, part.state_columns);
  const Index r = rank(sub.h);
  if (r < static_cast<Index>(part.state_columns.size())) {
    throw Error(ErrorCode::kRankDeficient,
                "partition '" + spec.name + "' has rank " + std::to_string(r) + " over " +
                    std::to_string(part.state_columns.size()) + " states",
                r);
  }
  return part;
}

PartitionedReport detect_partitioned(const MeasurementModel& model,
                                     const std::vector<Partition>& partitions,
                                     const DetectOptions& options) {
  check_invariants(model);
  const Index m = model.rows();
  PartitionedReport out;
  out.covered.assign(static_cast<std::size_t>(m), false);

  std::vector<std::vector<std::pair<std::string, Verdict>>> per_row(static_cast<std::size_t>(m));
  std::vector<const LeverageWitness*> chosen(static_cast<std::size_t>(m), nullptr);
  std::vector<bool> inconclusive(static_cast<std::size_t>(m), false);

  for (const Partition& part : partitions) {
    if (part.measurement_indices.empty()) {
      throw Error(ErrorCode::kEmptyPartition, "partition '" + part.name + "' has no measurements");
    }
    MeasurementModel sub = submodel(model, part.measurement_indices, part.state_columns);
    const Index r = rank(sub.h);
    if (r < sub.cols()) {
      throw Error(ErrorCode::kRankDeficient, "partition '" + part.name + "' is rank deficient", r);
    }
    LeverageReport rep = detect_all(sub, options);

    // Map indices back to the parent model.
    for (auto& row : rep.rows) {
      row.row = part.measurement_indices[static_cast<std::size_t>(row.row)];
      row.label = model.labels[static_cast<std::size_t>(row.row)];
    }
    for (auto& w : rep.witnesses) {
      w.row_index = part.measurement_indices[static_cast<std::size_t>(w.row_index)];
      for (auto& b : w.basis) b = part.measurement_indices[static_cast<std::size_t>(b)];
      Vector full = Vector::Zero(model.cols());
      for (std::size_t c = 0; c < part.state_columns.size(); ++c) {
        full(part.state_columns[c]) = w.v(static_cast<Index>(c));
      }
      w.v = std::move(full);
      w.partition = part.name;
    }
    for (auto& note : rep.notes) note = part.name + ": " + note;
    out.partitions.push_back({part.name, part, std::move(rep)});
  }

  for (const auto& outcome : out.partitions) {
    for (const auto& row : outcome.report.rows) {
      const auto i = static_cast<std::size_t>(row.row);
      out.covered[i] = true;
      per_row[i].emplace_back(outcome.name, row.verdict);
      if (row.inconclusive) inconclusive[i] = true;
      const LeverageWitness* w = outcome.report.witness_for(row.row);
      if (w && (!chosen[i] || static_cast<int>(w->verdict) > static_cast<int>(chosen[i]->verdict))) {
        chosen[i] = w;
      }
    }
    out.merged.combos_examined =
        saturating_add(out.merged.combos_examined, outcome.report.combos_examined);
    out.merged.combos_skipped_degenerate = saturating_add(
        out.merged.combos_skipped_degenerate, outcome.report.combos_skipped_degenerate);
    if (!outcome.report.exhaustive) out.merged.exhaustive = false;
    out.merged.notes.insert(out.merged.notes.end(), outcome.report.notes.begin(),
                            outcome.report.notes.end());
  }

  for (Index i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    RowVerdict rv;
    rv.row = i;
    rv.label = model.labels[ui];
    if (chosen[ui]) {
      rv.verdict = chosen[ui]->verdict;
      out.merged.witnesses.push_back(*chosen[ui]);
    }
    rv.inconclusive = inconclusive[ui] && rv.verdict == Verdict::kClean;
    out.merged.rows.push_back(rv);
    if (!out.covered[ui]) {
      out.merged.notes.push_back(rv.label + ": not covered by any partition");
      continue;
    }
    const auto& verdicts = per_row[ui];
    const bool differs = std::any_of(verdicts.begin(), verdicts.end(), [&](const auto& pv) {
      return pv.second != verdicts.front().second;
    });
    if (differs) {
      ConsistencyNote note;
      note.row = i;
      note.label = rv.label;
      note.verdicts = verdicts;
      note.text = rv.label + ": inconsistent across partitions (";
      for (std::size_t k = 0; k < verdicts.size(); ++k) {
        if (k) note.text += ", ";
        note.text += verdicts[k].first + "=" + to_string(verdicts[k].second);
      }
      note.text += ")";
      out.merged.notes.push_back(note.text);
      out.consistency.push_back(std::move(note));
    }
  }
  return out;
}

}  // namespace lavlev
