#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lavlev/errors.hpp"
#include "lavlev/experiments.hpp"
#include "lavlev/fixtures.hpp"
#include "lavlev/io.hpp"
#include "lavlev/lav.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/power.hpp"
#include "lavlev/projection_stats.hpp"

namespace lavlev::cli {
namespace {

std::string sig4(double x) {
  std::ostringstream ss;
  ss << std::setprecision(4) << x;
  return ss.str();
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> width;
    for (const auto& row : rows_) {
      width.resize(std::max(width.size(), row.size()), 0);
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : rows_) {
      std::string line;
      for (std::size_t c = 0; c < row.size(); ++c) {
        line += row[c];
        if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
      }
      out << line << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::string join(const std::vector<Index>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kUnknownLabel:
    case ErrorCode::kInvalidNetwork:
    case ErrorCode::kUnsupportedKind:
    case ErrorCode::kIndexOutOfRange:
    case ErrorCode::kEmptyPartition:
    case ErrorCode::kInvalidArgument:
      return kParseFailure;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kNonFinite:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kDegenerateBasis:
    case ErrorCode::kUnbounded:
    case ErrorCode::kMaxIterations:
    case ErrorCode::kTooLarge:
    case ErrorCode::kZeroScale:
    case ErrorCode::kDisconnectedBus:
      return kNumericalFailure;
  }
  return kInternalFailure;
}

struct ModelSource {
  std::string path;
  std::string fixture;
};

void add_model_source(CLI::App* cmd, ModelSource& src) {
  cmd->add_option("model", src.path, "Model file (JSON)");
  cmd->add_option("--fixture", src.fixture, "Built-in network instead of a model file")
      ->check(CLI::IsMember(fixtures::fixture_names()));
}

MeasurementModel build_from_network(const NetworkModel& net, const std::string& kind) {
  bool pmu = kind == "pmu";
  if (kind.empty()) {
    pmu = std::any_of(net.measurements.begin(), net.measurements.end(),
                      [](const MeasurementSpec& m) { return is_pmu(m.kind); });
  }
  return pmu ? build_pmu_model(net) : build_dc_model(net);
}

MeasurementModel load_model(const ModelSource& src) {
  if (!src.fixture.empty()) return build_from_network(*fixtures::fixture_network(src.fixture), "");
  if (src.path.empty()) throw Error(ErrorCode::kParse, "a model file or --fixture is required");
  return io::parse_model(io::read_text(src.path), src.path);
}

// Writes to the --output file when given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::kParse, "cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void print_estimate(std::ostream& out, const MeasurementModel& m, const LavSolution& s) {
  out << "objective   " << sig4(s.objective) << '\n'
      << "iterations  " << s.iterations << '\n'
      << "degenerate  " << (s.degenerate ? "yes" : "no") << '\n'
      << "zero set    " << join(s.zero_set) << "\n\n";
  Table states({"state", "estimate"});
  for (Index k = 0; k < s.theta_hat.size(); ++k) {
    const std::string name =
        k < static_cast<Index>(m.state_labels.size()) ? m.state_labels[static_cast<std::size_t>(k)]
                                                      : "x" + std::to_string(k + 1);
    states.add({name, sig4(s.theta_hat(k))});
  }
  states.print(out);
  out << '\n';
  Table res({"row", "label", "residual", "zero"});
  std::vector<bool> zero(static_cast<std::size_t>(m.rows()), false);
  for (Index i : s.zero_set) zero[static_cast<std::size_t>(i)] = true;
  for (Index i = 0; i < m.rows(); ++i) {
    res.add({std::to_string(i), m.labels[static_cast<std::size_t>(i)], sig4(s.residuals(i)),
             zero[static_cast<std::size_t>(i)] ? "*" : ""});
  }
  res.print(out);
}

void print_report(std::ostream& out, const LeverageReport& rep) {
  Table t({"row", "label", "verdict", "s", "q", "basis", "partition"});
  for (const auto& row : rep.rows) {
    std::vector<std::string> line{std::to_string(row.row), row.label,
                                  std::string(to_string(row.verdict)) + (row.inconclusive ? "?" : "")};
    if (const LeverageWitness* w = rep.witness_for(row.row)) {
      line.insert(line.end(), {sig4(w->s), sig4(w->q), join(w->basis), w->partition});
    }
    t.add(std::move(line));
  }
  t.print(out);
  out << "\ncombinations examined  " << rep.combos_examined << '\n'
      << "degenerate skipped     " << rep.combos_skipped_degenerate << '\n'
      << "exhaustive             " << (rep.exhaustive ? "yes" : "no") << '\n';
  for (const auto& note : rep.notes) out << "note: " << note << '\n';
}

int cmd_estimate(const ModelSource& src, double zero_tol, const std::string& format, const std::string& output,
                 std::ostream& out) {
  const MeasurementModel m = validate_model(load_model(src));
  LavOptions opt;
  opt.zero_tol = zero_tol;
  const LavSolution s = solve_lav(m, opt);
  Sink sink(output, out);
  if (format == "json") {
    *sink << io::serialize_lav_solution(s);
  } else {
    print_estimate(*sink, m, s);
  }
  return kOk;
}

struct DetectArgs {
  ModelSource src;
  std::string partitions;
  std::optional<std::uint64_t> budget;
  double boundary_tol = 1e-9;
  double strict_margin = 1e-6;
  bool exhaustive = false;
  unsigned threads = 0;
  std::string format = "table";
  std::string output;
};

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  const MeasurementModel m = load_model(a.src);
  DetectOptions opt;
  opt.boundary_tol = a.boundary_tol;
  opt.strict_margin = a.strict_margin;
  opt.budget = a.budget;
  opt.exhaustive = a.exhaustive;
  opt.threads = a.threads;
  Sink sink(a.output, out);
  if (a.partitions.empty()) {
    const LeverageReport rep = detect_all(validate_model(m), opt);
    if (a.format == "json") {
      *sink << io::serialize_leverage_report(rep);
    } else {
      print_report(*sink, rep);
    }
    return kOk;
  }
  std::vector<Partition> parts;
  for (const auto& spec : io::parse_partitions(io::read_text(a.partitions), a.partitions)) {
    parts.push_back(make_partition(m, spec));
  }
  const PartitionedReport rep = detect_partitioned(m, parts, opt);
  if (a.format == "json") {
    *sink << io::serialize_partitioned_report(rep);
    return kOk;
  }
  print_report(*sink, rep.merged);
  for (const auto& p : rep.partitions) {
    *sink << "partition " << p.name << ": " << p.partition.measurement_indices.size() << " rows, "
          << p.partition.state_columns.size() << " states, " << p.report.flagged().size() << " flagged\n";
  }
  for (const auto& c : rep.consistency) *sink << "consistency: " << c.text << '\n';
  return kOk;
}

int cmd_ps(const ModelSource& src, const std::string& scale, const std::string& format, const std::string& output,
           std::ostream& out) {
  const MeasurementModel m = load_model(src);
  PsOptions opt;
  opt.scale = scale == "mad" ? PsScale::kMad : PsScale::kSn;
  const PsReport rep = compute_ps(m, opt);
  Sink sink(output, out);
  if (format == "json") {
    *sink << io::serialize_ps_report(rep);
    return kOk;
  }
  Table t({"meas", "label", "PS", "chi2", "d", "flag"});
  for (Index i = 0; i < rep.ps.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    t.add({std::to_string(i + 1), m.labels[k], sig4(rep.ps(i)), sig4(rep.cutoff(i)), std::to_string(rep.dof[k]),
           rep.flagged[k] ? "*" : ""});
  }
  t.print(*sink);
  *sink << "\nvariant: " << rep.variant << '\n'
        << "directions used " << rep.directions_used << ", skipped " << rep.directions_skipped_zero_scale << '\n';
  return kOk;
}

int cmd_build(const std::string& network, const std::string& fixture, const std::string& kind,
              const std::string& format, const std::string& output, std::ostream& out) {
  NetworkModel net;
  if (!fixture.empty()) {
    net = *fixtures::fixture_network(fixture);
  } else if (!network.empty()) {
    net = io::parse_network(io::read_text(network), network);
  } else {
    throw Error(ErrorCode::kParse, "a network file or --fixture is required");
  }
  const MeasurementModel m = build_from_network(net, kind);
  Sink sink(output, out);
  if (format == "csv") {
    io::write_csv_matrix(*sink, m.h);
  } else if (format == "table") {
    std::vector<std::string> header{"label"};
    header.insert(header.end(), m.state_labels.begin(), m.state_labels.end());
    Table t(header);
    for (Index i = 0; i < m.rows(); ++i) {
      std::vector<std::string> row{m.labels[static_cast<std::size_t>(i)]};
      for (Index k = 0; k < m.cols(); ++k) row.push_back(sig4(m.h(i, k)));
      t.add(std::move(row));
    }
    t.print(*sink);
  } else {
    *sink << io::serialize_model(m);
  }
  return kOk;
}

void print_mc_summary(std::ostream& out, const MCSummary& s, const MCConfig& cfg) {
  out << "trials            " << s.trials << '\n'
      << "skipped           " << s.skipped << '\n'
      << "solver errors     " << s.solver_errors << '\n'
      << "flagged           " << s.flagged << '\n'
      << "deviated          " << s.deviated << '\n'
      << "near boundary     " << s.near_boundary << " (band " << cfg.boundary_band << ")\n"
      << "agreement         " << s.agree_outside_band << "/" << s.outside_band << " = "
      << sig4(100.0 * s.agreement()) << "%\n";
}

int cmd_mc(const MCConfig& cfg, const std::string& format, const std::string& output, std::ostream& out) {
  const auto records = run_monte_carlo(build_dc_model(fixtures::threebus_dc()), cfg);
  Sink sink(output, out);
  if (format == "table") {
    print_mc_summary(*sink, summarize(records), cfg);
  } else {
    write_mc_csv(*sink, records);
  }
  return kOk;
}

const char* mark(fixtures::Table1Mark m) {
  switch (m) {
    case fixtures::Table1Mark::kAbsent: return "";
    case fixtures::Table1Mark::kClean: return "-";
    case fixtures::Table1Mark::kLeverage: return "LP";
  }
  return "?";
}

int reproduce_table4_cmd(std::ostream& out) {
  const Table4Report rep = reproduce_table4();
  Table t({"row", "v", "|hj.v|", "printed", "sum others", "printed", "match"});
  for (const auto& e : rep.entries) {
    t.add({"h" + std::to_string(e.row + 1), rep.directions[static_cast<std::size_t>(e.column)], sig4(e.own),
           sig4(e.printed_own), sig4(e.others), sig4(e.printed_others), e.match ? "yes" : "NO"});
  }
  t.print(out);
  out << "\nmatched " << rep.matched << "/" << rep.total << " pairs within " << rep.tolerance
      << " after rounding to the printed precision\n";
  return rep.passed() ? kOk : kReproductionMismatch;
}

int reproduce_table2_cmd(std::ostream& out) {
  const Table2Report rep = reproduce_table2();
  Table t({"meas", "PS", "printed PS", "chi2", "printed chi2", "d", "flag"});
  for (Index i = 0; i < rep.ps.ps.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    t.add({std::to_string(i + 1), sig4(rep.ps.ps(i)), sig4(rep.printed_ps(i)), sig4(rep.ps.cutoff(i)),
           sig4(rep.printed_cutoff(i)), std::to_string(rep.ps.dof[k]), rep.ps.flagged[k] ? "*" : ""});
  }
  t.print(out);
  out << "\nvariant: " << rep.ps.variant << " (PS values are variant dependent; classification is compared)\n"
      << "flagged set matches {1, 6}  " << (rep.flags_match ? "yes" : "NO") << '\n'
      << "cutoffs match to 3 dp      " << (rep.cutoffs_match ? "yes" : "NO") << '\n'
      << "dof match                  " << (rep.dof_match ? "yes" : "NO") << '\n';
  return rep.passed() ? kOk : kReproductionMismatch;
}

int reproduce_table1_cmd(const DetectOptions& opt, std::ostream& out) {
  const Table1Report rep = reproduce_table1({}, opt);
  std::vector<std::string> header{"label", "blue", "red", "paper"};
  for (const auto& p : rep.report.partitions) header.push_back(p.name);
  header.insert(header.end(), {"merged", "match"});
  Table t(header);
  for (const auto& c : rep.rows) {
    std::vector<std::string> line{c.label, mark(c.blue), mark(c.red), c.table_leverage ? "LP" : "-"};
    for (const auto& p : rep.report.partitions) {
      std::string v;
      for (const auto& r : p.report.rows) {
        if (r.row == c.row) v = to_string(r.verdict);
      }
      line.push_back(v);
    }
    line.push_back(to_string(c.verdict));
    line.push_back(c.match ? "yes" : "NO");
    t.add(std::move(line));
  }
  t.print(out);
  out << "\nagreement (Leverage or Boundary counted as flagged)  " << rep.agree << "/" << rep.rows.size()
      << " = " << sig4(100.0 * rep.agreement()) << "%\n"
      << "agreement (Leverage only)                           " << rep.strict_agree << "/" << rep.rows.size()
      << " = " << sig4(100.0 * rep.strict_agreement()) << "%\n"
      << "flags unchanged under injected gross errors         " << (rep.data_independent ? "yes" : "NO") << '\n'
      << "combinations examined                               " << rep.report.merged.combos_examined << '\n';
  for (const auto& c : rep.report.consistency) out << "consistency: " << c.text << '\n';
  return rep.passed() ? kOk : kReproductionMismatch;
}

int reproduce_mc_cmd(const MCConfig& cfg, const std::string& output, std::ostream& out) {
  const auto records = run_monte_carlo(build_dc_model(fixtures::threebus_dc()), cfg);
  if (!output.empty()) {
    Sink sink(output, out);
    write_mc_csv(*sink, records);
  }
  const MCSummary s = summarize(records);
  print_mc_summary(out, s, cfg);
  const bool ok = s.agreement() >= 0.95;
  out << "required agreement 95%            " << (ok ? "met" : "NOT met") << '\n';
  return ok ? kOk : kReproductionMismatch;
}

void add_format(CLI::App* cmd, std::string& format, std::vector<std::string> allowed) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember(std::move(allowed)));
}

void add_mc_options(CLI::App* cmd, MCConfig& cfg) {
  cmd->add_option("--trials", cfg.trials, "Number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.seed, "Seed of the mt19937_64 stream");
  cmd->add_option("--row-variance", cfg.row_variance, "Variance of the extra row entries");
  cmd->add_option("--state-variance", cfg.state_variance, "Variance of the true states");
  cmd->add_option("--gross-error", cfg.gross_error, "Error added to the extra measurement (p.u.)");
  cmd->add_option("--boundary-band", cfg.boundary_band, "Relative margin excluded from the agreement");
  cmd->add_option("--deviation-tol", cfg.deviation_tol, "Max-norm state error counted as a deviation");
  cmd->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Least-absolute-value state estimation and leverage point detection", "lavlev"};
  app.require_subcommand(1);

  std::string format = "table";
  std::string output;

  ModelSource est_src;
  double zero_tol = 1e-8;
  auto* estimate = app.add_subcommand("estimate", "Solve the LAV estimate of a model");
  add_model_source(estimate, est_src);
  estimate->add_option("--zero-tol", zero_tol, "Residuals below this count as zero");
  add_format(estimate, format, {"table", "json"});
  estimate->add_option("-o,--output", output, "Write to this file");

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Classify every measurement as Clean, Boundary or Leverage");
  add_model_source(detect, det.src);
  detect->add_option("--partitions", det.partitions, "Partition file (JSON)");
  detect->add_option("--budget", det.budget, "Maximum bases evaluated per row");
  detect->add_option("--boundary-tol", det.boundary_tol, "Slack admitted above q for a Boundary verdict");
  detect->add_option("--strict-margin", det.strict_margin, "Relative gap required for a Leverage verdict");
  detect->add_flag("--exhaustive", det.exhaustive, "Scan every basis instead of stopping at the first witness");
  detect->add_option("--threads", det.threads, "Worker threads (0: all cores)");
  add_format(detect, det.format, {"table", "json"});
  detect->add_option("-o,--output", det.output, "Write to this file");

  ModelSource ps_src;
  std::string scale = "sn";
  auto* ps = app.add_subcommand("ps", "Projection statistics with chi-square cutoffs");
  add_model_source(ps, ps_src);
  ps->add_option("--scale", scale, "Robust scale: sn or mad")->check(CLI::IsMember({"sn", "mad"}));
  add_format(ps, format, {"table", "json"});
  ps->add_option("-o,--output", output, "Write to this file");

  std::string network;
  std::string build_fixture;
  std::string build_kind;
  std::string build_format = "json";
  auto* build = app.add_subcommand("build", "Build a measurement model from a network");
  build->add_option("network", network, "Network file (JSON)");
  build->add_option("--fixture", build_fixture, "Built-in network")->check(CLI::IsMember(fixtures::fixture_names()));
  build->add_option("--model", build_kind, "dc or pmu (default: from the measurement kinds)")
      ->check(CLI::IsMember({"dc", "pmu"}));
  add_format(build, build_format, {"json", "csv", "table"});
  build->add_option("-o,--output", output, "Write to this file");

  MCConfig mc_cfg;
  mc_cfg.seed = 1;
  std::string mc_format = "csv";
  auto* mc = app.add_subcommand("mc", "Random extra-row experiment on the 3-bus model");
  add_mc_options(mc, mc_cfg);
  add_format(mc, mc_format, {"csv", "table"});
  mc->add_option("-o,--output", output, "Write to this file");

  std::string what;
  DetectOptions rep_opt;
  auto* reproduce = app.add_subcommand("reproduce", "Compare against the reference tables; exit 4 on mismatch");
  reproduce->add_option("what", what, "table1, table2, table4 or mc")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "table4", "mc"}));
  add_mc_options(reproduce, mc_cfg);
  reproduce->add_option("-o,--output", output, "Monte-Carlo CSV file");

  std::vector<std::string> argv_store{"lavlev"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kParseFailure;
  }

  try {
    if (*estimate) return cmd_estimate(est_src, zero_tol, format, output, out);
    if (*detect) return cmd_detect(det, out);
    if (*ps) return cmd_ps(ps_src, scale, format, output, out);
    if (*build) return cmd_build(network, build_fixture, build_kind, build_format, output, out);
    if (*mc) return cmd_mc(mc_cfg, mc_format, output, out);
    if (*reproduce) {
      rep_opt.threads = mc_cfg.threads;
      if (what == "table1") return reproduce_table1_cmd(rep_opt, out);
      if (what == "table2") return reproduce_table2_cmd(out);
      if (what == "table4") return reproduce_table4_cmd(out);
      return reproduce_mc_cmd(mc_cfg, output, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalFailure;
  }
  return kInternalFailure;
}

}  // namespace lavlev::cli
