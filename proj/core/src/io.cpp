#include "lavlev/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lavlev/errors.hpp"

namespace lavlev::io {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(std::string_view source, const std::string& what) {
  throw Error(ErrorCode::kParse, std::string(source) + ": " + what);
}

// Byte offset (1-based, as reported by the parser) to line:column.
std::string position(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw Error(ErrorCode::kParse, std::string(source) + ":" + position(text, e.byte) + ": " + msg);
  }
}

// Field access with a readable path in error messages.
class Reader {
 public:
  Reader(const Json& node, std::string path, std::string_view source)
      : node_(node), path_(std::move(path)), source_(source) {}

  const Json& node() const { return node_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Reader at(const char* key) const {
    if (!node_.is_object()) fail(source_, path_ + " is not an object");
    if (!node_.contains(key)) fail(source_, "missing field " + path_ + "." + key);
    return {node_.at(key), path_ + "." + key, source_};
  }

  std::vector<Reader> items() const {
    if (!node_.is_array()) fail(source_, path_ + " is not an array");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < node_.size(); ++i) {
      out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]", source_);
    }
    return out;
  }

  double number() const {
    if (node_.is_number()) return node_.get<double>();
    if (node_.is_string()) {
      const auto& s = node_.get_ref<const std::string&>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
      if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    fail(source_, path_ + " is not a number");
  }

  long integer() const {
    if (!node_.is_number_integer()) fail(source_, path_ + " is not an integer");
    return node_.get<long>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail(source_, path_ + " is not a boolean");
    return node_.get<bool>();
  }

  std::string string() const {
    if (!node_.is_string()) fail(source_, path_ + " is not a string");
    return node_.get<std::string>();
  }

  Vector vector() const {
    const auto xs = items();
    Vector v(static_cast<Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v(static_cast<Index>(i)) = xs[i].number();
    return v;
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (const auto& x : items()) out.push_back(x.string());
    return out;
  }

  std::vector<Index> indices() const {
    std::vector<Index> out;
    for (const auto& x : items()) out.push_back(static_cast<Index>(x.integer()));
    return out;
  }

  std::vector<std::variant<Index, std::string>> labels_or_indices() const {
    std::vector<std::variant<Index, std::string>> out;
    for (const auto& x : items()) {
      if (x.node().is_string()) {
        out.emplace_back(x.string());
      } else {
        out.emplace_back(static_cast<Index>(x.integer()));
      }
    }
    return out;
  }

  template <typename F>
  auto wrap(F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse) fail(source_, path_ + ": " + e.what());
      throw;
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::string_view source_;
};

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json array(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json array(const std::vector<Index>& v) {
  Json a = Json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

Json labels_or_indices(const std::vector<std::variant<Index, std::string>>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) {
    if (std::holds_alternative<Index>(x)) {
      a.push_back(std::get<Index>(x));
    } else {
      a.push_back(std::get<std::string>(x));
    }
  }
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json witness_json(const LeverageWitness& w) {
  return Json{{"row_index", w.row_index}, {"basis", array(w.basis)},   {"v", array(w.v)},
              {"s", number(w.s)},         {"q", number(w.q)},          {"verdict", to_string(w.verdict)},
              {"partition", w.partition}};
}

LeverageWitness witness_from(const Reader& r) {
  LeverageWitness w;
  w.row_index = static_cast<Index>(r.at("row_index").integer());
  w.basis = r.at("basis").indices();
  w.v = r.at("v").vector();
  w.s = r.at("s").number();
  w.q = r.at("q").number();
  const Reader verdict = r.at("verdict");
  w.verdict = verdict.wrap([&] { return verdict_from_string(verdict.string()); });
  if (r.has("partition")) w.partition = r.at("partition").string();
  return w;
}

Json report_json(const LeverageReport& rep) {
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    rows.push_back(Json{{"row", row.row},
                        {"label", row.label},
                        {"verdict", to_string(row.verdict)},
                        {"inconclusive", row.inconclusive}});
  }
  Json witnesses = Json::array();
  for (const auto& w : rep.witnesses) witnesses.push_back(witness_json(w));
  return Json{{"rows", rows},
              {"witnesses", witnesses},
              {"combos_examined", rep.combos_examined},
              {"combos_skipped_degenerate", rep.combos_skipped_degenerate},
              {"exhaustive", rep.exhaustive},
              {"notes", rep.notes}};
}

LeverageReport report_from(const Reader& r) {
  LeverageReport rep;
  for (const auto& row : r.at("rows").items()) {
    RowVerdict rv;
    rv.row = static_cast<Index>(row.at("row").integer());
    rv.label = row.at("label").string();
    const Reader verdict = row.at("verdict");
    rv.verdict = verdict.wrap([&] { return verdict_from_string(verdict.string()); });
    rv.inconclusive = row.at("inconclusive").boolean();
    rep.rows.push_back(std::move(rv));
  }
  for (const auto& w : r.at("witnesses").items()) rep.witnesses.push_back(witness_from(w));
  rep.combos_examined = static_cast<std::uint64_t>(r.at("combos_examined").integer());
  rep.combos_skipped_degenerate = static_cast<std::uint64_t>(r.at("combos_skipped_degenerate").integer());
  rep.exhaustive = r.at("exhaustive").boolean();
  rep.notes = r.at("notes").strings();
  return rep;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MeasurementModel parse_model(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  const auto rows = r.at("H").items();
  if (rows.empty()) fail(source, "$.H is empty");
  const auto first = rows.front().items();
  Matrix h(static_cast<Index>(rows.size()), static_cast<Index>(first.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector row = rows[i].vector();
    if (row.size() != h.cols()) {
      fail(source, rows[i].path() + " has " + std::to_string(row.size()) + " entries, expected " +
                       std::to_string(h.cols()));
    }
    h.row(static_cast<Index>(i)) = row.transpose();
  }
  std::optional<Vector> z;
  if (r.has("z")) z = r.at("z").vector();
  std::vector<std::string> labels;
  if (r.has("labels")) labels = r.at("labels").strings();
  try {
    MeasurementModel m = make_model(std::move(h), std::move(z), std::move(labels));
    if (r.has("state_labels")) m.state_labels = r.at("state_labels").strings();
    if (r.has("true_states")) m.true_states = r.at("true_states").vector();
    check_invariants(m);
    return m;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    fail(source, e.what());
  }
}

std::string serialize_model(const MeasurementModel& model) {
  Json h = Json::array();
  for (Index i = 0; i < model.rows(); ++i) h.push_back(array(Vector(model.h.row(i).transpose())));
  Json j{{"labels", model.labels}};
  if (!model.state_labels.empty()) j["state_labels"] = model.state_labels;
  j["H"] = h;
  j["z"] = array(model.z);
  if (model.true_states) j["true_states"] = array(*model.true_states);
  return dump(j);
}

NetworkModel parse_network(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  NetworkModel net;
  if (r.has("name")) net.name = r.at("name").string();
  for (const auto& b : r.at("buses").items()) net.buses.push_back(static_cast<int>(b.integer()));
  net.reference_bus = static_cast<int>(r.at("reference_bus").integer());
  for (const auto& l : r.at("lines").items()) {
    Line line;
    line.from = static_cast<int>(l.at("from").integer());
    line.to = static_cast<int>(l.at("to").integer());
    line.x = l.at("x").number();
    if (l.has("r")) line.r = l.at("r").number();
    net.lines.push_back(line);
  }
  for (const auto& m : r.at("measurements").items()) {
    MeasurementSpec spec;
    const Reader kind = m.at("kind");
    spec.kind = kind.wrap([&] { return measurement_kind_from_string(kind.string()); });
    if (is_flow(spec.kind)) {
      spec.from = static_cast<int>(m.at("from").integer());
      spec.to = static_cast<int>(m.at("to").integer());
    } else {
      spec.bus = static_cast<int>(m.at("bus").integer());
    }
    spec.label = m.at("label").string();
    net.measurements.push_back(std::move(spec));
  }
  return net;
}

std::string serialize_network(const NetworkModel& net) {
  Json lines = Json::array();
  for (const auto& l : net.lines) {
    lines.push_back(Json{{"from", l.from}, {"to", l.to}, {"x", l.x}, {"r", l.r}});
  }
  Json meas = Json::array();
  for (const auto& m : net.measurements) {
    Json e{{"kind", to_string(m.kind)}};
    if (is_flow(m.kind)) {
      e["from"] = m.from;
      e["to"] = m.to;
    } else {
      e["bus"] = m.bus;
    }
    e["label"] = m.label;
    meas.push_back(std::move(e));
  }
  return dump(Json{{"name", net.name},
                   {"buses", net.buses},
                   {"reference_bus", net.reference_bus},
                   {"lines", lines},
                   {"measurements", meas}});
}

std::vector<PartitionSpec> parse_partitions(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  std::vector<PartitionSpec> out;
  for (const auto& p : r.at("partitions").items()) {
    PartitionSpec spec;
    spec.name = p.at("name").string();
    spec.measurements = p.at("measurements").labels_or_indices();
    if (p.has("fixed_states")) spec.fixed_states = p.at("fixed_states").labels_or_indices();
    out.push_back(std::move(spec));
  }
  return out;
}

std::string serialize_partitions(const std::vector<PartitionSpec>& specs) {
  Json parts = Json::array();
  for (const auto& s : specs) {
    Json p{{"name", s.name}, {"measurements", labels_or_indices(s.measurements)}};
    if (!s.fixed_states.empty()) p["fixed_states"] = labels_or_indices(s.fixed_states);
    parts.push_back(std::move(p));
  }
  return dump(Json{{"partitions", parts}});
}

LavSolution parse_lav_solution(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  LavSolution s;
  s.theta_hat = r.at("theta_hat").vector();
  s.residuals = r.at("residuals").vector();
  s.objective = r.at("objective").number();
  s.zero_set = r.at("zero_set").indices();
  s.iterations = static_cast<int>(r.at("iterations").integer());
  s.degenerate = r.at("degenerate").boolean();
  return s;
}

std::string serialize_lav_solution(const LavSolution& s) {
  return dump(Json{{"theta_hat", array(s.theta_hat)},
                   {"residuals", array(s.residuals)},
                   {"objective", number(s.objective)},
                   {"zero_set", array(s.zero_set)},
                   {"iterations", s.iterations},
                   {"degenerate", s.degenerate}});
}

LeverageReport parse_leverage_report(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  return report_from(Reader(doc, "$", source));
}

std::string serialize_leverage_report(const LeverageReport& report) { return dump(report_json(report)); }

PartitionedReport parse_partitioned_report(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  PartitionedReport out;
  out.merged = report_from(r.at("merged"));
  for (const auto& p : r.at("partitions").items()) {
    PartitionOutcome po;
    po.name = p.at("name").string();
    po.partition.name = po.name;
    po.partition.measurement_indices = p.at("measurement_indices").indices();
    po.partition.state_columns = p.at("state_columns").indices();
    po.partition.fixed_columns = p.at("fixed_columns").indices();
    po.report = report_from(p.at("report"));
    out.partitions.push_back(std::move(po));
  }
  for (const auto& c : r.at("consistency").items()) {
    ConsistencyNote note;
    note.row = static_cast<Index>(c.at("row").integer());
    note.label = c.at("label").string();
    for (const auto& v : c.at("verdicts").items()) {
      const Reader verdict = v.at("verdict");
      note.verdicts.emplace_back(v.at("partition").string(),
                                 verdict.wrap([&] { return verdict_from_string(verdict.string()); }));
    }
    note.text = c.at("text").string();
    out.consistency.push_back(std::move(note));
  }
  for (const auto& b : r.at("covered").items()) out.covered.push_back(b.boolean());
  return out;
}

std::string serialize_partitioned_report(const PartitionedReport& report) {
  Json parts = Json::array();
  for (const auto& p : report.partitions) {
    parts.push_back(Json{{"name", p.name},
                         {"measurement_indices", array(p.partition.measurement_indices)},
                         {"state_columns", array(p.partition.state_columns)},
                         {"fixed_columns", array(p.partition.fixed_columns)},
                         {"report", report_json(p.report)}});
  }
  Json notes = Json::array();
  for (const auto& c : report.consistency) {
    Json verdicts = Json::array();
    for (const auto& [name, v] : c.verdicts) verdicts.push_back(Json{{"partition", name}, {"verdict", to_string(v)}});
    notes.push_back(Json{{"row", c.row}, {"label", c.label}, {"verdicts", verdicts}, {"text", c.text}});
  }
  Json covered = Json::array();
  for (bool b : report.covered) covered.push_back(b);
  return dump(Json{{"merged", report_json(report.merged)},
                   {"partitions", parts},
                   {"consistency", notes},
                   {"covered", covered}});
}

PsReport parse_ps_report(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const Reader r(doc, "$", source);
  PsReport p;
  p.ps = r.at("ps").vector();
  for (const auto& d : r.at("dof").items()) p.dof.push_back(static_cast<int>(d.integer()));
  p.cutoff = r.at("cutoff").vector();
  for (const auto& f : r.at("flagged").items()) p.flagged.push_back(f.boolean());
  p.defined = r.at("defined").boolean();
  p.directions_used = static_cast<int>(r.at("directions_used").integer());
  p.directions_skipped_zero_scale = static_cast<int>(r.at("directions_skipped_zero_scale").integer());
  p.variant = r.at("variant").string();
  return p;
}

std::string serialize_ps_report(const PsReport& p) {
  Json flagged = Json::array();
  for (bool b : p.flagged) flagged.push_back(b);
  return dump(Json{{"ps", array(p.ps)},
                   {"dof", p.dof},
                   {"cutoff", array(p.cutoff)},
                   {"flagged", flagged},
                   {"defined", p.defined},
                   {"directions_used", p.directions_used},
                   {"directions_skipped_zero_scale", p.directions_skipped_zero_scale},
                   {"variant", p.variant}});
}

Matrix read_csv_matrix(std::istream& in, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(source, std::to_string(line_no) + ":" + std::to_string(start + 1) + ": bad number '" +
                         std::string(cell) + "'");
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(source, std::to_string(line_no) + ":1: row has " + std::to_string(row.size()) +
                       " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  }
  return m;
}

void write_csv_matrix(std::ostream& out, const Eigen::Ref<const Matrix>& matrix) {
  const auto old = out.precision(17);
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index k = 0; k < matrix.cols(); ++k) {
      if (k) out << ',';
      out << matrix(i, k);
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace lavlev::io
