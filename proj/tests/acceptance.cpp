// Acceptance runner: one PASS/FAIL line per criterion.
//   lavlev_acceptance [--criterion N]

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "lavlev/experiments.hpp"
#include "lavlev/fixtures.hpp"
#include "lavlev/lav.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/model.hpp"
#include "lavlev/power.hpp"
#include "lavlev/projection_stats.hpp"
#include "oracles.hpp"

using namespace lavlev;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix eq18() {
  Matrix h(7, 2);
  h << 10, -10, 1, 0, -1, 0, 0, -1, 0, 1, 11, -10, -1, -1;
  return h;
}

MeasurementModel random_model(std::mt19937_64& rng, Index m, Index n) {
  const Matrix h = oracle::random_full_rank(rng, m, n);
  Vector z = h * oracle::random_vector(rng, n) + oracle::random_vector(rng, m, 0.5);
  return make_model(h, z);
}

Outcome c1_build() {
  std::ostringstream out;
  std::ostringstream err;
  const int rc = cli::run_cli({"build", "--fixture", "threebus-dc", "--format", "csv"}, out, err);
  const std::string expect = "10,-10\n1,0\n-1,0\n0,-1\n0,1\n11,-10\n-1,-1\n";
  return {rc == cli::kOk && out.str() == expect, "3-bus DC matrix emitted by the CLI"};
}

Outcome c2_table4() {
  const auto rep = reproduce_table4();
  std::ostringstream d;
  d << rep.matched << "/" << rep.total << " (own, others) pairs within " << rep.tolerance;
  for (const auto& e : rep.entries) {
    if (e.match) continue;
    d << "\n    row " << e.row + 1 << " dir " << rep.directions[static_cast<std::size_t>(e.column)] << ": computed ("
      << e.own << ", " << e.others << ") printed (" << e.printed_own << ", " << e.printed_others << ")";
  }
  return {rep.passed(), d.str()};
}

Outcome c3_detect() {
  const auto rep = detect_all(make_model(eq18()));
  return {rep.flagged().empty(), std::to_string(rep.flagged().size()) + " rows flagged"};
}

Outcome c4_pmu() {
  Matrix h1t(3, 10);
  h1t << 0, 0, 1, 0, 1, -1, -1, 1, 1, -2,  //
      0, 1, 0, 10, 0, 0, 1, -1, 10, 1,     //
      1, 0, 0, -10, -1, 1, 0, 0, -11, 1;
  Matrix h2t(3, 10);
  h2t << 0, 0, 1, 0, -1, 1, 1, -1, -1, 2,  //
      0, 1, 0, -10, 0, 0, -1, 1, -10, -1,  //
      1, 0, 0, 10, 1, -1, 0, 0, 11, -1;
  const auto m = build_pmu_model(fixtures::threebus_pmu());
  if (m.rows() != 20 || m.cols() != 6) return {false, "unexpected shape"};
  const bool blocks = m.h.topLeftCorner(10, 3) == h1t.transpose() && m.h.bottomRightCorner(10, 3) == h2t.transpose() &&
                      m.h.topRightCorner(10, 3).isZero() && m.h.bottomLeftCorner(10, 3).isZero();
  std::vector<Index> top(10);
  std::vector<Index> bottom(10);
  for (Index i = 0; i < 10; ++i) {
    top[static_cast<std::size_t>(i)] = i;
    bottom[static_cast<std::size_t>(i)] = i + 10;
  }
  const std::vector<Index> left{0, 1, 2};
  const std::vector<Index> right{3, 4, 5};
  const auto a = detect_all(submodel(m, top, left));
  const auto b = detect_all(submodel(m, bottom, right));
  const bool clean = a.flagged().empty() && b.flagged().empty();
  return {blocks && clean, std::string("blocks ") + (blocks ? "exact" : "differ") + ", " +
                               std::to_string(a.flagged().size() + b.flagged().size()) + " rows flagged"};
}

Outcome c5_zero_residuals() {
  std::mt19937_64 rng(5);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = std::uniform_int_distribution<Index>(2, 8)(rng);
    const Index m = std::uniform_int_distribution<Index>(n, 3 * n)(rng);
    const auto model = random_model(rng, m, n);
    const auto s = solve_lav(model);
    failures += (s.residuals.array().abs() < 1e-8).count() < n;
  }
  return {failures == 0, std::to_string(failures) + "/1000 solutions with fewer than N zero residuals"};
}

Outcome c6_oracle() {
  std::mt19937_64 rng(6);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index n = std::uniform_int_distribution<Index>(1, 3)(rng);
    const Index m = std::uniform_int_distribution<Index>(n, 10)(rng);
    const auto model = random_model(rng, m, n);
    const double gap = std::abs(solve_lav(model).objective - lav_vertex_oracle(model).objective);
    worst = std::max(worst, gap);
    failures += gap > 1e-9;
  }
  std::ostringstream d;
  d << failures << "/200 disagreements, largest gap " << worst;
  return {failures == 0, d.str()};
}

Outcome c7_convexity() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  MeasurementModel model;
  for (int t = 0; t < 10000; ++t) {
    // fresh model every 100 triples
    if (t % 100 == 0) model = random_model(rng, 3 + (t / 100) % 8, 3);
    const Vector a = oracle::random_vector(rng, 3, 5.0);
    const Vector b = oracle::random_vector(rng, 3, 5.0);
    const double slack =
        0.5 * objective_at(model, a) + 0.5 * objective_at(model, b) - objective_at(model, Vector(0.5 * a + 0.5 * b));
    worst = std::min(worst, slack);
  }
  std::ostringstream d;
  d << "smallest slack " << worst;
  return {worst >= -1e-12, d.str()};
}

Outcome c8_combinations() {
  const auto c = combination_count(43, 27);
  const bool exact = c == oracle::binomial(42, 26);
  const double v = c.convert_to<double>();
  std::ostringstream s;
  s << std::setprecision(5) << v;
  return {exact && s.str() == "1.6651e+11", "C(42,26) = " + c.str() + " (" + s.str() + ")"};
}

Outcome c9_projection() {
  std::mt19937_64 rng(9);
  int failures = 0;
  for (int t = 0; t < 500; ++t) {
    const Index n = std::uniform_int_distribution<Index>(1, 6)(rng);
    const Index m = std::uniform_int_distribution<Index>(n, 3 * n)(rng);
    const Matrix h = oracle::random_full_rank(rng, m, n);
    const auto d = projection_matrix(make_model(h));
    const Matrix& p = d.p;
    bool ok = (p - p.transpose()).cwiseAbs().maxCoeff() < 1e-9;
    ok = ok && (p * p - p).cwiseAbs().maxCoeff() < 1e-9;
    ok = ok && std::abs(p.trace() - static_cast<double>(n)) < 1e-9;
    ok = ok && d.diag.minCoeff() > -1e-9 && d.diag.maxCoeff() < 1 + 1e-9;
    failures += !ok;
  }
  return {failures == 0, std::to_string(failures) + "/500 models violating an invariant"};
}

Outcome c10_table2() {
  const auto rep = reproduce_table2();
  std::ostringstream d;
  d << "flags " << (rep.flags_match ? "match" : "differ") << ", cutoffs " << (rep.cutoffs_match ? "match" : "differ")
    << ", dof " << (rep.dof_match ? "match" : "differ");
  return {rep.passed(), d.str()};
}

Outcome c11_monte_carlo() {
  MCConfig cfg;
  cfg.trials = 2000;
  cfg.seed = 42;
  const auto s = summarize(run_monte_carlo(build_dc_model(fixtures::threebus_dc()), cfg));
  std::ostringstream d;
  d << std::fixed << std::setprecision(2) << 100.0 * s.agreement() << "% agreement over " << s.outside_band
    << " trials outside the band (" << s.near_boundary << " near boundary, " << s.skipped << " skipped)";
  return {s.solver_errors == 0 && s.agreement() >= 0.95, d.str()};
}

const char* mark_name(fixtures::Table1Mark m) {
  switch (m) {
    case fixtures::Table1Mark::kAbsent: return "-";
    case fixtures::Table1Mark::kClean: return "clean";
    case fixtures::Table1Mark::kLeverage: return "leverage";
  }
  return "?";
}

Outcome c12_table1() {
  const auto rep = reproduce_table1();
  std::ostringstream d;
  d << std::fixed << std::setprecision(1) << rep.agree << "/" << rep.rows.size() << " rows agree ("
    << 100.0 * rep.agreement() << "%, Boundary counted as flagged; " << rep.strict_agree << "/" << rep.rows.size()
    << " when only Leverage counts), data independence " << (rep.data_independent ? "holds" : "BROKEN");
  for (const auto& r : rep.rows) {
    if (r.match) continue;
    d << "\n    " << r.label << ": computed " << to_string(r.verdict) << ", table blue " << mark_name(r.blue)
      << " red " << mark_name(r.red);
  }
  return {rep.passed(), d.str()};
}

const std::vector<std::function<Outcome()>>& criteria() {
  static const std::vector<std::function<Outcome()>> all{
      c1_build,      c2_table4,    c3_detect,       c4_pmu,     c5_zero_residuals, c6_oracle,
      c7_convexity,  c8_combinations, c9_projection, c10_table2, c11_monte_carlo,  c12_table1};
  return all;
}

bool run(int n) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = criteria()[static_cast<std::size_t>(n - 1)]();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << " [" << std::fixed
            << std::setprecision(2) << secs << " s]" << std::defaultfloat << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const int count = static_cast<int>(criteria().size());
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: lavlev_acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (which.empty()) {
    for (int n = 1; n <= count; ++n) which.push_back(n);
  }
  bool ok = true;
  for (int n : which) {
    if (n < 1 || n > count) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    ok = run(n) && ok;
  }
  return ok ? 0 : 1;
}
