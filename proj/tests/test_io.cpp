#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lavlev/errors.hpp"
#include "lavlev/fixtures.hpp"
#include "lavlev/io.hpp"
#include "oracles.hpp"

using namespace lavlev;

namespace {

std::string parse_error(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

std::string data_file(const std::string& name) {
  return io::read_text(std::filesystem::path(LAVLEV_DATA_DIR) / name);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("model round trip") {
    std::mt19937_64 rng(7);
    auto m = make_model(oracle::random_matrix(rng, 5, 3), oracle::random_vector(rng, 5));
    m.state_labels = {"a", "b", "c"};
    m.true_states = oracle::random_vector(rng, 3);
    const std::string text = io::serialize_model(m);
    const auto back = io::parse_model(text);
    CHECK(back.h == m.h);
    CHECK(back.z == m.z);
    CHECK(back.labels == m.labels);
    CHECK(back.state_labels == m.state_labels);
    REQUIRE(back.true_states);
    CHECK(*back.true_states == *m.true_states);
    CHECK(io::serialize_model(back) == text);
  }

  TEST_CASE("model defaults") {
    const auto m = io::parse_model(R"({"H": [[1, 0], [0, 1], [1, 1]]})");
    CHECK(m.labels == std::vector<std::string>{"m1", "m2", "m3"});
    CHECK(m.z.isZero());
  }

  TEST_CASE("malformed JSON reports line and column") {
    const std::string msg = parse_error([] { io::parse_model("{\n  \"H\": [[1, 2],\n   [3, ]]\n}", "f.json"); });
    CHECK(msg.find("f.json:3:") != std::string::npos);
  }

  TEST_CASE("schema violations") {
    CHECK(parse_error([] { io::parse_model(R"({"H": [[1, 2], [3]]})"); }).find("$.H[1]") != std::string::npos);
    CHECK(parse_error([] { io::parse_model(R"({"labels": ["a"]})"); }).find("$.H") != std::string::npos);
    CHECK(parse_error([] { io::parse_model(R"({"H": [[1, "x"]]})"); }).find("$.H[0][1]") != std::string::npos);
    parse_error([] { io::parse_model(R"({"H": [[1], [2]], "z": [1]})"); });
    parse_error([] { io::parse_model(R"({"H": [[1], [2]], "labels": ["a", "a"]})"); });
    parse_error([] { io::parse_partitions(R"({"partitions": [{"name": "x"}]})"); });
    parse_error([] { io::parse_network(R"({"buses": [1], "reference_bus": 1, "lines": [],
                                          "measurements": [{"kind": "Bogus", "bus": 1, "label": "a"}]})"); });
  }

  TEST_CASE("network round trip") {
    for (const auto& name : fixtures::fixture_names()) {
      const auto net = *fixtures::fixture_network(name);
      const std::string text = io::serialize_network(net);
      CHECK(io::serialize_network(io::parse_network(text)) == text);
    }
  }

  TEST_CASE("shipped data files match the built-in fixtures") {
    for (const auto& name : fixtures::fixture_names()) {
      CHECK(io::serialize_network(io::parse_network(data_file(name + ".json"))) ==
            io::serialize_network(*fixtures::fixture_network(name)));
    }
    CHECK(io::serialize_partitions(io::parse_partitions(data_file("ieee14-table1-partitions.json"))) ==
          io::serialize_partitions(fixtures::ieee14_table1_partitions()));
  }

  TEST_CASE("partition file with labels and indices") {
    const auto specs = io::parse_partitions(R"({"partitions": [{"name": "a", "measurements": ["x", 3]}]})");
    REQUIRE(specs.size() == 1);
    CHECK(std::get<std::string>(specs[0].measurements[0]) == "x");
    CHECK(std::get<Index>(specs[0].measurements[1]) == 3);
    const std::string text = io::serialize_partitions(specs);
    CHECK(io::serialize_partitions(io::parse_partitions(text)) == text);
  }

  TEST_CASE("solution, reports and PS round trip") {
    LavSolution s;
    s.theta_hat = Vector::LinSpaced(3, -1, 1);
    s.residuals = Vector::LinSpaced(4, 0.1, 0.4);
    s.objective = 1.0 / 3.0;
    s.zero_set = {0, 2};
    s.iterations = 7;
    s.degenerate = true;
    const std::string st = io::serialize_lav_solution(s);
    CHECK(io::serialize_lav_solution(io::parse_lav_solution(st)) == st);
    CHECK(io::parse_lav_solution(st).objective == s.objective);

    Matrix h(3, 2);
    h << 1, 0, 0, 1, 100, 100;
    const auto m = make_model(h);
    const auto rep = detect_all(m);
    const std::string rt = io::serialize_leverage_report(rep);
    CHECK(io::serialize_leverage_report(io::parse_leverage_report(rt)) == rt);

    PartitionSpec a{"a", {Index(0), Index(2)}, {}};
    PartitionSpec b{"b", {Index(1), Index(2)}, {}};
    const auto pr = detect_partitioned(m, {make_partition(m, a), make_partition(m, b)});
    const std::string pt = io::serialize_partitioned_report(pr);
    CHECK(io::serialize_partitioned_report(io::parse_partitioned_report(pt)) == pt);

    PsReport ps;
    ps.ps = Vector::Constant(2, 1.5);
    ps.dof = {1, 2};
    ps.cutoff.resize(2);
    ps.cutoff << 5.0, std::numeric_limits<double>::infinity();
    ps.flagged = {false, true};
    ps.variant = "v";
    const std::string pst = io::serialize_ps_report(ps);
    CHECK(pst.find("\"inf\"") != std::string::npos);
    const auto back = io::parse_ps_report(pst);
    CHECK(std::isinf(back.cutoff(1)));
    CHECK(io::serialize_ps_report(back) == pst);
  }

  TEST_CASE("CSV matrices") {
    std::istringstream in("1, 2.5,3\n\n-4,5e-1,6\r\n");
    const Matrix m = io::read_csv_matrix(in);
    Matrix expect(2, 3);
    expect << 1, 2.5, 3, -4, 0.5, 6;
    CHECK(m == expect);
    std::ostringstream out;
    io::write_csv_matrix(out, m);
    std::istringstream again(out.str());
    CHECK(io::read_csv_matrix(again) == m);

    std::istringstream ragged("1,2\n3\n");
    CHECK(parse_error([&] { io::read_csv_matrix(ragged, "r.csv"); }).find("r.csv: 2:") != std::string::npos);
    std::istringstream junk("1,x\n");
    parse_error([&] { io::read_csv_matrix(junk); });
  }
}
