#include "doctest.h"
#include "lavlev/errors.hpp"
#include "lavlev/fixtures.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/power.hpp"

using namespace lavlev;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lavlev::Error");
  return ErrorCode::kParse;
}

NetworkModel single_line() {
  NetworkModel net;
  net.buses = {1, 2};
  net.reference_bus = 2;
  net.lines = {{1, 2, 0.25, 0.0}};
  net.measurements = {{MeasurementKind::kPFlow, 1, 2, 0, "f"}};
  return net;
}

}  // namespace

TEST_SUITE("power") {
  TEST_CASE("3-bus DC model is the printed matrix") {
    Matrix expect(7, 2);
    expect << 10, -10, 1, 0, -1, 0, 0, -1, 0, 1, 11, -10, -1, -1;
    const auto m = build_dc_model(fixtures::threebus_dc());
    CHECK(m.h == expect);
    CHECK(m.labels.front() == "P_flow1-2");
    CHECK(m.state_labels == std::vector<std::string>{"theta1", "theta2"});
    CHECK(m.z.isZero());
  }

  TEST_CASE("states synthesize z") {
    Vector theta(2);
    theta << 0.1, -0.3;
    const auto m = build_dc_model(fixtures::threebus_dc(), theta);
    CHECK((m.z - m.h * theta).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(m.true_states);
    CHECK(*m.true_states == theta);
  }

  TEST_CASE("single line") {
    const auto m = build_dc_model(single_line());
    CHECK(m.rows() == 1);
    CHECK(m.cols() == 1);
    CHECK(m.h(0, 0) == 4.0);
  }

  TEST_CASE("injection rows are sums of the flows leaving the bus") {
    const auto net = fixtures::ieee14_dc();
    NetworkModel all = net;
    all.measurements.clear();
    for (int b : net.buses) {
      all.measurements.push_back({MeasurementKind::kPInj, 0, 0, b, "P" + std::to_string(b)});
      all.measurements.push_back({MeasurementKind::kQInj, 0, 0, b, "Q" + std::to_string(b)});
      for (const auto& l : net.lines) {
        for (auto [f, t] : {std::pair{l.from, l.to}, std::pair{l.to, l.from}}) {
          if (f != b) continue;
          all.measurements.push_back({MeasurementKind::kPFlow, f, t, 0, "P" + std::to_string(f) + "-" + std::to_string(t)});
          all.measurements.push_back({MeasurementKind::kQFlow, f, t, 0, "Q" + std::to_string(f) + "-" + std::to_string(t)});
        }
      }
    }
    const auto m = build_dc_model(all);
    for (int b : net.buses) {
      for (const char* kind : {"P", "Q"}) {
        Vector sum = Vector::Zero(m.cols());
        for (const auto& l : net.lines) {
          if (l.from == b) sum += m.h.row(m.row_index(kind + std::to_string(b) + "-" + std::to_string(l.to))).transpose();
          if (l.to == b) sum += m.h.row(m.row_index(kind + std::to_string(b) + "-" + std::to_string(l.from))).transpose();
        }
        CHECK((m.h.row(m.row_index(kind + std::to_string(b))).transpose() - sum).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }

  TEST_CASE("14-bus model is 44 x 27 with full column rank") {
    const auto m = build_dc_model(fixtures::ieee14_dc());
    CHECK(m.rows() == 44);
    CHECK(m.cols() == 27);
    CHECK(rank(m.h) == 27);
    CHECK(m.labels[21] == "P_inj8");
    CHECK(m.labels.back() == "|V8|");
  }

  TEST_CASE("PMU blocks match the printed matrices") {
    Matrix h1t(3, 10);
    h1t << 0, 0, 1, 0, 1, -1, -1, 1, 1, -2,  //
        0, 1, 0, 10, 0, 0, 1, -1, 10, 1,     //
        1, 0, 0, -10, -1, 1, 0, 0, -11, 1;
    Matrix h2t(3, 10);
    h2t << 0, 0, 1, 0, -1, 1, 1, -1, -1, 2,  //
        0, 1, 0, -10, 0, 0, -1, 1, -10, -1,  //
        1, 0, 0, 10, 1, -1, 0, 0, 11, -1;
    const auto m = build_pmu_model(fixtures::threebus_pmu());
    REQUIRE(m.rows() == 20);
    REQUIRE(m.cols() == 6);
    CHECK(m.h.topLeftCorner(10, 3) == h1t.transpose());
    CHECK(m.h.bottomRightCorner(10, 3) == h2t.transpose());
    CHECK(m.h.topRightCorner(10, 3).isZero());
    CHECK(m.h.bottomLeftCorner(10, 3).isZero());
    CHECK(m.state_labels == std::vector<std::string>{"VIm3", "VIm2", "VIm1", "VRe3", "VRe2", "VRe1"});
  }

  TEST_CASE("PMU blocks have no leverage points") {
    const auto m = build_pmu_model(fixtures::threebus_pmu());
    const std::vector<Index> top{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const std::vector<Index> bottom{10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    const std::vector<Index> left{0, 1, 2};
    const std::vector<Index> right{3, 4, 5};
    const auto a = detect_all(submodel(m, top, left));
    const auto b = detect_all(submodel(m, bottom, right));
    CHECK(a.flagged().empty());
    CHECK(b.flagged().empty());
    CHECK(detect_all(m).flagged().empty());
  }

  TEST_CASE("voltage-only PMU set is the identity") {
    NetworkModel net = fixtures::threebus_pmu();
    net.measurements.clear();
    for (int b : {3, 2, 1}) net.measurements.push_back({MeasurementKind::kVIm, 0, 0, b, "i" + std::to_string(b)});
    const auto m = build_pmu_model(net);
    CHECK(m.h.leftCols(3) == Matrix::Identity(3, 3));
  }

  TEST_CASE("builder errors") {
    CHECK(code_of([] { build_dc_model(fixtures::threebus_pmu()); }) == ErrorCode::kUnsupportedKind);
    CHECK(code_of([] { build_pmu_model(fixtures::threebus_dc()); }) == ErrorCode::kUnsupportedKind);
    NetworkModel island = single_line();
    island.buses.push_back(3);
    island.measurements.push_back({MeasurementKind::kPInj, 0, 0, 3, "p3"});
    CHECK(code_of([&] { build_dc_model(island); }) == ErrorCode::kDisconnectedBus);
    NetworkModel bad = single_line();
    bad.lines[0].x = 0.0;
    CHECK(code_of([&] { build_dc_model(bad); }) == ErrorCode::kInvalidNetwork);
    bad = single_line();
    bad.reference_bus = 9;
    CHECK(code_of([&] { build_dc_model(bad); }) == ErrorCode::kInvalidNetwork);
    bad = single_line();
    bad.measurements.push_back(bad.measurements[0]);
    CHECK(code_of([&] { build_dc_model(bad); }) == ErrorCode::kInvalidNetwork);
    bad = single_line();
    bad.measurements[0].to = 7;
    CHECK(code_of([&] { build_dc_model(bad); }) == ErrorCode::kInvalidNetwork);
  }

  TEST_CASE("gross error injection") {
    const auto m = build_dc_model(fixtures::threebus_dc());
    const auto same = inject_gross_errors(m, {});
    CHECK(same.z == m.z);
    const std::vector<GrossErrorSpec> e{{"P_flow1-2", 10.0}};
    const auto hit = inject_gross_errors(m, e);
    CHECK(hit.z(0) == 10.0);
    CHECK(hit.z.tail(6).isZero());
    CHECK(hit.h == m.h);
    CHECK(detect_all(hit).flagged() == detect_all(m).flagged());
    const std::vector<GrossErrorSpec> bad{{"nope", 1.0}};
    CHECK(code_of([&] { inject_gross_errors(m, bad); }) == ErrorCode::kUnknownLabel);
  }

  TEST_CASE("measurement kind names round trip") {
    for (auto k : {MeasurementKind::kPFlow, MeasurementKind::kQInj, MeasurementKind::kVmag, MeasurementKind::kIFlowIm,
                   MeasurementKind::kVRe}) {
      CHECK(measurement_kind_from_string(to_string(k)) == k);
    }
  }
}
