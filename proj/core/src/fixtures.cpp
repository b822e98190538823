#include "lavlev/fixtures.hpp"

namespace lavlev::fixtures {
namespace {

MeasurementSpec flow(MeasurementKind kind, int from, int to, std::string label) {
  return {kind, from, to, 0, std::move(label)};
}

MeasurementSpec at_bus(MeasurementKind kind, int bus, std::string label) {
  return {kind, 0, 0, bus, std::move(label)};
}

std::string pair_name(int a, int b) { return std::to_string(a) + "-" + std::to_string(b); }

struct FlowPair {
  int from;
  int to;
};

constexpr FlowPair kThreeBusFlows[] = {{1, 2}, {1, 3}, {3, 1}, {3, 2}, {2, 3}};
constexpr int kThreeBusInjections[] = {1, 3};

std::vector<Line> threebus_lines() { return {{1, 2, 0.1, 0.0}, {1, 3, 1.0, 0.0}, {2, 3, 1.0, 0.0}}; }

}  // namespace

NetworkModel threebus_dc() {
  NetworkModel net;
  net.name = "threebus-dc";
  net.buses = {1, 2, 3};
  net.reference_bus = 3;
  net.lines = threebus_lines();
  for (const auto& f : kThreeBusFlows) {
    net.measurements.push_back(
        flow(MeasurementKind::kPFlow, f.from, f.to, "P_flow" + pair_name(f.from, f.to)));
  }
  for (int bus : kThreeBusInjections) {
    net.measurements.push_back(at_bus(MeasurementKind::kPInj, bus, "P_inj" + std::to_string(bus)));
  }
  return net;
}

NetworkModel threebus_pmu() {
  NetworkModel net;
  net.name = "threebus-pmu";
  net.buses = {3, 2, 1};
  net.reference_bus = 3;
  net.lines = threebus_lines();
  auto add_block = [&](MeasurementKind voltage, MeasurementKind flow_kind, MeasurementKind inj_kind,
                       const std::string& v_part, const std::string& i_part) {
    for (int bus : {1, 2, 3}) {
      net.measurements.push_back(at_bus(voltage, bus, "V" + std::to_string(bus) + "_" + v_part));
    }
    for (const auto& f : kThreeBusFlows) {
      net.measurements.push_back(flow(flow_kind, f.from, f.to,
                                      "I" + std::to_string(f.from) + std::to_string(f.to) + "_" + i_part));
    }
    for (int bus : kThreeBusInjections) {
      net.measurements.push_back(at_bus(inj_kind, bus, "I" + std::to_string(bus) + "_" + i_part));
    }
  };
  add_block(MeasurementKind::kVIm, MeasurementKind::kIFlowRe, MeasurementKind::kIInjRe, "Im", "Re");
  add_block(MeasurementKind::kVRe, MeasurementKind::kIFlowIm, MeasurementKind::kIInjIm, "Re", "Im");
  return net;
}

NetworkModel ieee14_dc() {
  NetworkModel net;
  net.name = "ieee14-dc";
  for (int b = 1; b <= 14; ++b) net.buses.push_back(b);
  net.reference_bus = 1;
  net.lines = {
      {1, 2, 0.05917, 0.01938},  {1, 5, 0.22304, 0.05403},  {2, 3, 0.19797, 0.04699},
      {2, 4, 0.17632, 0.05811},  {2, 5, 0.17388, 0.05695},  {3, 4, 0.17103, 0.06701},
      {4, 5, 0.04211, 0.01335},  {4, 7, 0.20912, 0.0},      {4, 9, 0.55618, 0.0},
      {5, 6, 0.25202, 0.0},      {6, 11, 0.19890, 0.09498}, {6, 12, 0.25581, 0.12291},
      {6, 13, 0.13027, 0.06615}, {7, 8, 0.17615, 0.0},      {7, 9, 0.11001, 0.0},
      {9, 10, 0.08450, 0.03181}, {9, 14, 0.27038, 0.12711}, {10, 11, 0.19207, 0.08205},
      {12, 13, 0.19988, 0.22092}, {13, 14, 0.34802, 0.17093},
  };
  for (const auto& row : ieee14_table1()) {
    const std::string& label = row.label;
    const bool reactive = label[0] == 'Q';
    if (label.front() == '|') {
      net.measurements.push_back(
          at_bus(MeasurementKind::kVmag, std::stoi(label.substr(2, label.size() - 3)), label));
    } else if (label.find("_inj") != std::string::npos) {
      net.measurements.push_back(at_bus(reactive ? MeasurementKind::kQInj : MeasurementKind::kPInj,
                                        std::stoi(label.substr(5)), label));
    } else {
      const std::string pair = label.substr(6);
      const auto dash = pair.find('-');
      net.measurements.push_back(flow(reactive ? MeasurementKind::kQFlow : MeasurementKind::kPFlow,
                                      std::stoi(pair.substr(0, dash)), std::stoi(pair.substr(dash + 1)),
                                      label));
    }
  }
  return net;
}

std::vector<Table1Row> ieee14_table1() {
  using M = Table1Mark;
  constexpr M A = M::kAbsent;
  constexpr M C = M::kClean;
  constexpr M L = M::kLeverage;
  return {
      {"|V1|", false, C, A},         {"P_inj3", true, L, A},        {"Q_inj3", true, L, A},
      {"P_inj2", true, L, A},        {"Q_inj2", true, L, A},        {"P_inj1", false, C, A},
      {"Q_inj1", false, C, A},       {"P_inj4", true, L, A},        {"Q_inj4", true, L, A},
      {"P_flow5-4", true, L, A},     {"Q_flow5-4", true, L, A},     {"P_flow2-3", false, C, A},
      {"Q_flow2-3", false, C, A},    {"P_flow1-2", false, C, A},    {"Q_flow1-2", false, C, A},
      {"P_flow2-5", false, C, A},    {"Q_flow2-5", false, C, A},    {"P_inj14", true, A, L},
      {"Q_inj14", true, A, L},       {"P_inj10", false, A, C},      {"Q_inj10", false, A, C},
      {"P_inj8", true, L, L},        {"Q_inj8", false, C, C},       {"P_inj12", true, A, L},
      {"Q_inj12", true, A, L},       {"P_inj13", false, A, C},      {"Q_inj13", false, A, C},
      {"P_flow12-13", false, A, C},  {"Q_flow12-13", false, A, C},  {"P_flow13-14", false, A, C},
      {"Q_flow13-14", false, A, C},  {"P_flow6-13", false, A, C},   {"Q_flow6-13", false, A, C},
      {"P_flow10-9", false, A, C},   {"Q_flow10-9", false, A, C},   {"P_flow11-10", false, A, C},
      {"Q_flow11-10", false, A, C},  {"P_flow6-11", true, A, L},    {"Q_flow6-11", true, A, L},
      {"P_flow9-7", true, L, L},     {"Q_flow9-7", true, L, L},     {"P_flow7-8", false, L, L},
      {"Q_flow7-8", false, C, C},    {"|V8|", false, C, L},
  };
}

std::vector<PartitionSpec> ieee14_table1_partitions() {
  PartitionSpec blue{"blue", {}, {}};
  // The red island does not reach bus 1, so bus 6 acts as its angle reference.
  PartitionSpec red{"red", {}, {std::string("theta6")}};
  for (const auto& row : ieee14_table1()) {
    if (row.blue != Table1Mark::kAbsent) blue.measurements.emplace_back(row.label);
    if (row.red != Table1Mark::kAbsent) red.measurements.emplace_back(row.label);
  }
  return {blue, red};
}

std::vector<std::string> fixture_names() { return {"threebus-dc", "threebus-pmu", "ieee14-dc"}; }

std::optional<NetworkModel> fixture_network(const std::string& name) {
  if (name == "threebus-dc") return threebus_dc();
  if (name == "threebus-pmu") return threebus_pmu();
  if (name == "ieee14-dc") return ieee14_dc();
  return std::nullopt;
}

}  // namespace lavlev::fixtures
