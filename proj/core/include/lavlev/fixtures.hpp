#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lavlev/leverage.hpp"
#include "lavlev/power.hpp"

namespace lavlev::fixtures {

// Three-bus network with x12 = 0.1, x13 = x23 = 1 p.u., angle reference at
// bus 3, five flow and two injection measurements. Its DC model is
//   rows (10,-10) (1,0) (-1,0) (0,-1) (0,1) (11,-10) (-1,-1).
NetworkModel threebus_dc();

// Same topology measured by phasor units: Im/Re voltages at every bus and
// the current counterparts of the seven power measurements. Buses are listed
// as 3, 2, 1 so the state columns run V3, V2, V1.
NetworkModel threebus_pmu();

// IEEE 14-bus test case (line reactances only, bus 1 as angle reference)
// with the 44 measurements of the leverage-point study: 42 P/Q and |V1|,
// |V8|. The DC model is 44 x 27.
NetworkModel ieee14_dc();

// Entry of the reference 14-bus classification: a partition column is
// absent (not a member), Clean or Leverage.
enum class Table1Mark { kAbsent, kClean, kLeverage };

struct Table1Row {
  std::string label;
  bool biased_estimate = false;  // measurement carried a gross error
  Table1Mark blue = Table1Mark::kAbsent;
  Table1Mark red = Table1Mark::kAbsent;
};

std::vector<Table1Row> ieee14_table1();

// Blue and red partitions: members are the rows with a mark in that column.
// Red holds theta6 fixed as a local angle reference.
std::vector<PartitionSpec> ieee14_table1_partitions();

// Names accepted by fixture_network(): threebus-dc, threebus-pmu, ieee14-dc.
std::vector<std::string> fixture_names();
std::optional<NetworkModel> fixture_network(const std::string& name);

}  // namespace lavlev::fixtures
