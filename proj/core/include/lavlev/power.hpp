#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lavlev/model.hpp"

namespace lavlev {

enum class MeasurementKind {
  kPFlow,
  kQFlow,
  kPInj,
  kQInj,
  kVmag,
  kIFlowRe,
  kIFlowIm,
  kIInjRe,
  kIInjIm,
  kVRe,
  kVIm,
};

const char* to_string(MeasurementKind kind);
MeasurementKind measurement_kind_from_string(std::string_view text);
bool is_flow(MeasurementKind kind);
bool is_pmu(MeasurementKind kind);

// Flow kinds use from/to; the others use bus.
struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::kPFlow;
  int from = 0;
  int to = 0;
  int bus = 0;
  std::string label;
};

struct Line {
  int from = 0;
  int to = 0;
  double x = 0.0;  // series reactance, p.u., > 0
  double r = 0.0;  // series resistance, p.u.
};

struct NetworkModel {
  std::string name;
  std::vector<int> buses;
  int reference_bus = 0;
  std::vector<Line> lines;
  std::vector<MeasurementSpec> measurements;
};

struct GrossErrorSpec {
  std::string label;
  double magnitude = 0.0;  // additive, p.u.
};

// Structural checks (kInvalidNetwork) and connectivity (kDisconnectedBus).
void validate_network(const NetworkModel& net);

// DC-flow model over unit voltage magnitudes and lossless lines.
//
// Angle columns cover every bus except the reference, in bus-list order.
// When any Q or |V| measurement is present, one magnitude column per bus is
// appended and the Q-V rows mirror the P-theta rows with the same 1/x
// coefficients. z = H * states when states are given, otherwise zero.
// Throws kUnsupportedKind for phasor kinds.
MeasurementModel build_dc_model(const NetworkModel& net,
                                const std::optional<Vector>& states = std::nullopt);

// Phasor model in rectangular coordinates. Columns are [Im V | Re V], each in
// bus-list order; rows are the Re-current and Im-voltage measurements
// followed by the Im-current and Re-voltage measurements, each in file
// order. Currents are oriented as I_ij = y_ij (V_j - V_i) with
// y = 1 / (r + jx). Lossless networks give a block-diagonal H.
// Throws kUnsupportedKind for P/Q/|V| kinds.
MeasurementModel build_pmu_model(const NetworkModel& net,
                                 const std::optional<Vector>& states = std::nullopt);

// Copy of the model with z[label] += magnitude for each entry.
MeasurementModel inject_gross_errors(const MeasurementModel& model,
                                     std::span<const GrossErrorSpec> errors);

}  // namespace lavlev
