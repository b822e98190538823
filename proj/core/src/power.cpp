#include "lavlev/power.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <queue>
#include <set>

#include "lavlev/errors.hpp"

namespace lavlev {
namespace {

struct KindName {
  MeasurementKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {MeasurementKind::kPFlow, "PFlow"},     {MeasurementKind::kQFlow, "QFlow"},
    {MeasurementKind::kPInj, "PInj"},       {MeasurementKind::kQInj, "QInj"},
    {MeasurementKind::kVmag, "Vmag"},       {MeasurementKind::kIFlowRe, "IFlowRe"},
    {MeasurementKind::kIFlowIm, "IFlowIm"}, {MeasurementKind::kIInjRe, "IInjRe"},
    {MeasurementKind::kIInjIm, "IInjIm"},   {MeasurementKind::kVRe, "VRe"},
    {MeasurementKind::kVIm, "VIm"},
};

using Admittance = std::complex<double>;
using BusPair = std::pair<int, int>;

BusPair ordered(int a, int b) { return a < b ? BusPair{a, b} : BusPair{b, a}; }

// Parallel lines are merged by summing their admittances.
std::map<BusPair, Admittance> branch_admittances(const NetworkModel& net) {
  std::map<BusPair, Admittance> y;
  for (const Line& line : net.lines) y[ordered(line.from, line.to)] += 1.0 / Admittance(line.r, line.x);
  return y;
}

std::map<BusPair, double> branch_susceptances(const NetworkModel& net) {
  std::map<BusPair, double> b;
  for (const Line& line : net.lines) b[ordered(line.from, line.to)] += 1.0 / line.x;
  return b;
}

std::vector<int> neighbours(const NetworkModel& net, int bus) {
  std::set<int> out;
  for (const Line& line : net.lines) {
    if (line.from == bus) out.insert(line.to);
    if (line.to == bus) out.insert(line.from);
  }
  return {out.begin(), out.end()};
}

bool uses_magnitudes(MeasurementKind kind) {
  return kind == MeasurementKind::kQFlow || kind == MeasurementKind::kQInj ||
         kind == MeasurementKind::kVmag;
}

void finalize(MeasurementModel& model, const std::optional<Vector>& states) {
  const Index m = model.h.rows();
  if (states) {
    if (states->size() != model.h.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "states have length " + std::to_string(states->size()) +
                                                     ", model has " + std::to_string(model.h.cols()) +
                                                     " columns");
    }
    model.z = model.h * *states;
    model.true_states = *states;
  } else {
    model.z = Vector::Zero(m);
  }
}

}  // namespace

const char* to_string(MeasurementKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "?";
}

MeasurementKind measurement_kind_from_string(std::string_view text) {
  for (const auto& kn : kKindNames) {
    if (text == kn.name) return kn.kind;
  }
  throw Error(ErrorCode::kParse, "unknown measurement kind '" + std::string(text) + "'");
}

bool is_flow(MeasurementKind kind) {
  return kind == MeasurementKind::kPFlow || kind == MeasurementKind::kQFlow ||
         kind == MeasurementKind::kIFlowRe || kind == MeasurementKind::kIFlowIm;
}

bool is_pmu(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::kIFlowRe:
    case MeasurementKind::kIFlowIm:
    case MeasurementKind::kIInjRe:
    case MeasurementKind::kIInjIm:
    case MeasurementKind::kVRe:
    case MeasurementKind::kVIm:
      return true;
    default:
      return false;
  }
}

void validate_network(const NetworkModel& net) {
  std::set<int> buses(net.buses.begin(), net.buses.end());
  if (buses.empty()) throw Error(ErrorCode::kInvalidNetwork, "network has no buses");
  if (buses.size() != net.buses.size()) throw Error(ErrorCode::kInvalidNetwork, "duplicate bus id");
  if (!buses.count(net.reference_bus)) {
    throw Error(ErrorCode::kInvalidNetwork,
                "reference bus " + std::to_string(net.reference_bus) + " is not a bus");
  }
  std::set<BusPair> branches;
  for (const Line& line : net.lines) {
    if (!buses.count(line.from) || !buses.count(line.to) || line.from == line.to) {
      throw Error(ErrorCode::kInvalidNetwork, "line " + std::to_string(line.from) + "-" +
                                                  std::to_string(line.to) + " has bad endpoints");
    }
    if (!(line.x > 0.0) || !std::isfinite(line.x) || !std::isfinite(line.r)) {
      throw Error(ErrorCode::kInvalidNetwork, "line " + std::to_string(line.from) + "-" +
                                                  std::to_string(line.to) + " needs finite x > 0");
    }
    branches.insert(ordered(line.from, line.to));
  }
  std::set<std::string> labels;
  for (const auto& meas : net.measurements) {
    if (!labels.insert(meas.label).second) {
      throw Error(ErrorCode::kInvalidNetwork, "duplicate measurement label '" + meas.label + "'");
    }
    if (is_flow(meas.kind)) {
      if (!branches.count(ordered(meas.from, meas.to))) {
        throw Error(ErrorCode::kInvalidNetwork, meas.label + " refers to a missing line");
      }
    } else if (!buses.count(meas.bus)) {
      throw Error(ErrorCode::kInvalidNetwork, meas.label + " refers to a missing bus");
    }
  }

  std::set<int> reached{net.reference_bus};
  std::queue<int> frontier;
  frontier.push(net.reference_bus);
  while (!frontier.empty()) {
    const int bus = frontier.front();
    frontier.pop();
    for (int nb : neighbours(net, bus)) {
      if (reached.insert(nb).second) frontier.push(nb);
    }
  }
  if (reached.size() != buses.size()) {
    for (int bus : net.buses) {
      if (!reached.count(bus)) {
        throw Error(ErrorCode::kDisconnectedBus,
                    "bus " + std::to_string(bus) + " is not connected to the reference");
      }
    }
  }
}

MeasurementModel build_dc_model(const NetworkModel& net, const std::optional<Vector>& states) {
  validate_network(net);
  bool magnitudes = false;
  for (const auto& meas : net.measurements) {
    if (is_pmu(meas.kind)) {
      throw Error(ErrorCode::kUnsupportedKind,
                  std::string(to_string(meas.kind)) + " is a phasor kind; use the PMU builder");
    }
    magnitudes = magnitudes || uses_magnitudes(meas.kind);
  }

  MeasurementModel model;
  std::map<int, Index> angle_col;
  std::map<int, Index> magnitude_col;
  for (int bus : net.buses) {
    if (bus == net.reference_bus) continue;
    angle_col[bus] = static_cast<Index>(model.state_labels.size());
    model.state_labels.push_back("theta" + std::to_string(bus));
  }
  if (magnitudes) {
    for (int bus : net.buses) {
      magnitude_col[bus] = static_cast<Index>(model.state_labels.size());
      model.state_labels.push_back("V" + std::to_string(bus));
    }
  }

  const auto b = branch_susceptances(net);
  const Index n = static_cast<Index>(model.state_labels.size());
  model.h = Matrix::Zero(static_cast<Index>(net.measurements.size()), n);

  for (std::size_t r = 0; r < net.measurements.size(); ++r) {
    const MeasurementSpec& meas = net.measurements[r];
    auto row = model.h.row(static_cast<Index>(r));
    const bool q_block = uses_magnitudes(meas.kind);
    const auto& cols = q_block ? magnitude_col : angle_col;
    auto add = [&](int bus, double value) {
      const auto it = cols.find(bus);
      if (it != cols.end()) row(it->second) += value;
    };
    // Flow from `from` toward `to` over the merged branch.
    auto add_flow = [&](int from, int to) {
      const double bij = b.at(ordered(from, to));
      add(from, bij);
      add(to, -bij);
    };
    switch (meas.kind) {
      case MeasurementKind::kPFlow:
      case MeasurementKind::kQFlow:
        add_flow(meas.from, meas.to);
        break;
      case MeasurementKind::kPInj:
      case MeasurementKind::kQInj:
        for (int nb : neighbours(net, meas.bus)) add_flow(meas.bus, nb);
        break;
      case MeasurementKind::kVmag:
        add(meas.bus, 1.0);
        break;
      default:
        break;
    }
    model.labels.push_back(meas.label);
  }
  finalize(model, states);
  return model;
}

MeasurementModel build_pmu_model(const NetworkModel& net, const std::optional<Vector>& states) {
  validate_network(net);
  for (const auto& meas : net.measurements) {
    if (!is_pmu(meas.kind)) {
      throw Error(ErrorCode::kUnsupportedKind,
                  std::string(to_string(meas.kind)) + " is not a phasor kind; use the DC builder");
    }
  }

  MeasurementModel model;
  std::map<int, Index> im_col;
  std::map<int, Index> re_col;
  for (int bus : net.buses) {
    im_col[bus] = static_cast<Index>(model.state_labels.size());
    model.state_labels.push_back("VIm" + std::to_string(bus));
  }
  for (int bus : net.buses) {
    re_col[bus] = static_cast<Index>(model.state_labels.size());
    model.state_labels.push_back("VRe" + std::to_string(bus));
  }

  auto in_first_block = [](MeasurementKind kind) {
    return kind == MeasurementKind::kIFlowRe || kind == MeasurementKind::kIInjRe ||
           kind == MeasurementKind::kVIm;
  };
  std::vector<const MeasurementSpec*> order;
  for (const auto& meas : net.measurements) {
    if (in_first_block(meas.kind)) order.push_back(&meas);
  }
  for (const auto& meas : net.measurements) {
    if (!in_first_block(meas.kind)) order.push_back(&meas);
  }

  const auto y = branch_admittances(net);
  model.h = Matrix::Zero(static_cast<Index>(order.size()), static_cast<Index>(model.state_labels.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    const MeasurementSpec& meas = *order[r];
    auto row = model.h.row(static_cast<Index>(r));
    const bool real_part =
        meas.kind == MeasurementKind::kIFlowRe || meas.kind == MeasurementKind::kIInjRe;
    // I_ij = y (V_j - V_i), split into real and imaginary parts.
    auto add_current = [&](int i, int j) {
      const Admittance yij = y.at(ordered(i, j));
      const double g = yij.real();
      const double beta = yij.imag();
      if (real_part) {
        row(re_col.at(j)) += g;
        row(re_col.at(i)) -= g;
        row(im_col.at(j)) -= beta;
        row(im_col.at(i)) += beta;
      } else {
        row(re_col.at(j)) += beta;
        row(re_col.at(i)) -= beta;
        row(im_col.at(j)) += g;
        row(im_col.at(i)) -= g;
      }
    };
    switch (meas.kind) {
      case MeasurementKind::kIFlowRe:
      case MeasurementKind::kIFlowIm:
        add_current(meas.from, meas.to);
        break;
      case MeasurementKind::kIInjRe:
      case MeasurementKind::kIInjIm:
        for (int nb : neighbours(net, meas.bus)) add_current(meas.bus, nb);
        break;
      case MeasurementKind::kVRe:
        row(re_col.at(meas.bus)) = 1.0;
        break;
      case MeasurementKind::kVIm:
        row(im_col.at(meas.bus)) = 1.0;
        break;
      default:
        break;
    }
    model.labels.push_back(meas.label);
  }
  // Exact zeros rather than -0.0 keep golden comparisons and output stable.
  model.h = model.h.unaryExpr([](double v) { return v == 0.0 ? 0.0 : v; });
  finalize(model, states);
  return model;
}

MeasurementModel inject_gross_errors(const MeasurementModel& model,
                                     std::span<const GrossErrorSpec> errors) {
  MeasurementModel out = model;
  for (const auto& e : errors) out.z(out.row_index(e.label)) += e.magnitude;
  return out;
}

}  // namespace lavlev
