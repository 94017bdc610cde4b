// DC operating point and transient simulation of a flattened netlist via
// Modified Nodal Analysis with Newton-Raphson.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "picospice/netlist.hpp"

namespace picospice {

struct SimConfig {
  double abstol = 1e-12;  // current residual tolerance, A
  double reltol = 1e-4;   // relative tolerance
  double vntol = 1e-6;    // absolute voltage tolerance, V
  double gmin = 1e-12;    // minimum conductance to ground per node, S
  int max_newton = 200;
  double tstep = 0.0;  // suggested timestep, s (0 = derive from sources)
  double tstop = 0.0;  // transient end time, s
  enum class Integrator { BackwardEuler, Trapezoidal };
  Integrator integrator = Integrator::Trapezoidal;
  double cmin = 1e-18;  // minimum node capacitance to ground, F
  // Continuation strategy for the DC solve. Auto tries plain Newton,
  // then gmin stepping, then source stepping; the Force variants start
  // directly with that homotopy (used by tests).
  enum class Homotopy { Auto, NewtonOnly, ForceGmin, ForceSource };
  Homotopy homotopy = Homotopy::Auto;
};

struct ConvergenceError : std::runtime_error {
  std::string worst_node;
  double residual = 0.0;
  ConvergenceError(const std::string& msg, std::string node = {},
                   double res = 0.0)
      : std::runtime_error(msg), worst_node(std::move(node)), residual(res) {}
};

struct Waveform {
  std::vector<double> times;
  std::vector<std::string> nodes;
  std::vector<std::vector<double>> v;  // v[node_index][sample]
  std::vector<std::string> sources;
  // Source terminal nodes, (n+, n-) per source, for V*I power integration.
  std::vector<std::pair<std::string, std::string>> source_nodes;
  std::vector<std::vector<double>> i;  // i[source_index][sample]

  int node_index(std::string_view name) const;     // -1 if absent
  int source_index(std::string_view name) const;   // -1 if absent
  // Linear interpolation; clamps outside the time span. Ground reads 0.
  double value(std::string_view node, double t) const;
  double current(std::string_view source, double t) const;
  // CSV with header time,<node>,...,i(<source>),...; 9 significant digits.
  std::string to_csv() const;
};

using NodeVoltages = std::map<std::string, double>;

// Solve the DC operating point. source_scale multiplies every source
// value (the homotopy ramps toward it). Newton updates are clamped to
// 0.3 V per node per iteration; on failure the engine retries with gmin
// stepping (x1e6, decaying decade-wise) and then source stepping.
NodeVoltages dc_operating_point(const Netlist& n, const SimConfig& cfg,
                                double source_scale = 1.0);

// Transient analysis from 0 to tstop. Starts from the DC point at t=0,
// steps a fixed grid of tstep plus source breakpoints, halves a failing
// step up to 8 times, and records every accepted step. Trapezoidal
// integration by default with a backward-Euler first step.
Waveform transient(const Netlist& n, const SimConfig& cfg);

// Branch current series of a named source; positive means current
// delivered by the source into the circuit. Throws std::invalid_argument
// for an unknown source.
std::vector<double> supply_current(const Waveform& w,
                                   std::string_view source);

struct KclStats {
  double max_residual = 0.0;   // worst node current imbalance, A
  double max_allowed = 0.0;    // abstol + reltol * largest branch current
  std::string worst_node;
  bool ok = false;
};

// Re-evaluate device currents at a DC solution and report the worst KCL
// imbalance (diagnostic; used by tests).
KclStats kcl_check(const Netlist& n, const NodeVoltages& sol,
                   const SimConfig& cfg, double source_scale = 1.0);

}  // namespace picospice
