// Built-in cells: netlist builders for the 3-transistor XNOR, the
// 5-transistor XNOR/XOR cell, the 8-transistor full adder and two
// reference circuits, plus the exhaustive stimulus generator and the
// boolean oracle used to grade them.
#pragma once

#include <vector>

#include "picospice/measure.hpp"
#include "picospice/netlist.hpp"

namespace picospice {

enum class CellName { Xnor3t, XnorXor5t, Adder8t, Inverter, CmosXnorRef };

CellName cell_from_string(std::string_view s);  // throws invalid_argument
std::string to_string(CellName c);

// Wiring of the 3T XNOR's N2 pull device. PassPair connects its channel
// between the output and input A, so at A=B=1 both N1 and N2 pass the
// high level (the output settles one threshold below the rail).
// GroundedN2 ties the N2 source to ground instead; at A=B=1 that variant
// fights N1 and settles the output much lower.
enum class Xnor3tWiring { PassPair, GroundedN2 };

struct CellSpec {
  CellName name = CellName::Xnor3t;
  double vdd = 3.3;          // valid range [1.0, 5.0]
  double load_cap = 10e-15;  // per output, F
  std::string card = "generic035";  // generic035 | geomdemo
  Xnor3tWiring wiring = Xnor3tWiring::PassPair;
  // Per-device overrides, keyed by device name (e.g. "mn1").
  std::map<std::string, double> width_override;
  std::map<std::string, double> length_override;
};

std::vector<std::string> cell_inputs(CellName c);
std::vector<std::string> cell_outputs(CellName c);

// Cell netlist: MOSFETs with the published sizing, model cards, the vdd
// supply source, and a load capacitor per output. Input sources are not
// included; attach standard_stimulus (or any V cards) to drive it.
// Throws std::invalid_argument on a bad spec.
Netlist build_cell(const CellSpec& spec);

struct Stimulus {
  std::vector<DeviceInstance> sources;  // one PWL source per input
  StimulusPlan plan;                    // covers the measured period
};

// Input pattern walk for a cell: every input combination is visited and
// every input bit both rises and falls at least once. Patterns are
// ordered so that dynamically-held outputs (the adder carry) are entered
// from states that leave them at a valid level.
std::vector<std::vector<bool>> stimulus_patterns(CellName c);

// PWL sources realizing two periods of the pattern walk plus the plan
// (intervals over the second period, expected bits from the oracle).
Stimulus standard_stimulus(CellName c, double vdd, double period = 10e-9,
                           double rise = 100e-12);

// build_cell plus the standard stimulus sources: a complete, simulatable
// deck. The bundled cells/*.sp files are this netlist, serialized.
Netlist build_testbench(const CellSpec& spec, double period = 10e-9,
                        double rise = 100e-12);

// Boolean reference. For the adder the sum/carry are computed from the
// direct equations and re-derived through the half-sum decomposition;
// the two must agree. Throws std::invalid_argument on arity mismatch.
std::vector<bool> oracle(const std::vector<bool>& inputs, CellName c);

// Simulate a testbench with the standard stimulus and measure it.
struct CellRun {
  Netlist netlist;
  Waveform waveform;
  StimulusPlan plan;
  MeasurementReport report;
};
CellRun run_cell(const CellSpec& spec, double period = 10e-9,
                 double rise = 100e-12, double voh_frac = 0.55,
                 double vol_frac = 0.15, const SimConfig& base = {});

}  // namespace picospice
