// Data model, parser, serializer and subcircuit flattening for a strict
// SPICE-subset netlist format.
//
// Grammar summary (keywords and names are case-insensitive, '0' and 'gnd'
// both name ground):
//   <title line>
//   M<name> <d> <g> <s> <b> <model> W=<num> L=<num>
//   C<name> <n1> <n2> <num>
//   R<name> <n1> <n2> <num>          (engine self-test device)
//   V<name> <n+> <n-> [DC] <num>
//   V<name> <n+> <n-> PULSE(<v1> <v2> <delay> <rise> <fall> <width> <period>)
//   V<name> <n+> <n-> PWL(<t1> <v1> <t2> <v2> ...)
//   X<name> <node>... <subckt>
//   .model <name> nmos|pmos [<param>=<num> ...]
//     params: vt0 gamma phi0 tox alphal alphav alphaw kp lambda nb cox cj
//             bodyfx (1 = conventional body-effect form)
//   .subckt <name> <port>... / .ends [<name>]
//   .global <node>...
//   .end
// '*' starts a comment line, '+' continues the previous line. Numeric
// suffixes f/p/n/u/m/k/meg scale to SI; trailing unit letters are ignored.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "picospice/device.hpp"

namespace picospice {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

struct FlattenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DeviceKind { Mosfet, Capacitor, Resistor, Vsource, SubcktCall };

struct PulseSpec {
  double v1 = 0.0, v2 = 0.0;
  double delay = 0.0, rise = 0.0, fall = 0.0, width = 0.0, period = 0.0;
  bool operator==(const PulseSpec&) const = default;
};

struct PwlSpec {
  std::vector<double> times;
  std::vector<double> values;
  bool operator==(const PwlSpec&) const = default;
};

struct SourceSpec {
  enum class Kind { Dc, Pulse, Pwl };
  Kind kind = Kind::Dc;
  double dc = 0.0;
  PulseSpec pulse{};
  PwlSpec pwl{};

  double value_at(double t) const;
  // Time points where the waveform has corners, within (0, tstop].
  std::vector<double> breakpoints(double tstop) const;
  bool operator==(const SourceSpec&) const = default;
};

struct DeviceInstance {
  DeviceKind kind = DeviceKind::Mosfet;
  std::string name;
  std::vector<std::string> nodes;  // MOSFET: d g s b; two-terminal: n+ n-
  std::string model;               // MOSFET model name
  double w = 0.0, l = 0.0;         // MOSFET geometry, m
  double value = 0.0;              // capacitance F / resistance ohm
  SourceSpec source{};             // VSOURCE waveform
  std::string subckt;              // SubcktCall target
  bool operator==(const DeviceInstance&) const = default;
};

struct SubcktDef {
  std::string name;
  std::vector<std::string> ports;
  std::vector<DeviceInstance> devices;
  bool operator==(const SubcktDef&) const = default;
};

struct Diagnostic {
  enum class Code {
    FloatingNode,
    SingleTerminalNode,
    UndrivenGate,
    ZeroGeometry,
    UnflattenedSubckt,
  };
  Code code;
  std::string node;  // offending node or device
  std::string message;
};

struct Netlist {
  std::string title;
  std::vector<DeviceInstance> devices;
  std::map<std::string, MosModel> models;
  std::map<std::string, SubcktDef> subcircuits;
  std::set<std::string> globals;  // global nodes besides ground

  // All node names referenced by devices, including ground ("0") if used.
  std::set<std::string> nodes() const;
  const DeviceInstance* find_device(std::string_view name) const;
  bool operator==(const Netlist&) const = default;
};

// Parse a complete deck (must end with .end). Suffixes are resolved, node
// and device names lowercased, gnd aliased to 0. Throws ParseError with a
// line number on malformed input, unknown .model parameters, duplicate
// device names, undefined MOSFET models, or a missing .end.
Netlist parse_netlist(std::string_view text);

// Expand every subcircuit call; inner nodes and device names get the
// "instance.local" prefix, ground and .global nodes are not renamed.
// Throws FlattenError on recursive subcircuits or port arity mismatch.
Netlist flatten(const Netlist& n);

// Static checks on a flattened netlist: floating nodes (no DC path to
// ground), single-terminal nodes, undriven MOSFET gates, zero geometry.
// An empty result means the netlist is simulatable.
std::vector<Diagnostic> validate(const Netlist& n);

// Text form that parses back to a structurally equal netlist.
std::string serialize(const Netlist& n);

// Number handling, exposed for tests: "10f" -> 1e-14, "1meg" -> 1e6.
double parse_spice_number(std::string_view token);
// Shortest decimal form that round-trips the double exactly.
std::string format_spice_number(double v);

}  // namespace picospice
