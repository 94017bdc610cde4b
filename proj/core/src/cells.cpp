#include "picospice/cells.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace picospice {

CellName cell_from_string(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "xnor3t") return CellName::Xnor3t;
  if (t == "xnorxor5t") return CellName::XnorXor5t;
  if (t == "adder8t") return CellName::Adder8t;
  if (t == "inverter") return CellName::Inverter;
  if (t == "cmos_xnor_ref") return CellName::CmosXnorRef;
  throw std::invalid_argument("unknown cell " + t);
}

std::string to_string(CellName c) {
  switch (c) {
    case CellName::Xnor3t: return "xnor3t";
    case CellName::XnorXor5t: return "xnorxor5t";
    case CellName::Adder8t: return "adder8t";
    case CellName::Inverter: return "inverter";
    case CellName::CmosXnorRef: return "cmos_xnor_ref";
  }
  return "?";
}

std::vector<std::string> cell_inputs(CellName c) {
  switch (c) {
    case CellName::Inverter: return {"a"};
    case CellName::Adder8t: return {"a", "b", "cin"};
    default: return {"a", "b"};
  }
}

std::vector<std::string> cell_outputs(CellName c) {
  switch (c) {
    case CellName::XnorXor5t: return {"xnor", "xor"};
    case CellName::Adder8t: return {"sum", "cout"};
    default: return {"out"};
  }
}

std::vector<bool> oracle(const std::vector<bool>& in, CellName c) {
  const size_t arity = cell_inputs(c).size();
  if (in.size() != arity)
    throw std::invalid_argument("oracle: " + to_string(c) + " takes " +
                                std::to_string(arity) + " inputs");
  switch (c) {
    case CellName::Inverter:
      return {!in[0]};
    case CellName::Xnor3t:
    case CellName::CmosXnorRef:
      return {in[0] == in[1]};
    case CellName::XnorXor5t:
      return {in[0] == in[1], in[0] != in[1]};
    case CellName::Adder8t: {
      const bool a = in[0], b = in[1], cin = in[2];
      const bool sum = (a != b) != cin;
      const bool cout = (a && b) || (cin && (a != b));
      // Cross-check through the half-sum decomposition.
      const bool h = a != b;
      const bool sum2 = (h && !cin) || (!h && cin);
      const bool cout2 = (a && !h) || (cin && h);
      if (sum != sum2 || cout != cout2)
        throw std::logic_error("adder oracle decomposition mismatch");
      return {sum, cout};
    }
  }
  throw std::invalid_argument("oracle: bad cell");
}

namespace {

DeviceInstance mosfet(const std::string& name, const std::string& d,
                      const std::string& g, const std::string& s,
                      const std::string& b, const std::string& model,
                      double w, double l = 0.35e-6) {
  DeviceInstance dev;
  dev.kind = DeviceKind::Mosfet;
  dev.name = name;
  dev.nodes = {d, g, s, b};
  dev.model = model;
  dev.w = w;
  dev.l = l;
  return dev;
}

DeviceInstance cap(const std::string& name, const std::string& n1,
                   const std::string& n2, double value) {
  DeviceInstance dev;
  dev.kind = DeviceKind::Capacitor;
  dev.name = name;
  dev.nodes = {n1, n2};
  dev.value = value;
  return dev;
}

DeviceInstance dc_source(const std::string& name, const std::string& np,
                         const std::string& nn, double value) {
  DeviceInstance dev;
  dev.kind = DeviceKind::Vsource;
  dev.name = name;
  dev.nodes = {np, nn};
  dev.source.kind = SourceSpec::Kind::Dc;
  dev.source.dc = value;
  return dev;
}

// A 3T XNOR stage with inputs (a, b) driving node out. P1 pulls out to
// the rail when b is low; N1 (wide, low resistance) passes b when a is
// high; N2 either passes a (PassPair) or pulls to ground (GroundedN2)
// when b is high.
void append_xnor3t(std::vector<DeviceInstance>& devs, const std::string& tag,
                   const std::string& a, const std::string& b,
                   const std::string& out, Xnor3tWiring wiring) {
  devs.push_back(mosfet("mp1" + tag, out, b, "vdd", "vdd", "pmod", 2.0e-6));
  devs.push_back(mosfet("mn1" + tag, out, a, b, "0", "nmod", 5.0e-6));
  const std::string n2_src = wiring == Xnor3tWiring::PassPair ? a : "0";
  devs.push_back(mosfet("mn2" + tag, out, b, n2_src, "0", "nmod", 1.0e-6));
}

}  // namespace

Netlist build_cell(const CellSpec& spec) {
  if (spec.vdd < 1.0 || spec.vdd > 5.0)
    throw std::invalid_argument("cell vdd must be within [1.0, 5.0] V");
  if (spec.load_cap < 0.0)
    throw std::invalid_argument("load_cap must be >= 0");
  if (spec.card != "generic035" && spec.card != "geomdemo")
    throw std::invalid_argument("unknown model card " + spec.card);

  Netlist n;
  n.title = to_string(spec.name) + " testbench";
  const bool geom = spec.card == "geomdemo";
  n.models["nmod"] =
      geom ? geomdemo(MosPolarity::Nmos) : generic035(MosPolarity::Nmos);
  n.models["pmod"] =
      geom ? geomdemo(MosPolarity::Pmos) : generic035(MosPolarity::Pmos);

  auto& devs = n.devices;
  switch (spec.name) {
    case CellName::Xnor3t:
      append_xnor3t(devs, "", "a", "b", "out", spec.wiring);
      break;
    case CellName::XnorXor5t:
      append_xnor3t(devs, "", "a", "b", "xnor", spec.wiring);
      // Restoring inverter: xor = NOT(xnor).
      devs.push_back(mosfet("mp2", "xor", "xnor", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mn3", "xor", "xnor", "0", "0", "nmod", 1.0e-6));
      break;
    case CellName::Adder8t:
      // Sum = XNOR(XNOR(a, b), cin); the second stage receives the
      // internal half-sum complement h on its gate-side input so the
      // stage channels connect only to strongly driven nodes.
      append_xnor3t(devs, "a", "a", "b", "h", spec.wiring);
      append_xnor3t(devs, "b", "h", "cin", "sum", spec.wiring);
      // Carry multiplexer: h selects between a (NMOS) and cin (PMOS).
      devs.push_back(mosfet("mnmux", "cout", "h", "a", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mpmux", "cout", "h", "cin", "vdd", "pmod", 2.0e-6));
      break;
    case CellName::Inverter:
      devs.push_back(mosfet("mp1", "out", "a", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mn1", "out", "a", "0", "0", "nmod", 1.0e-6));
      break;
    case CellName::CmosXnorRef:
      // Conventional static CMOS XNOR (12T with input inverters); engine
      // sanity baseline with rail-to-rail output.
      devs.push_back(mosfet("mpia", "abar", "a", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mnia", "abar", "a", "0", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mpib", "bbar", "b", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mnib", "bbar", "b", "0", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mpu1", "pm1", "a", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mpu2", "out", "b", "pm1", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mpu3", "pm2", "abar", "vdd", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mpu4", "out", "bbar", "pm2", "vdd", "pmod", 2.0e-6));
      devs.push_back(mosfet("mnd1", "out", "a", "nm1", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mnd2", "nm1", "bbar", "0", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mnd3", "out", "abar", "nm2", "0", "nmod", 1.0e-6));
      devs.push_back(mosfet("mnd4", "nm2", "b", "0", "0", "nmod", 1.0e-6));
      break;
  }

  for (auto& [name, w] : spec.width_override) {
    bool found = false;
    for (auto& d : devs)
      if (d.name == name) {
        if (!(w > 0.0)) throw std::invalid_argument("negative sizing for " + name);
        d.w = w;
        found = true;
      }
    if (!found) throw std::invalid_argument("no device " + name + " to size");
  }
  for (auto& [name, l] : spec.length_override) {
    bool found = false;
    for (auto& d : devs)
      if (d.name == name) {
        if (!(l > 0.0)) throw std::invalid_argument("negative sizing for " + name);
        d.l = l;
        found = true;
      }
    if (!found) throw std::invalid_argument("no device " + name + " to size");
  }

  if (spec.load_cap > 0.0)
    for (const auto& out : cell_outputs(spec.name))
      devs.push_back(cap("cl" + out, out, "0", spec.load_cap));
  devs.push_back(dc_source("vdd", "vdd", "0", spec.vdd));
  return n;
}

std::vector<std::vector<bool>> stimulus_patterns(CellName c) {
  switch (c) {
    case CellName::Inverter:
      return {{false}, {true}, {true}, {false}};
    case CellName::Xnor3t:
    case CellName::XnorXor5t:
    case CellName::CmosXnorRef:
      // Gray tour plus its complement: all four combinations, each input
      // rising and falling at least once.
      return {{false, false}, {false, true}, {true, true}, {true, false},
              {true, true},   {true, false}, {false, false}, {false, true}};
    case CellName::Adder8t:
      // Carry-aware walk (a, b, cin). The carry node is only driven
      // statically in some states and holds its level in the others, so
      // weak states are entered from states that leave cout at the level
      // the next pattern expects: 100 and 010 only with cout low (the
      // wrap 010 -> 100 keeps h low past the mux NMOS), 110 only from
      // 111 with cout high.
      return {{true, false, false},  {false, false, false},
              {false, false, true},  {false, true, true},
              {true, true, true},    {true, true, false},
              {true, true, true},    {true, false, true},
              {false, false, true},  {false, false, false},
              {false, true, false}};
  }
  throw std::invalid_argument("stimulus_patterns: bad cell");
}

Stimulus standard_stimulus(CellName c, double vdd, double period,
                           double rise) {
  if (!(period > 0.0) || !(rise > 0.0) || rise >= period / 4.0)
    throw std::invalid_argument("stimulus needs 0 < rise << period");
  const auto patterns = stimulus_patterns(c);
  const auto inputs = cell_inputs(c);
  const auto outputs = cell_outputs(c);
  const size_t n = patterns.size();

  Stimulus st;
  st.plan.vdd = vdd;
  st.plan.period = period;
  st.plan.rise = rise;
  st.plan.input_nodes = inputs;
  st.plan.output_nodes = outputs;

  // One PWL source per input, two full periods of the walk.
  for (size_t j = 0; j < inputs.size(); ++j) {
    DeviceInstance src;
    src.kind = DeviceKind::Vsource;
    src.name = "v" + inputs[j];
    src.nodes = {inputs[j], "0"};
    src.source.kind = SourceSpec::Kind::Pwl;
    auto& pwl = src.source.pwl;
    double prev = patterns[0][j] ? vdd : 0.0;
    pwl.times.push_back(0.0);
    pwl.values.push_back(prev);
    for (size_t k = 1; k < 2 * n; ++k) {
      const double next = patterns[k % n][j] ? vdd : 0.0;
      if (next != prev) {
        const double t = k * period;
        pwl.times.push_back(t);
        pwl.values.push_back(prev);
        pwl.times.push_back(t + rise);
        pwl.values.push_back(next);
        prev = next;
      }
    }
    st.sources.push_back(std::move(src));
  }

  // Measurement intervals cover the second period (the first period is
  // start-up).
  const double t_base = n * period;
  for (size_t k = 0; k < n; ++k) {
    PatternInterval iv;
    iv.t0 = t_base + k * period;
    iv.t1 = t_base + (k + 1) * period;
    const auto bits = patterns[k];
    const auto out_bits = oracle(bits, c);
    for (size_t j = 0; j < inputs.size(); ++j) iv.inputs[inputs[j]] = bits[j];
    for (size_t j = 0; j < outputs.size(); ++j)
      iv.expected[outputs[j]] = out_bits[j];
    st.plan.schedule.push_back(std::move(iv));
  }
  return st;
}

Netlist build_testbench(const CellSpec& spec, double period, double rise) {
  Netlist n = build_cell(spec);
  Stimulus st = standard_stimulus(spec.name, spec.vdd, period, rise);
  for (auto& src : st.sources) n.devices.push_back(std::move(src));
  return n;
}

CellRun run_cell(const CellSpec& spec, double period, double rise,
                 double voh_frac, double vol_frac, const SimConfig& base) {
  CellRun run;
  run.netlist = build_cell(spec);
  Stimulus st = standard_stimulus(spec.name, spec.vdd, period, rise);
  for (auto& src : st.sources) run.netlist.devices.push_back(std::move(src));
  run.plan = std::move(st.plan);

  SimConfig cfg = base;
  cfg.tstep = period / 200.0;
  cfg.tstop = 2.0 * stimulus_patterns(spec.name).size() * period;
  run.waveform = transient(run.netlist, cfg);
  run.report = measure_waveform(run.waveform, run.plan, {"vdd"}, voh_frac,
                                vol_frac);
  run.report.cell = to_string(spec.name);
  run.report.card = spec.card;
  return run;
}

}  // namespace picospice
