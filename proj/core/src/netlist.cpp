#include "picospice/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <queue>
#include <sstream>

namespace picospice {

double SourceSpec::value_at(double t) const {
  switch (kind) {
    case Kind::Dc:
      return dc;
    case Kind::Pulse: {
      const PulseSpec& p = pulse;
      double tr = t - p.delay;
      if (tr < 0.0) return p.v1;
      if (p.period > 0.0) tr = std::fmod(tr, p.period);
      if (tr < p.rise)
        return p.v1 + (p.v2 - p.v1) * (tr / p.rise);
      if (tr < p.rise + p.width) return p.v2;
      if (tr < p.rise + p.width + p.fall)
        return p.v2 + (p.v1 - p.v2) * ((tr - p.rise - p.width) / p.fall);
      return p.v1;
    }
    case Kind::Pwl: {
      const auto& ts = pwl.times;
      const auto& vs = pwl.values;
      if (ts.empty()) return 0.0;
      if (t <= ts.front()) return vs.front();
      if (t >= ts.back()) return vs.back();
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      size_t hi = static_cast<size_t>(it - ts.begin());
      size_t lo = hi - 1;
      double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
      return vs[lo] + f * (vs[hi] - vs[lo]);
    }
  }
  return 0.0;
}

std::vector<double> SourceSpec::breakpoints(double tstop) const {
  std::vector<double> out;
  auto add = [&](double t) {
    if (t > 0.0 && t <= tstop) out.push_back(t);
  };
  if (kind == Kind::Pulse) {
    const PulseSpec& p = pulse;
    double base = p.delay;
    do {
      add(base);
      add(base + p.rise);
      add(base + p.rise + p.width);
      add(base + p.rise + p.width + p.fall);
      base += p.period;
    } while (p.period > 0.0 && base <= tstop);
  } else if (kind == Kind::Pwl) {
    for (double t : pwl.times) add(t);
  }
  return out;
}

std::set<std::string> Netlist::nodes() const {
  std::set<std::string> out;
  for (const auto& d : devices)
    for (const auto& n : d.nodes) out.insert(n);
  return out;
}

const DeviceInstance* Netlist::find_device(std::string_view name) const {
  for (const auto& d : devices)
    if (d.name == name) return &d;
  return nullptr;
}

// ---------------------------------------------------------------------------
// number handling

double parse_spice_number(std::string_view token) {
  std::string s(token);
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw std::invalid_argument("not a number: " + s);
  std::string rest;
  for (const char* p = end; *p; ++p)
    rest.push_back(static_cast<char>(std::tolower(*p)));
  if (rest.empty()) return v;
  // "meg" must be matched before the single-letter "m" (milli).
  if (rest.rfind("meg", 0) == 0) return v * 1e6;
  switch (rest[0]) {
    case 'f': return v * 1e-15;
    case 'p': return v * 1e-12;
    case 'n': return v * 1e-9;
    case 'u': return v * 1e-6;
    case 'm': return v * 1e-3;
    case 'k': return v * 1e3;
    default:
      break;
  }
  if (std::isalpha(static_cast<unsigned char>(rest[0])))
    return v;  // bare unit letters (e.g. "10pF" handled above, "3V" here)
  throw std::invalid_argument("malformed number: " + s);
}

std::string format_spice_number(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// parser

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string canon_node(std::string_view raw) {
  std::string n = lower(raw);
  if (n == "gnd") return "0";
  return n;
}

struct LogicalLine {
  int line = 0;  // first physical line number
  std::vector<std::string> tokens;
};

// Split into logical lines: '*' comments dropped, '+' lines joined,
// '(', ')', ',' and '=' treated as separators ('=' is kept as a token).
std::vector<LogicalLine> lex(std::string_view text) {
  std::vector<LogicalLine> lines;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string phys;
  while (std::getline(in, phys)) {
    ++lineno;
    if (!phys.empty() && phys.back() == '\r') phys.pop_back();
    std::string tokenized;
    for (char c : phys) {
      if (c == '(' || c == ')' || c == ',')
        tokenized += ' ';
      else if (c == '=') {
        tokenized += " = ";
      } else
        tokenized += c;
    }
    std::istringstream ls(tokenized);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks[0][0] == '*') continue;
    if (toks[0] == "+") {
      toks.erase(toks.begin());
      if (lines.empty()) throw ParseError(lineno, "continuation without a previous line");
      for (auto& tok : toks) lines.back().tokens.push_back(tok);
      continue;
    }
    if (toks[0][0] == '+') {
      toks[0].erase(toks[0].begin());
      if (lines.empty()) throw ParseError(lineno, "continuation without a previous line");
      for (auto& tok : toks) lines.back().tokens.push_back(tok);
      continue;
    }
    lines.push_back({lineno, std::move(toks)});
  }
  return lines;
}

struct ModelParamRef {
  double MosModel::*field;
};

const std::map<std::string, double MosModel::*>& model_params() {
  static const std::map<std::string, double MosModel::*> params = {
      {"vt0", &MosModel::vt0},       {"gamma", &MosModel::gamma},
      {"phi0", &MosModel::phi0},     {"tox", &MosModel::tox},
      {"alphal", &MosModel::alpha_l}, {"alphav", &MosModel::alpha_v},
      {"alphaw", &MosModel::alpha_w}, {"kp", &MosModel::kprime},
      {"lambda", &MosModel::lambda}, {"nb", &MosModel::nb},
      {"cox", &MosModel::cox_area},  {"cj", &MosModel::cj},
  };
  return params;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lines_(lex(text)) {}

  Netlist run() {
    if (lines_.empty()) throw ParseError(1, "empty netlist");
    // The first logical line is always the title, even if it looks like a
    // device card.
    Netlist n;
    n.title = join(lines_[0].tokens);
    bool ended = false;
    SubcktDef* open_subckt = nullptr;
    std::set<std::string> device_names;

    for (size_t li = 1; li < lines_.size(); ++li) {
      const LogicalLine& L = lines_[li];
      const std::string head = lower(L.tokens[0]);
      if (ended)
        throw ParseError(L.line, "content after .end");
      if (head == ".end") {
        if (open_subckt)
          throw ParseError(L.line, "unterminated .subckt " + open_subckt->name);
        ended = true;
        continue;
      }
      if (head == ".ends") {
        if (!open_subckt) throw ParseError(L.line, ".ends without .subckt");
        if (L.tokens.size() > 1 && lower(L.tokens[1]) != open_subckt->name)
          throw ParseError(L.line, ".ends name mismatch");
        open_subckt = nullptr;
        continue;
      }
      if (head == ".subckt") {
        if (open_subckt)
          throw ParseError(L.line, "nested .subckt definitions not supported");
        if (L.tokens.size() < 2) throw ParseError(L.line, ".subckt needs a name");
        SubcktDef def;
        def.name = lower(L.tokens[1]);
        for (size_t i = 2; i < L.tokens.size(); ++i)
          def.ports.push_back(canon_node(L.tokens[i]));
        if (n.subcircuits.count(def.name))
          throw ParseError(L.line, "duplicate subcircuit " + def.name);
        open_subckt = &(n.subcircuits[def.name] = def);
        continue;
      }
      if (head == ".model") {
        parse_model(n, L);
        continue;
      }
      if (head == ".global") {
        for (size_t i = 1; i < L.tokens.size(); ++i)
          n.globals.insert(canon_node(L.tokens[i]));
        continue;
      }
      if (head[0] == '.')
        throw ParseError(L.line, "unknown directive " + L.tokens[0]);

      DeviceInstance dev = parse_device(L);
      auto& names = open_subckt ? subckt_names_[open_subckt->name] : device_names;
      if (!names.insert(dev.name).second)
        throw ParseError(L.line, "duplicate device name " + dev.name);
      (open_subckt ? open_subckt->devices : n.devices).push_back(std::move(dev));
    }
    if (!ended) throw ParseError(last_line(), "missing .end");

    resolve_models(n);
    return n;
  }

 private:
  std::vector<LogicalLine> lines_;
  std::map<std::string, std::set<std::string>> subckt_names_;
  std::vector<std::pair<int, const DeviceInstance*>> mosfets_;  // for model checks

  int last_line() const { return lines_.empty() ? 1 : lines_.back().line; }

  static std::string join(const std::vector<std::string>& toks) {
    std::string s;
    for (const auto& t : toks) {
      if (!s.empty()) s += ' ';
      s += t;
    }
    return s;
  }

  double number(const LogicalLine& L, const std::string& tok) {
    try {
      return parse_spice_number(tok);
    } catch (const std::invalid_argument& e) {
      throw ParseError(L.line, e.what());
    }
  }

  void parse_model(Netlist& n, const LogicalLine& L) {
    if (L.tokens.size() < 3)
      throw ParseError(L.line, ".model needs a name and a type");
    const std::string name = lower(L.tokens[1]);
    const std::string type = lower(L.tokens[2]);
    MosModel m;
    if (type == "nmos")
      m = generic035(MosPolarity::Nmos);
    else if (type == "pmos")
      m = generic035(MosPolarity::Pmos);
    else
      throw ParseError(L.line, "unknown model type " + type);
    // name = value pairs
    size_t i = 3;
    while (i < L.tokens.size()) {
      const std::string key = lower(L.tokens[i]);
      if (i + 2 >= L.tokens.size() || L.tokens[i + 1] != "=")
        throw ParseError(L.line, "expected " + key + "=<value>");
      if (key == "bodyfx") {
        // 1 = conventional body effect, 0 = full-sqrt form.
        m.conventional_body_effect = number(L, L.tokens[i + 2]) != 0.0;
        i += 3;
        continue;
      }
      auto it = model_params().find(key);
      if (it == model_params().end())
        throw ParseError(L.line, "unknown model parameter " + key);
      m.*(it->second) = number(L, L.tokens[i + 2]);
      i += 3;
    }
    if (n.models.count(name))
      throw ParseError(L.line, "duplicate model " + name);
    n.models[name] = m;
  }

  DeviceInstance parse_device(const LogicalLine& L) {
    const std::string name = lower(L.tokens[0]);
    const char c = name[0];
    DeviceInstance d;
    d.name = name;
    switch (c) {
      case 'm': return parse_mosfet(L, std::move(d));
      case 'c': return parse_two_terminal(L, std::move(d), DeviceKind::Capacitor);
      case 'r': return parse_two_terminal(L, std::move(d), DeviceKind::Resistor);
      case 'v': return parse_vsource(L, std::move(d));
      case 'x': return parse_subckt_call(L, std::move(d));
      default:
        throw ParseError(L.line, "unknown device card " + L.tokens[0]);
    }
  }

  DeviceInstance parse_mosfet(const LogicalLine& L, DeviceInstance d) {
    if (L.tokens.size() < 6)
      throw ParseError(L.line, "MOSFET card needs d g s b and a model");
    d.kind = DeviceKind::Mosfet;
    for (int i = 1; i <= 4; ++i) d.nodes.push_back(canon_node(L.tokens[i]));
    d.model = lower(L.tokens[5]);
    size_t i = 6;
    while (i < L.tokens.size()) {
      const std::string key = lower(L.tokens[i]);
      if (i + 2 >= L.tokens.size() || L.tokens[i + 1] != "=")
        throw ParseError(L.line, "expected " + key + "=<value> on MOSFET card");
      const double v = number(L, L.tokens[i + 2]);
      if (key == "w")
        d.w = v;
      else if (key == "l")
        d.l = v;
      else
        throw ParseError(L.line, "unknown MOSFET parameter " + key);
      i += 3;
    }
    if (!(d.w > 0.0) || !(d.l > 0.0))
      throw ParseError(L.line, "MOSFET needs positive W and L");
    return d;
  }

  DeviceInstance parse_two_terminal(const LogicalLine& L, DeviceInstance d,
                                    DeviceKind kind) {
    if (L.tokens.size() != 4)
      throw ParseError(L.line, "expected <name> <n1> <n2> <value>");
    d.kind = kind;
    d.nodes = {canon_node(L.tokens[1]), canon_node(L.tokens[2])};
    d.value = number(L, L.tokens[3]);
    if (kind == DeviceKind::Capacitor && d.value < 0.0)
      throw ParseError(L.line, "capacitance must be >= 0");
    if (kind == DeviceKind::Resistor && !(d.value > 0.0))
      throw ParseError(L.line, "resistance must be positive");
    return d;
  }

  DeviceInstance parse_vsource(const LogicalLine& L, DeviceInstance d) {
    if (L.tokens.size() < 4)
      throw ParseError(L.line, "voltage source needs two nodes and a value");
    d.kind = DeviceKind::Vsource;
    d.nodes = {canon_node(L.tokens[1]), canon_node(L.tokens[2])};
    const std::string w = lower(L.tokens[3]);
    if (w == "pulse") {
      if (L.tokens.size() != 4 + 7)
        throw ParseError(L.line, "PULSE needs v1 v2 delay rise fall width period");
      d.source.kind = SourceSpec::Kind::Pulse;
      PulseSpec& p = d.source.pulse;
      p.v1 = number(L, L.tokens[4]);
      p.v2 = number(L, L.tokens[5]);
      p.delay = number(L, L.tokens[6]);
      p.rise = number(L, L.tokens[7]);
      p.fall = number(L, L.tokens[8]);
      p.width = number(L, L.tokens[9]);
      p.period = number(L, L.tokens[10]);
      if (!(p.rise > 0.0) || !(p.fall > 0.0))
        throw ParseError(L.line, "PULSE rise and fall must be positive");
      if (p.delay < 0.0 || p.width < 0.0 || p.period < 0.0)
        throw ParseError(L.line, "PULSE times must be non-negative");
    } else if (w == "pwl") {
      const size_t nvals = L.tokens.size() - 4;
      if (nvals < 2 || nvals % 2 != 0)
        throw ParseError(L.line, "PWL needs time/value pairs");
      d.source.kind = SourceSpec::Kind::Pwl;
      for (size_t i = 4; i < L.tokens.size(); i += 2) {
        const double t = number(L, L.tokens[i]);
        const double v = number(L, L.tokens[i + 1]);
        if (!d.source.pwl.times.empty() && t <= d.source.pwl.times.back())
          throw ParseError(L.line, "PWL times must be strictly increasing");
        d.source.pwl.times.push_back(t);
        d.source.pwl.values.push_back(v);
      }
    } else {
      size_t vi = 3;
      if (w == "dc") {
        if (L.tokens.size() != 5) throw ParseError(L.line, "DC needs one value");
        vi = 4;
      } else if (L.tokens.size() != 4) {
        throw ParseError(L.line, "unexpected tokens on source card");
      }
      d.source.kind = SourceSpec::Kind::Dc;
      d.source.dc = number(L, L.tokens[vi]);
    }
    return d;
  }

  DeviceInstance parse_subckt_call(const LogicalLine& L, DeviceInstance d) {
    if (L.tokens.size() < 3)
      throw ParseError(L.line, "subcircuit call needs nodes and a name");
    d.kind = DeviceKind::SubcktCall;
    for (size_t i = 1; i + 1 < L.tokens.size(); ++i)
      d.nodes.push_back(canon_node(L.tokens[i]));
    d.subckt = lower(L.tokens.back());
    return d;
  }

  void resolve_models(Netlist& n) {
    auto check = [&](const std::vector<DeviceInstance>& devs) {
      for (const auto& d : devs) {
        if (d.kind == DeviceKind::Mosfet && !n.models.count(d.model))
          throw ParseError(last_line(),
                           "undefined model " + d.model + " on device " + d.name);
        if (d.kind == DeviceKind::SubcktCall && !n.subcircuits.count(d.subckt))
          throw ParseError(last_line(), "undefined subcircuit " + d.subckt);
      }
    };
    check(n.devices);
    for (const auto& [name, def] : n.subcircuits) check(def.devices);
  }
};

}  // namespace

Netlist parse_netlist(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// flattening

namespace {

void expand_into(const Netlist& n, const SubcktDef& def,
                 const std::string& prefix,
                 const std::map<std::string, std::string>& port_map,
                 std::vector<DeviceInstance>& out,
                 std::vector<std::string>& stack) {
  if (std::find(stack.begin(), stack.end(), def.name) != stack.end())
    throw FlattenError("recursive subcircuit " + def.name);
  stack.push_back(def.name);

  auto map_node = [&](const std::string& node) -> std::string {
    if (node == "0" || n.globals.count(node)) return node;
    auto it = port_map.find(node);
    if (it != port_map.end()) return it->second;
    return prefix + node;
  };

  for (const DeviceInstance& d : def.devices) {
    if (d.kind == DeviceKind::SubcktCall) {
      auto sub = n.subcircuits.find(d.subckt);
      if (sub == n.subcircuits.end())
        throw FlattenError("undefined subcircuit " + d.subckt);
      if (sub->second.ports.size() != d.nodes.size())
        throw FlattenError("subcircuit " + d.subckt + " called with " +
                           std::to_string(d.nodes.size()) + " nodes, expects " +
                           std::to_string(sub->second.ports.size()));
      std::map<std::string, std::string> inner_map;
      for (size_t i = 0; i < d.nodes.size(); ++i)
        inner_map[sub->second.ports[i]] = map_node(d.nodes[i]);
      expand_into(n, sub->second, prefix + d.name + ".", inner_map, out, stack);
      continue;
    }
    DeviceInstance copy = d;
    copy.name = prefix + d.name;
    for (auto& node : copy.nodes) node = map_node(node);
    out.push_back(std::move(copy));
  }
  stack.pop_back();
}

}  // namespace

Netlist flatten(const Netlist& n) {
  Netlist out;
  out.title = n.title;
  out.models = n.models;
  out.globals = n.globals;
  std::vector<std::string> stack;
  for (const DeviceInstance& d : n.devices) {
    if (d.kind != DeviceKind::SubcktCall) {
      out.devices.push_back(d);
      continue;
    }
    auto sub = n.subcircuits.find(d.subckt);
    if (sub == n.subcircuits.end())
      throw FlattenError("undefined subcircuit " + d.subckt);
    if (sub->second.ports.size() != d.nodes.size())
      throw FlattenError("subcircuit " + d.subckt + " called with " +
                         std::to_string(d.nodes.size()) + " nodes, expects " +
                         std::to_string(sub->second.ports.size()));
    std::map<std::string, std::string> port_map;
    for (size_t i = 0; i < d.nodes.size(); ++i)
      port_map[sub->second.ports[i]] = d.nodes[i];
    expand_into(n, sub->second, d.name + ".", port_map, out.devices, stack);
  }
  return out;
}

// ---------------------------------------------------------------------------
// validation

std::vector<Diagnostic> validate(const Netlist& n) {
  std::vector<Diagnostic> diags;
  for (const auto& d : n.devices) {
    if (d.kind == DeviceKind::SubcktCall) {
      diags.push_back({Diagnostic::Code::UnflattenedSubckt, d.name,
                       "subcircuit call " + d.name + " not flattened"});
    }
    if (d.kind == DeviceKind::Mosfet && (!(d.w > 0.0) || !(d.l > 0.0)))
      diags.push_back({Diagnostic::Code::ZeroGeometry, d.name,
                       "device " + d.name + " has non-positive W or L"});
  }

  // Terminal touch counts and gate-only detection.
  std::map<std::string, int> touches;
  std::map<std::string, int> gate_touches;
  for (const auto& d : n.devices)
    for (size_t t = 0; t < d.nodes.size(); ++t) {
      touches[d.nodes[t]]++;
      if (d.kind == DeviceKind::Mosfet && t == 1) gate_touches[d.nodes[t]]++;
    }

  // DC connectivity: edges through sources, resistors and MOSFET channels.
  std::map<std::string, std::vector<std::string>> adj;
  auto edge = [&](const std::string& a, const std::string& b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (const auto& d : n.devices) {
    if (d.kind == DeviceKind::Vsource || d.kind == DeviceKind::Resistor)
      edge(d.nodes[0], d.nodes[1]);
    else if (d.kind == DeviceKind::Mosfet)
      edge(d.nodes[0], d.nodes[2]);  // drain-source channel
  }
  std::set<std::string> reached;
  std::queue<std::string> q;
  q.push("0");
  reached.insert("0");
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop();
    for (const auto& nb : adj[cur])
      if (reached.insert(nb).second) q.push(nb);
  }

  for (const auto& node : n.nodes()) {
    if (node == "0") continue;
    const bool gate_only = gate_touches.count(node) &&
                           gate_touches[node] == touches[node];
    if (gate_only) {
      diags.push_back({Diagnostic::Code::UndrivenGate, node,
                       "gate node " + node + " is driven by nothing"});
      continue;
    }
    if (!reached.count(node)) {
      diags.push_back({Diagnostic::Code::FloatingNode, node,
                       "node " + node + " has no DC path to ground"});
      continue;
    }
    if (touches[node] == 1)
      diags.push_back({Diagnostic::Code::SingleTerminalNode, node,
                       "node " + node + " is touched by a single terminal"});
  }
  return diags;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

const char* model_type(MosPolarity p) {
  return p == MosPolarity::Nmos ? "nmos" : "pmos";
}

void write_model(std::string& out, const std::string& name, const MosModel& m) {
  // Emit every card-settable parameter explicitly so the round trip does
  // not depend on the bundled defaults.
  out += ".model " + name + " " + model_type(m.polarity);
  auto p = [&](const char* key, double v) {
    out += std::string(" ") + key + "=" + format_spice_number(v);
  };
  p("bodyfx", m.conventional_body_effect ? 1.0 : 0.0);
  p("vt0", m.vt0);
  p("gamma", m.gamma);
  p("phi0", m.phi0);
  p("tox", m.tox);
  p("alphal", m.alpha_l);
  p("alphav", m.alpha_v);
  p("alphaw", m.alpha_w);
  p("kp", m.kprime);
  p("lambda", m.lambda);
  p("nb", m.nb);
  p("cox", m.cox_area);
  p("cj", m.cj);
  out += "\n";
}

void write_device(std::string& out, const DeviceInstance& d) {
  auto num = format_spice_number;
  switch (d.kind) {
    case DeviceKind::Mosfet:
      out += d.name + " " + d.nodes[0] + " " + d.nodes[1] + " " + d.nodes[2] +
             " " + d.nodes[3] + " " + d.model + " w=" + num(d.w) +
             " l=" + num(d.l) + "\n";
      break;
    case DeviceKind::Capacitor:
    case DeviceKind::Resistor:
      out += d.name + " " + d.nodes[0] + " " + d.nodes[1] + " " + num(d.value) +
             "\n";
      break;
    case DeviceKind::Vsource: {
      out += d.name + " " + d.nodes[0] + " " + d.nodes[1];
      const SourceSpec& s = d.source;
      if (s.kind == SourceSpec::Kind::Dc) {
        out += " dc " + num(s.dc);
      } else if (s.kind == SourceSpec::Kind::Pulse) {
        const PulseSpec& p = s.pulse;
        out += " pulse(" + num(p.v1) + " " + num(p.v2) + " " + num(p.delay) +
               " " + num(p.rise) + " " + num(p.fall) + " " + num(p.width) +
               " " + num(p.period) + ")";
      } else {
        out += " pwl(";
        for (size_t i = 0; i < s.pwl.times.size(); ++i) {
          if (i) out += " ";
          out += num(s.pwl.times[i]) + " " + num(s.pwl.values[i]);
        }
        out += ")";
      }
      out += "\n";
      break;
    }
    case DeviceKind::SubcktCall: {
      out += d.name;
      for (const auto& node : d.nodes) out += " " + node;
      out += " " + d.subckt + "\n";
      break;
    }
  }
}

}  // namespace

std::string serialize(const Netlist& n) {
  std::string out = n.title + "\n";
  if (!n.globals.empty()) {
    out += ".global";
    for (const auto& g : n.globals) out += " " + g;
    out += "\n";
  }
  for (const auto& [name, m] : n.models) write_model(out, name, m);
  for (const auto& [name, def] : n.subcircuits) {
    out += ".subckt " + name;
    for (const auto& p : def.ports) out += " " + p;
    out += "\n";
    for (const auto& d : def.devices) write_device(out, d);
    out += ".ends " + name + "\n";
  }
  for (const auto& d : n.devices) write_device(out, d);
  out += ".end\n";
  return out;
}

}  // namespace picospice
