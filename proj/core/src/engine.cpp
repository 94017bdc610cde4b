#include "picospice/engine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace picospice {

int Waveform::node_index(std::string_view name) const {
  for (size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k] == name) return static_cast<int>(k);
  return -1;
}

int Waveform::source_index(std::string_view name) const {
  for (size_t k = 0; k < sources.size(); ++k)
    if (sources[k] == name) return static_cast<int>(k);
  return -1;
}

static double interp(const std::vector<double>& ts,
                     const std::vector<double>& vs, double t) {
  if (ts.empty()) return 0.0;
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t hi = static_cast<size_t>(it - ts.begin());
  size_t lo = hi - 1;
  if (ts[hi] == ts[lo]) return vs[hi];
  double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return vs[lo] + f * (vs[hi] - vs[lo]);
}

double Waveform::value(std::string_view node, double t) const {
  if (node == "0" || node == "gnd") return 0.0;
  int k = node_index(node);
  if (k < 0) throw std::invalid_argument("unknown node " + std::string(node));
  return interp(times, v[k], t);
}

double Waveform::current(std::string_view source, double t) const {
  int k = source_index(source);
  if (k < 0)
    throw std::invalid_argument("unknown source " + std::string(source));
  return interp(times, i[k], t);
}

std::string Waveform::to_csv() const {
  std::string out = "time";
  for (const auto& n : nodes) out += "," + n;
  for (const auto& s : sources) out += ",i(" + s + ")";
  out += "\n";
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    out += buf;
  };
  for (size_t k = 0; k < times.size(); ++k) {
    put(times[k]);
    for (const auto& series : v) {
      out += ",";
      put(series[k]);
    }
    for (const auto& series : i) {
      out += ",";
      put(series[k]);
    }
    out += "\n";
  }
  return out;
}

std::vector<double> supply_current(const Waveform& w,
                                   std::string_view source) {
  int k = w.source_index(source);
  if (k < 0)
    throw std::invalid_argument("unknown source " + std::string(source));
  return w.i[k];
}

// ---------------------------------------------------------------------------
// MNA assembly

namespace {

struct MosElem {
  const DeviceInstance* dev;
  const MosModel* model;
  Geometry geom;
  int nd, ng, ns, nb;
};

struct TwoTerm {
  int n1, n2;
  double value;  // conductance (resistor) or capacitance (cap)
};

struct SrcElem {
  const DeviceInstance* dev;
  int np, nn;
  int branch;  // row/column index of the branch current unknown
};

struct CapState {
  double v_prev = 0.0;  // terminal voltage difference at last accepted step
  double i_prev = 0.0;  // capacitor current at last accepted step
};

class Mna {
 public:
  Mna(const Netlist& n, const SimConfig& cfg) : netlist_(n), cfg_(cfg) {
    for (const auto& d : n.devices) {
      if (d.kind == DeviceKind::SubcktCall)
        throw std::invalid_argument(
            "netlist must be flattened before simulation (subcircuit call " +
            d.name + ")");
      for (const auto& node : d.nodes) index_of(node);
    }
    for (const auto& d : n.devices) {
      switch (d.kind) {
        case DeviceKind::Mosfet: {
          auto model = n.models.find(d.model);
          if (model == n.models.end())
            throw std::invalid_argument("undefined model " + d.model);
          MosElem m{&d, &model->second, {d.w, d.l}, index_of(d.nodes[0]),
                    index_of(d.nodes[1]), index_of(d.nodes[2]),
                    index_of(d.nodes[3])};
          mosfets_.push_back(m);
          // Lumped device capacitances become fixed capacitors.
          DeviceCaps dc = device_capacitances(model->second, m.geom);
          if (dc.cgs > 0) caps_.push_back({m.ng, m.ns, dc.cgs});
          if (dc.cgd > 0) caps_.push_back({m.ng, m.nd, dc.cgd});
          if (dc.cdb > 0) caps_.push_back({m.nd, m.nb, dc.cdb});
          if (dc.csb > 0) caps_.push_back({m.ns, m.nb, dc.csb});
          break;
        }
        case DeviceKind::Capacitor:
          caps_.push_back({index_of(d.nodes[0]), index_of(d.nodes[1]), d.value});
          break;
        case DeviceKind::Resistor:
          resistors_.push_back(
              {index_of(d.nodes[0]), index_of(d.nodes[1]), 1.0 / d.value});
          break;
        case DeviceKind::Vsource: {
          SrcElem s{&d, index_of(d.nodes[0]), index_of(d.nodes[1]),
                    num_nodes() + static_cast<int>(sources_.size())};
          sources_.push_back(s);
          break;
        }
        case DeviceKind::SubcktCall:
          break;
      }
    }
    // cmin from every node to ground.
    if (cfg.cmin > 0.0)
      for (int k = 0; k < num_nodes(); ++k) caps_.push_back({k, -1, cfg.cmin});
    cap_states_.resize(caps_.size());
  }

  int num_nodes() const { return static_cast<int>(node_names_.size()); }
  int size() const { return num_nodes() + static_cast<int>(sources_.size()); }
  const std::vector<std::string>& node_names() const { return node_names_; }
  const std::vector<SrcElem>& sources() const { return sources_; }
  const std::vector<CapState>& cap_states() const { return cap_states_; }

  // Companion parameters for the current step; geq = 0 disables caps (DC).
  void set_dc_mode() { geq_factor_ = 0.0; }
  void set_step(double h, bool backward_euler) {
    h_ = h;
    be_ = backward_euler;
    geq_factor_ = (be_ ? 1.0 : 2.0) / h;
  }

  void accept_step(const Eigen::VectorXd& x) {
    for (size_t k = 0; k < caps_.size(); ++k) {
      const double vdiff = volt(x, caps_[k].n1) - volt(x, caps_[k].n2);
      const double geq = geq_factor_ * caps_[k].value;
      const double ieq = be_ ? geq * cap_states_[k].v_prev
                             : geq * cap_states_[k].v_prev + cap_states_[k].i_prev;
      cap_states_[k].i_prev = geq * vdiff - ieq;
      cap_states_[k].v_prev = vdiff;
    }
  }

  void init_cap_states(const Eigen::VectorXd& x) {
    for (size_t k = 0; k < caps_.size(); ++k) {
      cap_states_[k].v_prev = volt(x, caps_[k].n1) - volt(x, caps_[k].n2);
      cap_states_[k].i_prev = 0.0;  // steady state at t = 0
    }
  }

  static double volt(const Eigen::VectorXd& x, int node) {
    return node < 0 ? 0.0 : x[node];
  }

  // Residual f (currents leaving each node; branch voltage equations) and
  // Jacobian J at x. imax collects the largest single contribution per
  // node for the relative convergence test.
  void assemble(const Eigen::VectorXd& x, double t, double scale, double gmin,
                Eigen::MatrixXd& J, Eigen::VectorXd& f,
                Eigen::VectorXd& imax) const {
    const int N = size();
    J.setZero(N, N);
    f.setZero(N);
    imax.setZero(N);

    auto add_f = [&](int node, double current) {
      if (node < 0) return;
      f[node] += current;
      imax[node] = std::max(imax[node], std::abs(current));
    };
    auto add_j = [&](int row, int col, double g) {
      if (row < 0 || col < 0) return;
      J(row, col) += g;
    };

    for (int k = 0; k < num_nodes(); ++k) {
      add_f(k, gmin * x[k]);
      add_j(k, k, gmin);
    }

    for (const auto& r : resistors_) {
      const double i = r.value * (volt(x, r.n1) - volt(x, r.n2));
      add_f(r.n1, i);
      add_f(r.n2, -i);
      add_j(r.n1, r.n1, r.value);
      add_j(r.n2, r.n2, r.value);
      add_j(r.n1, r.n2, -r.value);
      add_j(r.n2, r.n1, -r.value);
    }

    if (geq_factor_ > 0.0) {
      for (size_t k = 0; k < caps_.size(); ++k) {
        const auto& c = caps_[k];
        const double geq = geq_factor_ * c.value;
        const double ieq = be_ ? geq * cap_states_[k].v_prev
                               : geq * cap_states_[k].v_prev +
                                     cap_states_[k].i_prev;
        const double i = geq * (volt(x, c.n1) - volt(x, c.n2)) - ieq;
        add_f(c.n1, i);
        add_f(c.n2, -i);
        add_j(c.n1, c.n1, geq);
        add_j(c.n2, c.n2, geq);
        add_j(c.n1, c.n2, -geq);
        add_j(c.n2, c.n1, -geq);
      }
    }

    for (const auto& m : mosfets_) {
      const MosTerminalEval e = evaluate_terminals(
          *m.model, m.geom, volt(x, m.nd), volt(x, m.ng), volt(x, m.ns),
          volt(x, m.nb));
      add_f(m.nd, e.id);
      add_f(m.ns, -e.id);
      add_j(m.nd, m.nd, e.g_vd);
      add_j(m.nd, m.ng, e.g_vg);
      add_j(m.nd, m.ns, e.g_vs);
      add_j(m.nd, m.nb, e.g_vb);
      add_j(m.ns, m.nd, -e.g_vd);
      add_j(m.ns, m.ng, -e.g_vg);
      add_j(m.ns, m.ns, -e.g_vs);
      add_j(m.ns, m.nb, -e.g_vb);
    }

    for (const auto& s : sources_) {
      // Branch current is defined as delivered into n+.
      const double ib = x[s.branch];
      add_f(s.np, -ib);
      add_f(s.nn, ib);
      add_j(s.np, s.branch, -1.0);
      add_j(s.nn, s.branch, 1.0);
      const double vset = scale * s.dev->source.value_at(t);
      f[s.branch] = (volt(x, s.np) - volt(x, s.nn)) - vset;
      add_j(s.branch, s.np, 1.0);
      add_j(s.branch, s.nn, -1.0);
    }
  }

  struct NewtonResult {
    bool converged = false;
    double worst_residual = 0.0;
    int worst_node = -1;
  };

  NewtonResult newton(Eigen::VectorXd& x, double t, double scale,
                      double gmin) const {
    const int N = size();
    Eigen::MatrixXd J(N, N);
    Eigen::VectorXd f(N), imax(N);
    NewtonResult res;
    bool dv_small = false;
    for (int iter = 0; iter < cfg_.max_newton; ++iter) {
      assemble(x, t, scale, gmin, J, f, imax);
      double worst = 0.0;
      int worst_node = -1;
      bool residual_ok = true;
      for (int k = 0; k < num_nodes(); ++k) {
        const double bound = cfg_.abstol + cfg_.reltol * imax[k];
        const double r = std::abs(f[k]);
        if (r > bound) residual_ok = false;
        if (r > worst) {
          worst = r;
          worst_node = k;
        }
      }
      for (int k = num_nodes(); k < N; ++k)
        if (std::abs(f[k]) > cfg_.vntol) residual_ok = false;
      res.worst_residual = worst;
      res.worst_node = worst_node;
      if (residual_ok && dv_small && iter > 0) {
        res.converged = true;
        return res;
      }

      Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
      Eigen::VectorXd dx = lu.solve(-f);
      if (!dx.allFinite()) return res;  // singular system

      // Voltage damping: at most 0.3 V per node per iteration.
      for (int k = 0; k < num_nodes(); ++k)
        dx[k] = std::clamp(dx[k], -0.3, 0.3);

      dv_small = true;
      for (int k = 0; k < num_nodes(); ++k) {
        const double lim = cfg_.vntol + cfg_.reltol * std::abs(x[k] + dx[k]);
        if (std::abs(dx[k]) > lim) dv_small = false;
      }
      x += dx;
    }
    return res;
  }

  // DC solve with the configured homotopy strategy.
  Eigen::VectorXd solve_dc(double t, double scale) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
    auto plain = [&](Eigen::VectorXd& guess) {
      return newton(guess, t, scale, cfg_.gmin);
    };

    if (cfg_.homotopy == SimConfig::Homotopy::Auto ||
        cfg_.homotopy == SimConfig::Homotopy::NewtonOnly) {
      Eigen::VectorXd guess = x;
      NewtonResult r = plain(guess);
      if (r.converged) return guess;
      if (cfg_.homotopy == SimConfig::Homotopy::NewtonOnly)
        throw ConvergenceError(
            "Newton failed to converge (worst node " + node_label(r.worst_node) +
                ", residual " + std::to_string(r.worst_residual) + " A)",
            node_label(r.worst_node), r.worst_residual);
    }

    if (cfg_.homotopy != SimConfig::Homotopy::ForceSource) {
      // gmin stepping: start 1e6 times stiffer, decay decade-wise.
      Eigen::VectorXd guess = Eigen::VectorXd::Zero(size());
      bool ok = true;
      for (int decade = 6; decade >= 0; --decade) {
        NewtonResult r = newton(guess, t, scale,
                                cfg_.gmin * std::pow(10.0, decade));
        if (!r.converged) {
          ok = false;
          break;
        }
      }
      if (ok) return guess;
      if (cfg_.homotopy == SimConfig::Homotopy::ForceGmin)
        throw ConvergenceError("gmin stepping failed to converge");
    }

    // Source stepping: ramp the sources in 10 steps.
    Eigen::VectorXd guess = Eigen::VectorXd::Zero(size());
    NewtonResult last;
    for (int step = 1; step <= 10; ++step) {
      last = newton(guess, t, scale * (step / 10.0), cfg_.gmin);
      if (!last.converged)
        throw ConvergenceError(
            "source stepping failed at scale " + std::to_string(step / 10.0) +
                " (worst node " + node_label(last.worst_node) + ")",
            node_label(last.worst_node), last.worst_residual);
    }
    return guess;
  }

  std::string node_label(int k) const {
    if (k < 0) return "?";
    if (k < num_nodes()) return node_names_[k];
    return "branch " + sources_[k - num_nodes()].dev->name;
  }

  NodeVoltages to_voltages(const Eigen::VectorXd& x) const {
    NodeVoltages out;
    out["0"] = 0.0;
    for (int k = 0; k < num_nodes(); ++k) out[node_names_[k]] = x[k];
    return out;
  }

 private:
  int index_of(const std::string& node) {
    if (node == "0") return -1;
    auto it = node_index_.find(node);
    if (it != node_index_.end()) return it->second;
    int k = static_cast<int>(node_names_.size());
    node_index_[node] = k;
    node_names_.push_back(node);
    return k;
  }

  const Netlist& netlist_;
  const SimConfig& cfg_;
  std::vector<std::string> node_names_;
  std::map<std::string, int> node_index_;
  std::vector<MosElem> mosfets_;
  std::vector<TwoTerm> caps_;
  std::vector<TwoTerm> resistors_;
  std::vector<SrcElem> sources_;
  std::vector<CapState> cap_states_;
  double geq_factor_ = 0.0;
  double h_ = 0.0;
  bool be_ = false;
};

double derive_tstep(const Netlist& n, const SimConfig& cfg) {
  if (cfg.tstep > 0.0) return cfg.tstep;
  // Default: 1/200 of the smallest pulse width (or narrowest PWL segment).
  double smallest = cfg.tstop;
  for (const auto& d : n.devices) {
    if (d.kind != DeviceKind::Vsource) continue;
    if (d.source.kind == SourceSpec::Kind::Pulse && d.source.pulse.width > 0)
      smallest = std::min(smallest, d.source.pulse.width);
    if (d.source.kind == SourceSpec::Kind::Pwl) {
      const auto& ts = d.source.pwl.times;
      for (size_t k = 1; k < ts.size(); ++k)
        smallest = std::min(smallest, ts[k] - ts[k - 1]);
    }
  }
  double step = smallest / 200.0;
  if (!(step > 0.0)) step = cfg.tstop / 1000.0;
  return std::max(step, cfg.tstop * 1e-9);
}

}  // namespace

NodeVoltages dc_operating_point(const Netlist& n, const SimConfig& cfg,
                                double source_scale) {
  Mna mna(n, cfg);
  mna.set_dc_mode();
  Eigen::VectorXd x = mna.solve_dc(0.0, source_scale);
  return mna.to_voltages(x);
}

Waveform transient(const Netlist& n, const SimConfig& cfg) {
  if (!(cfg.tstop > 0.0))
    throw std::invalid_argument("transient requires tstop > 0");
  const double tstep = derive_tstep(n, cfg);
  if (!(tstep > 0.0) || tstep > cfg.tstop)
    throw std::invalid_argument("transient requires 0 < tstep <= tstop");

  Mna mna(n, cfg);

  // Time grid: uniform multiples of tstep plus every source breakpoint.
  std::vector<double> grid;
  for (long k = 1; k * tstep < cfg.tstop; ++k) grid.push_back(k * tstep);
  grid.push_back(cfg.tstop);
  for (const auto& d : n.devices)
    if (d.kind == DeviceKind::Vsource)
      for (double t : d.source.breakpoints(cfg.tstop))
        if (t < cfg.tstop) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  const double merge_eps = tstep * 1e-9;
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) {
                           return std::abs(a - b) < merge_eps;
                         }),
             grid.end());

  Waveform w;
  w.nodes = mna.node_names();
  w.v.resize(w.nodes.size());
  for (const auto& s : mna.sources()) {
    w.sources.push_back(s.dev->name);
    w.source_nodes.push_back({s.dev->nodes[0], s.dev->nodes[1]});
  }
  w.i.resize(w.sources.size());

  // Operating point at t = 0 with the sources at their initial values.
  mna.set_dc_mode();
  Eigen::VectorXd x = mna.solve_dc(0.0, 1.0);
  mna.init_cap_states(x);

  auto record = [&](double t, const Eigen::VectorXd& sol) {
    w.times.push_back(t);
    for (size_t k = 0; k < w.nodes.size(); ++k)
      w.v[k].push_back(sol[static_cast<int>(k)]);
    for (size_t k = 0; k < w.sources.size(); ++k)
      w.i[k].push_back(sol[mna.num_nodes() + static_cast<int>(k)]);
  };
  record(0.0, x);

  bool first_step = true;
  double t_cur = 0.0;
  for (double t_target : grid) {
    while (t_cur < t_target) {
      double dt = t_target - t_cur;
      int halvings = 0;
      for (;;) {
        const bool be =
            first_step || cfg.integrator == SimConfig::Integrator::BackwardEuler;
        mna.set_step(dt, be);
        Eigen::VectorXd trial = x;
        Mna::NewtonResult r = mna.newton(trial, t_cur + dt, 1.0, cfg.gmin);
        if (r.converged) {
          x = trial;
          mna.accept_step(x);
          t_cur += dt;
          record(t_cur, x);
          first_step = false;
          break;
        }
        if (++halvings > 8)
          throw ConvergenceError(
              "timestep underflow at t = " + std::to_string(t_cur + dt) +
                  " (worst node " + mna.node_label(r.worst_node) + ")",
              mna.node_label(r.worst_node), r.worst_residual);
        dt *= 0.5;
      }
    }
  }
  return w;
}

KclStats kcl_check(const Netlist& n, const NodeVoltages& sol,
                   const SimConfig& cfg, double source_scale) {
  Mna mna(n, cfg);
  mna.set_dc_mode();
  const int N = mna.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < mna.num_nodes(); ++k) {
    auto it = sol.find(mna.node_names()[k]);
    if (it == sol.end())
      throw std::invalid_argument("solution missing node " +
                                  mna.node_names()[k]);
    x[k] = it->second;
  }
  // Branch currents are not part of a NodeVoltages map; recover them by a
  // single Newton iteration on the branch rows (linear in the currents).
  Eigen::MatrixXd J(N, N);
  Eigen::VectorXd f(N), imax(N);
  mna.assemble(x, 0.0, source_scale, cfg.gmin, J, f, imax);
  // Solve only for branch currents, holding voltages fixed: each source
  // current enters its two node rows linearly.
  const int nn = mna.num_nodes();
  const int ns = N - nn;
  if (ns > 0) {
    Eigen::MatrixXd A(nn, ns);
    A.setZero();
    for (int s = 0; s < ns; ++s)
      for (int k = 0; k < nn; ++k) A(k, s) = J(k, nn + s);
    // Least-squares fit of branch currents to cancel the node residuals.
    Eigen::VectorXd fi = f.head(nn);
    Eigen::VectorXd ib = A.colPivHouseholderQr().solve(-fi);
    x.tail(ns) = ib;
    mna.assemble(x, 0.0, source_scale, cfg.gmin, J, f, imax);
  }

  KclStats stats;
  stats.ok = true;
  for (int k = 0; k < nn; ++k) {
    const double bound = cfg.abstol + cfg.reltol * imax[k];
    const double r = std::abs(f[k]);
    if (r > stats.max_residual) {
      stats.max_residual = r;
      stats.max_allowed = bound;
      stats.worst_node = mna.node_names()[k];
    }
    if (r > bound) stats.ok = false;
  }
  return stats;
}

}  // namespace picospice
