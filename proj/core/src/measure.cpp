#include "picospice/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace picospice {

namespace {

// Sample index range [lo, hi) covering (t0, t1).
std::pair<size_t, size_t> window_range(const std::vector<double>& times,
                                       double t0, double t1) {
  auto lo = std::upper_bound(times.begin(), times.end(), t0);
  auto hi = std::lower_bound(times.begin(), times.end(), t1);
  return {static_cast<size_t>(lo - times.begin()),
          static_cast<size_t>(hi - times.begin())};
}

double interp_current(const Waveform& w, int source_idx, double t) {
  const auto& ts = w.times;
  const auto& vs = w.i[source_idx];
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t hi = static_cast<size_t>(it - ts.begin());
  size_t lo = hi - 1;
  if (ts[hi] == ts[lo]) return vs[hi];
  double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return vs[lo] + f * (vs[hi] - vs[lo]);
}

}  // namespace

double average_power(const Waveform& w, const std::vector<std::string>& sources,
                     double t0, double t1) {
  if (!(t1 > t0))
    throw std::invalid_argument("average_power: empty window");
  if (w.times.empty())
    throw std::invalid_argument("average_power: empty waveform");
  t0 = std::max(t0, w.times.front());
  t1 = std::min(t1, w.times.back());
  if (!(t1 > t0))
    throw std::invalid_argument("average_power: window outside waveform");

  struct Col {
    int idx;
    std::string np, nn;
  };
  std::vector<Col> cols;
  for (const auto& name : sources) {
    int k = w.source_index(name);
    if (k < 0) throw std::invalid_argument("unknown source " + name);
    cols.push_back({k, w.source_nodes[k].first, w.source_nodes[k].second});
  }

  auto p_at = [&](double t) {
    double p = 0.0;
    for (const auto& c : cols) {
      const double v = w.value(c.np, t) - w.value(c.nn, t);
      const double i = interp_current(w, c.idx, t);
      p += v * i;
    }
    return p;
  };

  // Trapezoidal quadrature over the samples inside the window plus the
  // interpolated endpoints.
  auto [lo, hi] = window_range(w.times, t0, t1);
  double integral = 0.0;
  double t_prev = t0;
  double p_prev = p_at(t0);
  for (size_t k = lo; k < hi; ++k) {
    const double t = w.times[k];
    const double p = p_at(t);
    integral += 0.5 * (p_prev + p) * (t - t_prev);
    t_prev = t;
    p_prev = p;
  }
  integral += 0.5 * (p_prev + p_at(t1)) * (t1 - t_prev);
  return integral / (t1 - t0);
}

namespace {

// First crossing of `level` in the given direction within [t_from, t_to],
// located by linear interpolation between samples. Returns NaN if none.
double find_crossing(const Waveform& w, const std::string& node, double level,
                     bool rising, double t_from, double t_to) {
  const auto& ts = w.times;
  int idx = w.node_index(node);
  if (idx < 0) throw std::invalid_argument("unknown node " + node);
  const auto& vs = w.v[idx];

  auto lo_it = std::lower_bound(ts.begin(), ts.end(), t_from);
  size_t k0 = lo_it == ts.begin() ? 1 : static_cast<size_t>(lo_it - ts.begin());
  for (size_t k = k0; k < ts.size() && ts[k - 1] <= t_to; ++k) {
    const double ta = ts[k - 1], tb = ts[k];
    double va = vs[k - 1], vb = vs[k];
    // Clip the segment to the search window.
    double a = ta, b = tb;
    if (a < t_from) {
      va = va + (vb - va) * ((t_from - ta) / (tb - ta));
      a = t_from;
    }
    if (b > t_to) {
      vb = va + (vb - va) * ((t_to - a) / (tb - a));
      b = t_to;
    }
    const bool crosses = rising ? (va < level && vb >= level)
                                : (va > level && vb <= level);
    if (crosses) {
      if (vb == va) return a;
      return a + (b - a) * ((level - va) / (vb - va));
    }
  }
  return std::nan("");
}

}  // namespace

std::vector<EdgeDelay> propagation_delay(const Waveform& w,
                                         const std::string& input,
                                         const std::string& output,
                                         const StimulusPlan& plan) {
  std::vector<EdgeDelay> edges;
  const auto& sched = plan.schedule;
  const double level = 0.5 * plan.vdd;
  for (size_t k = 0; k < sched.size(); ++k) {
    const PatternInterval& cur = sched[k];
    const PatternInterval& prev = sched[(k + sched.size() - 1) % sched.size()];
    auto in_prev = prev.inputs.find(input);
    auto in_cur = cur.inputs.find(input);
    if (in_prev == prev.inputs.end() || in_cur == cur.inputs.end()) continue;
    if (in_prev->second == in_cur->second) continue;  // input did not toggle
    auto out_prev = prev.expected.find(output);
    auto out_cur = cur.expected.find(output);
    if (out_prev == prev.expected.end() || out_cur == cur.expected.end())
      continue;
    if (out_prev->second == out_cur->second) continue;  // no output transition

    const bool in_rising = in_cur->second;
    const bool out_rising = out_cur->second;
    const double t_in =
        find_crossing(w, input, level, in_rising, cur.t0, cur.t1);
    const double t_out =
        find_crossing(w, output, level, out_rising, cur.t0, cur.t1);
    if (std::isnan(t_in) || std::isnan(t_out)) continue;  // logic failure
    edges.push_back({t_in, t_out, t_out - t_in, input, output, out_rising});
  }
  return edges;
}

std::pair<double, std::vector<EdgeDelay>> worst_delay(
    const Waveform& w, const std::vector<std::string>& inputs,
    const std::string& output, const StimulusPlan& plan) {
  std::vector<EdgeDelay> all;
  for (const auto& in : inputs) {
    auto edges = propagation_delay(w, in, output, plan);
    all.insert(all.end(), edges.begin(), edges.end());
  }
  double worst = 0.0;
  for (const auto& e : all) worst = std::max(worst, e.delay);
  return {worst, all};
}

Levels output_levels(const Waveform& w, const std::string& output,
                     const StimulusPlan& plan) {
  Levels lv;
  for (const auto& iv : plan.schedule) {
    auto it = iv.expected.find(output);
    if (it == iv.expected.end()) continue;
    const double v = w.value(output, iv.t1);
    if (it->second) {
      if (!lv.min_high || v < *lv.min_high) lv.min_high = v;
    } else {
      if (!lv.max_low || v > *lv.max_low) lv.max_low = v;
    }
  }
  return lv;
}

double noise_margin(double min_high, double max_low) {
  return min_high - max_low;
}

std::vector<PatternResult> grade_logic(const Waveform& w,
                                       const StimulusPlan& plan,
                                       double voh_frac, double vol_frac) {
  std::vector<PatternResult> out;
  const double voh = voh_frac * plan.vdd;
  const double vol = vol_frac * plan.vdd;
  int idx = 0;
  for (const auto& iv : plan.schedule) {
    PatternResult r;
    r.index = idx++;
    r.read_time = iv.t1;
    for (const auto& [node, expect_high] : iv.expected) {
      const double v = w.value(node, iv.t1);
      r.measured[node] = v;
      const bool ok = expect_high ? (v >= voh) : (v <= vol);
      if (!ok) {
        r.pass = false;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s%s=%.4f V, expected %s %.4f V",
                      r.failure.empty() ? "" : "; ", node.c_str(), v,
                      expect_high ? ">=" : "<=", expect_high ? voh : vol);
        r.failure += buf;
      }
      // Stability check over the post-settle part of the interval.
      const double t_settle = iv.t0 + plan.settle_fraction * (iv.t1 - iv.t0);
      if (std::abs(w.value(node, t_settle) - v) > 0.05 * plan.vdd)
        r.settled = false;
    }
    out.push_back(std::move(r));
  }
  return out;
}

MeasurementReport measure_waveform(const Waveform& w, const StimulusPlan& plan,
                                   const std::vector<std::string>& supplies,
                                   double voh_frac, double vol_frac) {
  MeasurementReport rep;
  rep.vdd = plan.vdd;
  rep.period = plan.period;
  rep.rise = plan.rise;
  if (!plan.schedule.empty())
    rep.avg_power = average_power(w, supplies, plan.schedule.front().t0,
                                  plan.schedule.back().t1);
  for (const auto& out : plan.output_nodes) {
    OutputMeasurement om;
    om.node = out;
    auto [worst, edges] = worst_delay(w, plan.input_nodes, out, plan);
    om.worst_delay = worst;
    om.edges = std::move(edges);
    Levels lv = output_levels(w, out, plan);
    om.min_high = lv.min_high;
    om.max_low = lv.max_low;
    if (lv.min_high && lv.max_low)
      om.noise_margin = noise_margin(*lv.min_high, *lv.max_low);
    rep.outputs.push_back(std::move(om));
  }
  rep.patterns = grade_logic(w, plan, voh_frac, vol_frac);
  rep.logic_pass = std::all_of(rep.patterns.begin(), rep.patterns.end(),
                               [](const PatternResult& r) { return r.pass; });
  return rep;
}

std::string report_to_json(const MeasurementReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["cell"] = r.cell;
  j["card"] = r.card;
  j["vdd"] = r.vdd;
  j["stimulus"] = {{"period_s", r.period}, {"rise_s", r.rise}};
  j["avg_power_w"] = r.avg_power;
  j["logic_pass"] = r.logic_pass;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : r.outputs) {
    nlohmann::json jo;
    jo["node"] = o.node;
    jo["worst_delay_s"] = o.worst_delay;
    if (o.min_high) jo["min_high_v"] = *o.min_high;
    if (o.max_low) jo["max_low_v"] = *o.max_low;
    if (o.noise_margin) jo["noise_margin_v"] = *o.noise_margin;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : o.edges)
      edges.push_back({{"input", e.input},
                       {"t_input_s", e.t_input},
                       {"t_output_s", e.t_output},
                       {"delay_s", e.delay},
                       {"output_rising", e.output_rising}});
    jo["edges"] = edges;
    outs.push_back(jo);
  }
  j["outputs"] = outs;
  nlohmann::json pats = nlohmann::json::array();
  for (const auto& p : r.patterns) {
    nlohmann::json jp;
    jp["index"] = p.index;
    jp["read_time_s"] = p.read_time;
    jp["pass"] = p.pass;
    jp["settled"] = p.settled;
    jp["measured_v"] = p.measured;
    if (!p.failure.empty()) jp["failure"] = p.failure;
    pats.push_back(jp);
  }
  j["patterns"] = pats;
  return j.dump(2);
}

}  // namespace picospice
