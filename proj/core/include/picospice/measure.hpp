// Waveform measurements: average supply power, propagation delay,
// min-high / max-low output levels, noise margin and logic grading
// against a stimulus plan.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "picospice/engine.hpp"

namespace picospice {

// One stimulus pattern: during [t0, t1] the inputs hold the given logic
// values and each output is expected at its oracle value by the end of
// the interval.
struct PatternInterval {
  double t0 = 0.0, t1 = 0.0;
  std::map<std::string, bool> inputs;
  std::map<std::string, bool> expected;
};

struct StimulusPlan {
  std::vector<PatternInterval> schedule;  // disjoint, ordered
  double settle_fraction = 0.5;  // leading part of an interval treated as
                                 // transient; reads happen at interval end
  double vdd = 3.3;
  double period = 10e-9;  // per-pattern dwell
  double rise = 100e-12;  // input edge rise/fall
  std::vector<std::string> input_nodes;
  std::vector<std::string> output_nodes;
};

// Average power delivered by the listed sources over [t0, t1]:
// (1/(t1-t0)) * integral of sum V_src(t)*I_src(t) dt, trapezoidal rule on
// the waveform samples. Throws std::invalid_argument on an empty window.
double average_power(const Waveform& w, const std::vector<std::string>& sources,
                     double t0, double t1);

struct EdgeDelay {
  double t_input = 0.0;   // causing input 50% crossing
  double t_output = 0.0;  // output 50% crossing
  double delay = 0.0;
  std::string input, output;
  bool output_rising = false;
};

// Delays of every scheduled output transition caused by an edge on the
// given input node: t(output crosses vdd/2) - t(input crosses vdd/2),
// crossings located by linear interpolation. Transitions whose output
// never crosses inside the interval are omitted (grade_logic reports
// them as logic failures).
std::vector<EdgeDelay> propagation_delay(const Waveform& w,
                                         const std::string& input,
                                         const std::string& output,
                                         const StimulusPlan& plan);

// Worst (maximum) delay over all inputs plus the per-edge list.
std::pair<double, std::vector<EdgeDelay>> worst_delay(
    const Waveform& w, const std::vector<std::string>& inputs,
    const std::string& output, const StimulusPlan& plan);

struct Levels {
  std::optional<double> min_high;  // absent if the plan has no high interval
  std::optional<double> max_low;   // absent if the plan has no low interval
};

// Steady-state output levels, read at each interval's end point.
Levels output_levels(const Waveform& w, const std::string& output,
                     const StimulusPlan& plan);

// min_high - max_low.
double noise_margin(double min_high, double max_low);

struct PatternResult {
  int index = 0;
  double read_time = 0.0;
  std::map<std::string, double> measured;  // output node -> voltage
  bool pass = true;
  bool settled = true;  // value stable over the post-settle window
  std::string failure;  // empty when pass
};

// Grade each interval at its read point: expected-high requires
// v >= voh_frac*vdd, expected-low requires v <= vol_frac*vdd.
std::vector<PatternResult> grade_logic(const Waveform& w,
                                       const StimulusPlan& plan,
                                       double voh_frac = 0.55,
                                       double vol_frac = 0.15);

struct OutputMeasurement {
  std::string node;
  double worst_delay = 0.0;
  std::vector<EdgeDelay> edges;
  std::optional<double> min_high;
  std::optional<double> max_low;
  std::optional<double> noise_margin;
};

struct MeasurementReport {
  std::string cell;
  std::string card;
  double vdd = 0.0;
  double period = 0.0;
  double rise = 0.0;
  double avg_power = 0.0;  // W
  std::vector<OutputMeasurement> outputs;
  std::vector<PatternResult> patterns;
  bool logic_pass = true;
};

// Full report for a simulated testbench: power over the plan's span,
// levels/delays/noise margin per output, per-pattern grading.
MeasurementReport measure_waveform(const Waveform& w, const StimulusPlan& plan,
                                   const std::vector<std::string>& supplies,
                                   double voh_frac = 0.55,
                                   double vol_frac = 0.15);

// JSON serialization (schema version 1).
std::string report_to_json(const MeasurementReport& r);

}  // namespace picospice
