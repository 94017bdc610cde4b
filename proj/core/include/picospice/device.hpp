// Level-1 MOSFET evaluation: geometry-corrected threshold voltage,
// piecewise square-law drain current, small-signal conductances for
// Newton linearization, and on-resistance diagnostics.
#pragma once

#include <string>

namespace picospice {

enum class MosPolarity { Nmos, Pmos };

// Model card. Threshold parameters (vt0, gamma, phi0) and the geometry
// correction coefficients (alpha_l, alpha_v, alpha_w) feed the threshold
// expression; kprime/lambda feed the current law; nb/eps_si/q feed the
// saturation output-resistance diagnostic; cox_area/cj set the lumped
// device capacitances.
struct MosModel {
  MosPolarity polarity = MosPolarity::Nmos;
  double vt0 = 0.5;        // zero-bias threshold magnitude, V
  double gamma = 0.0;      // bulk threshold coefficient, V^0.5
  double phi0 = 0.84;      // surface potential (2*phi_F), V
  double tox = 7.6e-9;     // oxide thickness, m
  double alpha_l = 0.0;    // length correction coefficient
  double alpha_v = 0.0;    // drain-voltage correction coefficient
  double alpha_w = 0.0;    // width correction coefficient
  double kprime = 170e-6;  // transconductance parameter, A/V^2
  double lambda = 0.0;     // channel-length modulation, 1/V
  double nb = 1e23;        // substrate doping, 1/m^3
  double eps_si = 1.04e-10;      // silicon permittivity, F/m
  double q = 1.602176634e-19;    // elementary charge, C
  double cox_area = 0.0;   // gate capacitance per area, F/m^2
  double cj = 0.0;         // junction capacitance per width, F/m
  // When set, the body-effect term is gamma*(sqrt(vsb+phi0)-sqrt(phi0))
  // instead of gamma*sqrt(vsb+phi0).
  bool conventional_body_effect = false;

  bool operator==(const MosModel&) const = default;
};

// Bundled cards. generic035 is a public textbook-style 0.35um card, not a
// foundry model; absolute currents differ from any proprietary kit.
MosModel generic035(MosPolarity polarity);
// Demo card with nonzero geometry-correction coefficients and the
// as-printed body-effect form; exercises every threshold term.
MosModel geomdemo(MosPolarity polarity);

// Terminal voltage differences in NMOS convention. PMOS callers mirror
// the bias and negate the current.
struct BiasPoint {
  double vgs = 0.0;
  double vds = 0.0;
  double vsb = 0.0;
};

struct Geometry {
  double w = 0.0;  // channel width, m
  double l = 0.0;  // channel length, m
};

// Threshold voltage including body effect and the geometry/drain-voltage
// correction terms. Throws std::domain_error if vsb + phi0 <= 0 and
// std::invalid_argument on non-positive W or L.
double threshold_voltage(const MosModel& m, Geometry g, double vsb,
                         double vds);

// Piecewise drain current (cutoff / triode / saturation). The
// channel-length modulation factor multiplies both conducting branches so
// the current is continuous at the triode/saturation crossover.
double drain_current(const MosModel& m, Geometry g, const BiasPoint& bias);

struct Conductances {
  double gm = 0.0;   // dId/dvgs
  double gds = 0.0;  // dId/dvds
  double gmb = 0.0;  // dId/dvsb
  double id = 0.0;
};

// Analytic partial derivatives of drain_current at the bias point,
// including the threshold's dependence on vsb and vds.
Conductances conductances(const MosModel& m, Geometry g,
                          const BiasPoint& bias);

// Channel resistance in the triode region, L / (K*W*(vgs - vt - vds)).
// Diagnostic only; throws std::domain_error outside 0 < vds < vgs - vt.
double triode_on_resistance(const MosModel& m, Geometry g,
                            const BiasPoint& bias);

// Saturation output resistance diagnostic,
// (2L/(1-dl/L)) * (1/id) * sqrt(q*nb/(2*eps_si) * (vds - vds_sat)).
// Throws std::domain_error if vds < vds_sat, id <= 0 or dl >= L.
double saturation_output_resistance(const MosModel& m, Geometry g,
                                    const BiasPoint& bias, double delta_l,
                                    double id, double vds_sat);

struct DeviceCaps {
  double cgs = 0.0;
  double cgd = 0.0;
  double cdb = 0.0;
  double csb = 0.0;
};

// Constant lumped capacitances: cgs = cgd = cox_area*W*L/2, cdb = csb =
// cj*W. The transient engine stamps these as fixed capacitors.
DeviceCaps device_capacitances(const MosModel& m, Geometry g);

enum class MosRegion { Cutoff, Triode, Saturation };

const char* to_string(MosRegion r);

// Linearization of a MOSFET at actual terminal voltages. Handles PMOS
// mirroring and source/drain swapping for vds < 0 (pass-gate operation),
// and clamps vsb just above -phi0 so the sqrt stays defined mid-Newton.
struct MosTerminalEval {
  double id = 0.0;  // current into the drain terminal
  // Partial derivatives of id with respect to each terminal voltage.
  double g_vd = 0.0, g_vg = 0.0, g_vs = 0.0, g_vb = 0.0;
  MosRegion region = MosRegion::Cutoff;
  // Normalized operating point (NMOS convention, after any swap).
  double vgs = 0.0, vds = 0.0, vsb = 0.0, vt = 0.0;
  bool swapped = false;  // source/drain exchanged for evaluation
};

MosTerminalEval evaluate_terminals(const MosModel& m, Geometry g, double vd,
                                   double vg, double vs, double vb);

}  // namespace picospice
