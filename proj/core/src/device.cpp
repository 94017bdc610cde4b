#include "picospice/device.hpp"

#include <cmath>
#include <stdexcept>

namespace picospice {

MosModel generic035(MosPolarity polarity) {
  MosModel m;
  m.polarity = polarity;
  m.gamma = 0.58;
  m.phi0 = 0.84;
  m.tox = 7.6e-9;
  m.cox_area = 4.5e-3;
  m.cj = 3e-10;
  m.conventional_body_effect = true;
  if (polarity == MosPolarity::Nmos) {
    m.vt0 = 0.5;
    m.kprime = 170e-6;
    m.lambda = 0.06;
  } else {
    m.vt0 = 0.65;
    m.kprime = 58e-6;
    m.lambda = 0.09;
  }
  return m;
}

MosModel geomdemo(MosPolarity polarity) {
  MosModel m = generic035(polarity);
  m.conventional_body_effect = false;
  m.alpha_l = 0.02;
  m.alpha_v = 0.01;
  m.alpha_w = 0.02;
  return m;
}

static void check_geometry(Geometry g) {
  if (!(g.w > 0.0) || !(g.l > 0.0))
    throw std::invalid_argument("MOSFET W and L must be positive");
}

double threshold_voltage(const MosModel& m, Geometry g, double vsb,
                         double vds) {
  check_geometry(g);
  const double phi = vsb + m.phi0;
  if (!(phi > 0.0))
    throw std::domain_error("threshold_voltage: vsb + phi0 must be positive");
  double body = m.gamma * std::sqrt(phi);
  if (m.conventional_body_effect) body -= m.gamma * std::sqrt(m.phi0);
  return m.vt0 + body - m.alpha_l * (m.tox / g.l) * phi -
         m.alpha_v * (m.tox / g.l) * vds + m.alpha_w * (m.tox / g.w) * phi;
}

double drain_current(const MosModel& m, Geometry g, const BiasPoint& bias) {
  const double vt = threshold_voltage(m, g, bias.vsb, bias.vds);
  const double ovd = bias.vgs - vt;
  if (ovd <= 0.0 || bias.vds <= 0.0) return 0.0;
  const double beta = m.kprime * (g.w / g.l);
  const double clm = 1.0 + m.lambda * bias.vds;
  if (bias.vds < ovd)
    return beta * (ovd * bias.vds - 0.5 * bias.vds * bias.vds) * clm;
  return 0.5 * beta * ovd * ovd * clm;
}

Conductances conductances(const MosModel& m, Geometry g,
                          const BiasPoint& bias) {
  Conductances c;
  const double vt = threshold_voltage(m, g, bias.vsb, bias.vds);
  const double ovd = bias.vgs - vt;
  if (ovd <= 0.0 || bias.vds <= 0.0) return c;

  const double dvt_dvsb = 0.5 * m.gamma / std::sqrt(bias.vsb + m.phi0) -
                          m.alpha_l * (m.tox / g.l) +
                          m.alpha_w * (m.tox / g.w);
  const double dvt_dvds = -m.alpha_v * (m.tox / g.l);
  const double beta = m.kprime * (g.w / g.l);
  const double clm = 1.0 + m.lambda * bias.vds;

  if (bias.vds < ovd) {
    const double f = ovd * bias.vds - 0.5 * bias.vds * bias.vds;
    c.id = beta * f * clm;
    c.gm = beta * bias.vds * clm;
    // vds enters the square law, the clm factor, and the threshold.
    c.gds = beta * ((ovd - bias.vds) * clm + f * m.lambda) +
            beta * bias.vds * clm * (-dvt_dvds);
    c.gmb = beta * bias.vds * clm * (-dvt_dvsb);
  } else {
    c.id = 0.5 * beta * ovd * ovd * clm;
    c.gm = beta * ovd * clm;
    c.gds = 0.5 * beta * ovd * ovd * m.lambda + beta * ovd * clm * (-dvt_dvds);
    c.gmb = beta * ovd * clm * (-dvt_dvsb);
  }
  return c;
}

double triode_on_resistance(const MosModel& m, Geometry g,
                            const BiasPoint& bias) {
  check_geometry(g);
  const double vt = threshold_voltage(m, g, bias.vsb, bias.vds);
  if (!(bias.vds > 0.0) || !(bias.vds < bias.vgs - vt))
    throw std::domain_error(
        "triode_on_resistance requires 0 < vds < vgs - vt");
  return g.l / (m.kprime * g.w * (bias.vgs - vt - bias.vds));
}

double saturation_output_resistance(const MosModel& m, Geometry g,
                                    const BiasPoint& bias, double delta_l,
                                    double id, double vds_sat) {
  check_geometry(g);
  if (bias.vds < vds_sat)
    throw std::domain_error(
        "saturation_output_resistance requires vds >= vds_sat");
  if (!(id > 0.0))
    throw std::domain_error("saturation_output_resistance requires id > 0");
  if (!(delta_l < g.l))
    throw std::domain_error("saturation_output_resistance requires dl < L");
  const double front = 2.0 * g.l / (1.0 - delta_l / g.l);
  const double root =
      std::sqrt(m.q * m.nb / (2.0 * m.eps_si) * (bias.vds - vds_sat));
  return front / id * root;
}

DeviceCaps device_capacitances(const MosModel& m, Geometry g) {
  check_geometry(g);
  DeviceCaps c;
  c.cgs = c.cgd = 0.5 * m.cox_area * g.w * g.l;
  c.cdb = c.csb = m.cj * g.w;
  return c;
}

const char* to_string(MosRegion r) {
  switch (r) {
    case MosRegion::Cutoff: return "cutoff";
    case MosRegion::Triode: return "triode";
    case MosRegion::Saturation: return "saturation";
  }
  return "?";
}

namespace {

// NMOS-convention evaluation at raw (already polarity-mirrored) terminal
// voltages, with source/drain exchange when vds < 0. Returns current into
// the drain terminal and its derivative w.r.t. each terminal voltage.
MosTerminalEval eval_nmos(const MosModel& m, Geometry g, double vd, double vg,
                          double vs, double vb) {
  MosTerminalEval e;
  const bool swap = (vd - vs) < 0.0;
  e.swapped = swap;
  const double d = swap ? vs : vd;
  const double s = swap ? vd : vs;

  BiasPoint bias;
  bias.vgs = vg - s;
  bias.vds = d - s;
  bias.vsb = s - vb;
  // Keep sqrt(vsb + phi0) defined while Newton wanders.
  const double vsb_floor = -m.phi0 + 1e-6;
  if (bias.vsb < vsb_floor) bias.vsb = vsb_floor;

  const Conductances c = conductances(m, g, bias);
  const double vt = threshold_voltage(m, g, bias.vsb, bias.vds);
  e.vgs = bias.vgs;
  e.vds = bias.vds;
  e.vsb = bias.vsb;
  e.vt = vt;
  if (c.id == 0.0 && bias.vgs <= vt)
    e.region = MosRegion::Cutoff;
  else if (bias.vds < bias.vgs - vt)
    e.region = MosRegion::Triode;
  else
    e.region = MosRegion::Saturation;

  if (!swap) {
    e.id = c.id;
    e.g_vg = c.gm;
    e.g_vd = c.gds;
    e.g_vb = -c.gmb;
    e.g_vs = -c.gm - c.gds + c.gmb;
  } else {
    // id(into drain) = -I(vgs'=vg-vd, vds'=vs-vd, vsb'=vd-vb)
    e.id = -c.id;
    e.g_vg = -c.gm;
    e.g_vs = -c.gds;
    e.g_vd = c.gm + c.gds - c.gmb;
    e.g_vb = c.gmb;
  }
  return e;
}

}  // namespace

MosTerminalEval evaluate_terminals(const MosModel& m, Geometry g, double vd,
                                   double vg, double vs, double vb) {
  if (m.polarity == MosPolarity::Nmos) return eval_nmos(m, g, vd, vg, vs, vb);
  // PMOS: mirror all voltages, evaluate as NMOS, negate the current. The
  // derivative signs cancel, so conductances carry over unchanged.
  MosTerminalEval e = eval_nmos(m, g, -vd, -vg, -vs, -vb);
  e.id = -e.id;
  return e;
}

}  // namespace picospice
