#include "jtwpa/transient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace jtwpa {

using constants::phi0;
using constants::two_pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_finite_r(double r) { return r < kInf; }

// Largest admissible fixed step of the standard protocol.
constexpr double kMaxProtocolDt = 4.0e-12 * (1.0 + 1e-9);

void require_on_grid(double f, double df, const char* what) {
  double q = f / df;
  if (std::abs(q - std::round(q)) > 1e-6)
    throw GridAlignmentError(std::string(what) +
                             " is not an integer multiple of the DFT resolution");
}

}  // namespace

void DriveSpec::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(pump_amp) || !finite(signal_amp) || !finite(Idc))
    throw std::invalid_argument("DriveSpec: non-finite amplitude");
  if (!finite(pump_freq) || !finite(signal_freq) || pump_freq < 0 || signal_freq < 0)
    throw std::invalid_argument("DriveSpec: invalid frequency");
  if (!(ramp_time >= 0.0)) throw std::invalid_argument("DriveSpec: negative ramp time");
}

int Protocol::samples() const {
  double m = record / dt;
  if (std::abs(m - std::round(m)) > 1e-6)
    throw std::invalid_argument("Protocol: record window is not a multiple of dt");
  return int(std::lround(m));
}

void Protocol::validate() const {
  if (!(dt > 0.0) || dt > kMaxProtocolDt)
    throw std::invalid_argument("Protocol: dt must be positive and at most 4 ps");
  if (!(discard >= 0.0) || !(record > 0.0))
    throw std::invalid_argument("Protocol: invalid window");
  double s = discard / dt;
  if (std::abs(s - std::round(s)) > 1e-6)
    throw std::invalid_argument("Protocol: discard time is not a multiple of dt");
  samples();
}

RecordingSpec RecordingSpec::all_nodes(int total) {
  RecordingSpec r;
  r.nodes.resize(total);
  for (int n = 0; n < total; ++n) r.nodes[n] = n + 1;
  return r;
}

RecordingSpec RecordingSpec::ends_only(int total) {
  RecordingSpec r;
  r.nodes = {1, total};
  return r;
}

int TransientTrace::index_of(int node) const {
  auto it = std::find(nodes.begin(), nodes.end(), node);
  if (it == nodes.end())
    throw std::out_of_range("TransientTrace: node " + std::to_string(node) +
                            " was not recorded");
  return int(it - nodes.begin());
}

LadderSimulator::LadderSimulator(const LineSpec& spec, const DriveSpec& drive)
    : spec_(spec), drive_(drive), n_cells_(spec.profile.cells) {
  drive_.validate();
  spec_.profile.validate();

  const int nodes = n_cells_ + 1;
  inv_L_ = 1.0 / spec_.squid.L;
  ic_ = spec_.squid.Ic;
  inv_phi0_ = 1.0 / phi0;
  cj_ = spec_.squid.CJ;
  gj_ = is_finite_r(spec_.squid.RJ) ? 1.0 / spec_.squid.RJ : 0.0;
  gs_ = is_finite_r(spec_.Rs) ? 1.0 / spec_.Rs : 0.0;
  gt_ = is_finite_r(spec_.Rt) ? 1.0 / spec_.Rt : 0.0;

  // The dc bias splits between the source resistor and the line (which is a
  // superconducting short to Rt at dc). Scale the Norton source so the line
  // branch carries exactly Idc; without a dc return path the requested bias
  // cannot be established.
  if (drive_.Idc != 0.0 && !is_finite_r(spec_.Rt))
    throw std::invalid_argument(
        "LadderSimulator: dc bias requires a finite output termination");
  dc_source_ = drive_.Idc;
  if (is_finite_r(spec_.Rs) && is_finite_r(spec_.Rt))
    dc_source_ = drive_.Idc * (1.0 + spec_.Rt / spec_.Rs);

  mass_diag_.assign(nodes, 0.0);
  mass_off_.assign(nodes - 1, 0.0);
  for (int cell = 1; cell <= n_cells_; ++cell) {
    double half = 0.5 * spec_.profile.at(cell);
    mass_diag_[cell - 1] += half + cj_;
    mass_diag_[cell] += half + cj_;
    mass_off_[cell - 1] = -cj_;
  }

  phi_.assign(nodes, 0.0);
  v_.assign(nodes, 0.0);
  v_prev_.assign(nodes, 0.0);
  v_prev2_.assign(nodes, 0.0);
  f_now_.assign(nodes, 0.0);
  v1_.assign(nodes, 0.0);
  v2_.assign(nodes, 0.0);
  phi1_.assign(nodes, 0.0);
  phi2_.assign(nodes, 0.0);
  f1_.assign(nodes, 0.0);
  f2_.assign(nodes, 0.0);
  r1_.assign(nodes, 0.0);
  r2_.assign(nodes, 0.0);
  kdiag_.assign(nodes, 0.0);
  koff_.assign(nodes - 1, 0.0);
  accel_.assign(nodes, 0.0);
  mass_cprime_.assign(nodes, 0.0);
  cdiag_.assign(nodes, 0.0);
  coff_.assign(nodes - 1, 0.0);
  crhs_.assign(nodes, 0.0);
  ccprime_.assign(nodes, 0.0);
  cinv_den_.assign(nodes, 0.0);

  eval_rhs(0.0, phi_, v_, f_now_);
}

void LadderSimulator::reset() {
  std::fill(phi_.begin(), phi_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
  t_ = 0.0;
  history_ = 0;
  diag_ = {};
  eval_rhs(0.0, phi_, v_, f_now_);
}

void LadderSimulator::set_state(std::span<const double> phi,
                                std::span<const double> v) {
  if (int(phi.size()) != node_count() || int(v.size()) != node_count())
    throw std::invalid_argument("set_state: size mismatch");
  std::copy(phi.begin(), phi.end(), phi_.begin());
  std::copy(v.begin(), v.end(), v_.begin());
  history_ = 0;
  eval_rhs(t_, phi_, v_, f_now_);
}

double LadderSimulator::drive_current(double t) const {
  double ramp = 1.0;
  if (drive_.ramp_time > 0.0 && t < drive_.ramp_time)
    ramp = std::max(t, 0.0) / drive_.ramp_time;
  double i = ramp * dc_source_;
  if (drive_.pump_amp != 0.0)
    i += drive_.pump_amp *
         std::sin(two_pi * drive_.pump_freq * t + drive_.pump_phase);
  if (drive_.signal_amp != 0.0)
    i += drive_.signal_amp *
         std::sin(two_pi * drive_.signal_freq * t + drive_.signal_phase);
  return i;
}

void LadderSimulator::eval_rhs(double t, const std::vector<double>& phi,
                               const std::vector<double>& v,
                               std::vector<double>& f) const {
  const int nodes = node_count();
  std::fill(f.begin(), f.end(), 0.0);
  for (int n = 0; n + 1 < nodes; ++n) {
    double dphi = phi[n] - phi[n + 1];
    double j = dphi * inv_L_ + ic_ * std::sin(dphi * inv_phi0_) +
               gj_ * (v[n] - v[n + 1]);
    f[n] -= j;
    f[n + 1] += j;
  }
  f[0] += drive_current(t) - gs_ * v[0];
  f[nodes - 1] -= gt_ * v[nodes - 1];
}

void LadderSimulator::check_finite() const {
  for (double x : v_)
    if (!std::isfinite(x))
      throw Divergence("LadderSimulator: state diverged at t = " +
                       std::to_string(t_));
}

namespace {

// Butcher data of the two-stage Gauss method and the eigenstructure of its
// coefficient matrix A (eigenvalue mu = 1/4 + i/(4*sqrt(3))): transforming
// the two Newton stage corrections onto the eigenbasis turns the coupled
// 2x(N+1) stage system into a single complex tridiagonal solve.
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kC1 = 0.5 - kSqrt3 / 6.0;
constexpr double kC2 = 0.5 + kSqrt3 / 6.0;
constexpr double kA11 = 0.25;
constexpr double kA12 = 0.25 - kSqrt3 / 6.0;
constexpr double kA21 = 0.25 + kSqrt3 / 6.0;
constexpr double kA22 = 0.25;
const std::complex<double> kMu(0.25, 1.0 / (4.0 * kSqrt3));
const std::complex<double> kMuSq = kMu * kMu;

}  // namespace

void LadderSimulator::step(double h) {
  const int nodes = node_count();
  const double tol_dphi = 1e-9 * phi0;  // Newton tolerance on stage fluxes
  const double t1 = t_ + kC1 * h;
  const double t2 = t_ + kC2 * h;

  // predictor: quadratic extrapolation of the node voltages onto the stages
  for (int n = 0; n < nodes; ++n) {
    double d1 = history_ >= 1 ? v_[n] - v_prev_[n] : 0.0;
    double d2 = history_ >= 2 ? d1 - (v_prev_[n] - v_prev2_[n]) : 0.0;
    v1_[n] = v_[n] + kC1 * d1 + 0.5 * kC1 * (kC1 + 1.0) * d2;
    v2_[n] = v_[n] + kC2 * d1 + 0.5 * kC2 * (kC2 + 1.0) * d2;
  }

  int iter = 0;
  for (;; ++iter) {
    if (iter >= 20)
      throw StepFailure("Newton did not converge within 20 iterations at t = " +
                        std::to_string(t_ + h));

    // stage fluxes from the collocation relation
    for (int n = 0; n < nodes; ++n) {
      phi1_[n] = phi_[n] + h * (kA11 * v1_[n] + kA12 * v2_[n]);
      phi2_[n] = phi_[n] + h * (kA21 * v1_[n] + kA22 * v2_[n]);
      f1_[n] = 0.0;
      f2_[n] = 0.0;
      if (iter == 0) kdiag_[n] = 0.0;
    }
    // stage right-hand sides; the junction stiffness is frozen after the
    // first iteration (it moves by ~1e-3 between iterations)
    for (int n = 0; n + 1 < nodes; ++n) {
      double dphi1 = phi1_[n] - phi1_[n + 1];
      double arg1 = dphi1 * inv_phi0_;
      double j1 = dphi1 * inv_L_ + ic_ * std::sin(arg1) + gj_ * (v1_[n] - v1_[n + 1]);
      f1_[n] -= j1;
      f1_[n + 1] += j1;
      double dphi2 = phi2_[n] - phi2_[n + 1];
      double arg2 = dphi2 * inv_phi0_;
      double j2 = dphi2 * inv_L_ + ic_ * std::sin(arg2) + gj_ * (v2_[n] - v2_[n + 1]);
      f2_[n] -= j2;
      f2_[n + 1] += j2;

      if (iter == 0) {
        double stiff =
            inv_L_ + ic_ * inv_phi0_ * 0.5 * (std::cos(arg1) + std::cos(arg2));
        kdiag_[n] += stiff;
        kdiag_[n + 1] += stiff;
        koff_[n] = -stiff;
      }
    }
    f1_[0] += drive_current(t1) - gs_ * v1_[0];
    f2_[0] += drive_current(t2) - gs_ * v2_[0];
    f1_[nodes - 1] -= gt_ * v1_[nodes - 1];
    f2_[nodes - 1] -= gt_ * v2_[nodes - 1];

    // stage residuals R_i = M (V_i - V) - h sum_j a_ij F_j
    for (int n = 0; n < nodes; ++n) {
      double m1 = mass_diag_[n] * (v1_[n] - v_[n]);
      double m2 = mass_diag_[n] * (v2_[n] - v_[n]);
      if (n > 0) {
        m1 += mass_off_[n - 1] * (v1_[n - 1] - v_[n - 1]);
        m2 += mass_off_[n - 1] * (v2_[n - 1] - v_[n - 1]);
      }
      if (n + 1 < nodes) {
        m1 += mass_off_[n] * (v1_[n + 1] - v_[n + 1]);
        m2 += mass_off_[n] * (v2_[n + 1] - v_[n + 1]);
      }
      r1_[n] = m1 - h * (kA11 * f1_[n] + kA12 * f2_[n]);
      r2_[n] = m2 - h * (kA21 * f1_[n] + kA22 * f2_[n]);
    }

    // eigen-transformed complex system (M + h^2 mu^2 K + h mu G) x = -w,
    // w = R1/(2 a12) - 2 sqrt(3) i R2; the factorization is reused along
    // with the frozen stiffness
    const std::complex<double> w1(1.0 / (2.0 * kA12), 0.0);
    const std::complex<double> w2(0.0, -2.0 * kSqrt3);
    if (iter == 0) {
      const std::complex<double> hmu = h * kMu;
      const std::complex<double> h2musq = h * h * kMuSq;
      for (int n = 0; n < nodes; ++n) {
        double gdiag = (n == 0 ? gs_ : 0.0) + (n == nodes - 1 ? gt_ : 0.0);
        if (n > 0) gdiag += gj_;
        if (n + 1 < nodes) gdiag += gj_;
        cdiag_[n] = mass_diag_[n] + h2musq * kdiag_[n] + hmu * gdiag;
      }
      for (int n = 0; n + 1 < nodes; ++n)
        coff_[n] = mass_off_[n] + h2musq * koff_[n] + hmu * (-gj_);
      cinv_den_[0] = 1.0 / cdiag_[0];
      ccprime_[0] = coff_[0] * cinv_den_[0];
      for (int n = 1; n < nodes; ++n) {
        std::complex<double> denom = cdiag_[n] - coff_[n - 1] * ccprime_[n - 1];
        cinv_den_[n] = 1.0 / denom;
        if (n + 1 < nodes) ccprime_[n] = coff_[n] * cinv_den_[n];
      }
    }
    for (int n = 0; n < nodes; ++n) crhs_[n] = -(w1 * r1_[n] + w2 * r2_[n]);
    crhs_[0] *= cinv_den_[0];
    for (int n = 1; n < nodes; ++n)
      crhs_[n] = (crhs_[n] - coff_[n - 1] * crhs_[n - 1]) * cinv_den_[n];
    for (int n = nodes - 2; n >= 0; --n)
      crhs_[n] -= ccprime_[n] * crhs_[n + 1];

    // back to stage corrections: dV1 = 2 a12 Re(x), dV2 = -Im(x)/(2 sqrt 3)
    double max_dphi = 0.0;
    for (int n = 0; n < nodes; ++n) {
      double d1 = 2.0 * kA12 * crhs_[n].real();
      double d2 = -crhs_[n].imag() / (2.0 * kSqrt3);
      v1_[n] += d1;
      v2_[n] += d2;
      double dphi1 = h * (kA11 * d1 + kA12 * d2);
      double dphi2 = h * (kA21 * d1 + kA22 * d2);
      max_dphi = std::max(max_dphi, std::max(std::abs(dphi1), std::abs(dphi2)));
    }
    if (max_dphi < tol_dphi) break;
  }
  diag_.newton_iterations += iter + 1;
  diag_.max_newton_iterations = std::max(diag_.max_newton_iterations, iter + 1);

  // collocation update; V+ = V + sqrt(3)(V2 - V1) avoids a mass solve
  for (int n = 0; n < nodes; ++n) {
    phi_[n] += 0.5 * h * (v1_[n] + v2_[n]);
    v_prev2_[n] = v_prev_[n];
    v_prev_[n] = v_[n];
    v_[n] = v_[n] + kSqrt3 * (v2_[n] - v1_[n]);
  }
  if (history_ < 2) ++history_;
  t_ += h;
  ++diag_.steps;
  // keep f_now consistent with the committed state for the next step
  eval_rhs(t_, phi_, v_, f_now_);
  check_finite();
}

double LadderSimulator::total_energy() const {
  return network_energy(spec_, phi_, v_);
}

double network_energy(const LineSpec& spec, std::span<const double> phi,
                      std::span<const double> v) {
  const int cells = spec.profile.cells;
  double e = 0.0;
  for (int cell = 1; cell <= cells; ++cell) {
    double half = 0.5 * spec.profile.at(cell);
    e += 0.5 * half * v[cell - 1] * v[cell - 1];
    e += 0.5 * half * v[cell] * v[cell];
    double dv = v[cell - 1] - v[cell];
    e += 0.5 * spec.squid.CJ * dv * dv;
    double dphi = phi[cell - 1] - phi[cell];
    e += 0.5 * dphi * dphi / spec.squid.L;
    e += spec.squid.Ic * phi0 * (1.0 - std::cos(dphi / phi0));
  }
  return e;
}

void LadderSimulator::integrate(double t_end, double dt, const Probe& probe) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (probe) probe(t_, phi_, v_);
  while (t_ < t_end - 0.5 * dt) {
    step(dt);
    if (probe) probe(t_, phi_, v_);
  }
}

void LadderSimulator::record_sample(TransientTrace& trace, int sample_index) {
  const int nodes = node_count();

  // acceleration from the mass-matrix solve, needed for the CJ current part;
  // f_now_ already holds the rhs at the committed state
  mass_cprime_[0] = mass_off_[0] / mass_diag_[0];
  accel_[0] = f_now_[0] / mass_diag_[0];
  for (int n = 1; n < nodes; ++n) {
    double denom = mass_diag_[n] - mass_off_[n - 1] * mass_cprime_[n - 1];
    if (n + 1 < nodes) mass_cprime_[n] = mass_off_[n] / denom;
    accel_[n] = (f_now_[n] - mass_off_[n - 1] * accel_[n - 1]) / denom;
  }
  for (int n = nodes - 2; n >= 0; --n)
    accel_[n] -= mass_cprime_[n] * accel_[n + 1];

  for (size_t r = 0; r < trace.nodes.size(); ++r) {
    int idx = trace.nodes[r] - 1;
    trace.v[r][sample_index] = v_[idx];
    double current;
    if (idx == nodes - 1) {
      current = gt_ * v_[idx];  // load current at the output node
    } else {
      double dphi = phi_[idx] - phi_[idx + 1];
      current = dphi * inv_L_ + ic_ * std::sin(dphi * inv_phi0_) +
                gj_ * (v_[idx] - v_[idx + 1]) +
                cj_ * (accel_[idx] - accel_[idx + 1]);
    }
    trace.i[r][sample_index] = current;
  }

  // junction phase excursion around the bias point, recorded window only
  double ex = 0.0;
  for (int n = 0; n + 1 < nodes; ++n) {
    double ph = (phi_[n] - phi_[n + 1]) / phi0;
    ex = std::max(ex, std::abs(ph - spec_.bias.phi_dc));
  }
  diag_.max_phase_excursion = std::max(diag_.max_phase_excursion, ex);
}

TransientTrace LadderSimulator::run_protocol(const Protocol& protocol,
                                             const RecordingSpec& rec) {
  protocol.validate();
  const double df = protocol.df();
  if (drive_.pump_amp != 0.0) require_on_grid(drive_.pump_freq, df, "pump frequency");
  if (drive_.signal_amp != 0.0)
    require_on_grid(drive_.signal_freq, df, "signal frequency");

  reset();
  const int samples = protocol.samples();
  const long start_step = std::lround(protocol.discard / protocol.dt);

  TransientTrace trace;
  trace.dt = protocol.dt;
  trace.t_start = protocol.discard;
  trace.samples = samples;
  trace.total_nodes = node_count();
  trace.nodes = rec.nodes;
  for (int node : trace.nodes)
    if (node < 1 || node > node_count())
      throw std::invalid_argument("run_protocol: recorded node out of range");
  trace.v.assign(trace.nodes.size(), std::vector<double>(samples, 0.0));
  trace.i.assign(trace.nodes.size(), std::vector<double>(samples, 0.0));
  trace.drive = drive_;
  trace.Z0 = spec_.Z0;
  trace.Rt = spec_.Rt;

  const long last_step = start_step + samples - 1;
  for (long s = 0; s <= last_step; ++s) {
    if (s >= start_step) record_sample(trace, int(s - start_step));
    if (s < last_step) step(protocol.dt);
  }
  // note: sample k holds the state at t = discard + k*dt
  trace.diag = diag_;
  return trace;
}

TransientTrace standard_protocol(const LineSpec& spec, const DriveSpec& drive,
                                 const Protocol& protocol,
                                 const RecordingSpec& rec) {
  LadderSimulator sim(spec, drive);
  return sim.run_protocol(protocol, rec);
}

void write_trace_csv(const TransientTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# nodes=%d dt_s=%.12g t_start_s=%.12g samples=%d\n",
                trace.total_nodes, trace.dt, trace.t_start, trace.samples);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "# drive: Ip=%.12g A fp=%.12g Hz Is=%.12g A fs=%.12g Hz "
                "Idc=%.12g A ramp=%.12g s\n",
                trace.drive.pump_amp, trace.drive.pump_freq,
                trace.drive.signal_amp, trace.drive.signal_freq,
                trace.drive.Idc, trace.drive.ramp_time);
  out << buf;
  out << "t_s";
  for (int node : trace.nodes) out << ",v" << node << "_V,i" << node << "_A";
  out << "\n";
  for (int k = 0; k < trace.samples; ++k) {
    std::snprintf(buf, sizeof buf, "%.12g", trace.t_start + k * trace.dt);
    out << buf;
    for (size_t r = 0; r < trace.nodes.size(); ++r) {
      std::snprintf(buf, sizeof buf, ",%.12g,%.12g", trace.v[r][k],
                    trace.i[r][k]);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace jtwpa
