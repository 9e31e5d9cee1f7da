#include "jtwpa/tmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jtwpa {

using constants::pi;
using constants::two_pi;

TransferMatrix operator*(const TransferMatrix& lhs, const TransferMatrix& rhs) {
  return {lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
          lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
}

TransferMatrix matrix_power(TransferMatrix t, int n) {
  if (n < 0) throw std::invalid_argument("matrix_power: negative exponent");
  TransferMatrix acc = TransferMatrix::identity();
  while (n > 0) {
    if (n & 1) acc = acc * t;
    t = t * t;
    n >>= 1;
  }
  return acc;
}

TransferMatrix cascade(std::span<const TransferMatrix> sections) {
  if (sections.empty()) throw std::invalid_argument("cascade: empty section list");
  TransferMatrix acc = sections[0];
  for (size_t i = 1; i < sections.size(); ++i) acc = acc * sections[i];
  return acc;
}

TransferMatrix cell_transfer_matrix(double omega, double L_S0, double CJ,
                                    double Cn, double RJ, BranchModel model) {
  if (!(omega >= 0.0)) throw std::invalid_argument("cell_transfer_matrix: omega < 0");
  const cplx i(0.0, 1.0);
  if (model == BranchModel::lossless ||
      !(RJ < std::numeric_limits<double>::infinity())) {
    double denom = 1.0 - omega * omega * CJ * L_S0;
    if (std::abs(denom) < 1e-12)
      throw std::domain_error("cell_transfer_matrix: frequency at the branch pole");
    TransferMatrix t;
    t.a = 1.0 - 0.5 * omega * omega * L_S0 * Cn / denom;
    t.b = i * omega * L_S0 / denom;
    t.c = i * omega * Cn -
          0.25 * i * omega * omega * omega * L_S0 * Cn * Cn / denom;
    t.d = t.a;
    return t;
  }
  if (omega == 0.0) return TransferMatrix::identity();
  cplx y_branch = 1.0 / (i * omega * L_S0) + i * omega * CJ + 1.0 / RJ;
  TransferMatrix half = TransferMatrix::shunt_admittance(i * omega * Cn / 2.0);
  return half * TransferMatrix::series_impedance(1.0 / y_branch) * half;
}

TransferMatrix period_matrix(const LineSpec& spec, double omega,
                             BranchModel model) {
  const auto& p = spec.profile;
  TransferMatrix acc = TransferMatrix::identity();
  int m = p.period();
  for (int n = 1; n <= m; ++n)
    acc = acc * cell_transfer_matrix(omega, spec.bias.L_S0, spec.squid.CJ,
                                     p.at(n), spec.squid.RJ, model);
  return acc;
}

TransferMatrix line_matrix(const LineSpec& spec, double omega,
                           BranchModel model) {
  return matrix_power(period_matrix(spec, omega, model),
                      spec.cells() / spec.profile.period());
}

std::vector<double> frequency_grid(double f_lo, double f_hi, double step) {
  if (!(step > 0.0) || !(f_hi > f_lo))
    throw std::invalid_argument("frequency_grid: empty range");
  std::vector<double> grid;
  long n = std::lround((f_hi - f_lo) / step);
  grid.reserve(n + 1);
  for (long q = 0; q <= n; ++q) grid.push_back(f_lo + q * step);
  return grid;
}

bool DispersionResult::in_stop_band(double f) const {
  for (const auto& sb : stop_bands)
    if (f >= sb.f_lo && f <= sb.f_hi) return true;
  return false;
}

double DispersionResult::re_k(double f) const { return k_at(f).real(); }

cplx DispersionResult::k_at(double f) const {
  if (freq.empty()) throw std::logic_error("DispersionResult: empty grid");
  if (f <= freq.front()) return k.front();
  if (f >= freq.back()) return k.back();
  auto it = std::lower_bound(freq.begin(), freq.end(), f);
  size_t j = it - freq.begin();
  if (freq[j] == f) return k[j];
  double w = (f - freq[j - 1]) / (freq[j] - freq[j - 1]);
  return k[j - 1] + w * (k[j] - k[j - 1]);
}

namespace {

// Half-trace of the one-period matrix; real in the lossless model.
double period_half_trace(const LineSpec& spec, double f, BranchModel model) {
  return period_matrix(spec, two_pi * f, model).half_trace().real();
}

// Spurious band-touching points (|half trace| grazing 1) must not be
// reported as gaps; require a minimum detected width.
constexpr double kGapTraceTol = 1e-9;
constexpr double kMinGapWidth = 10e6;  // Hz

}  // namespace

DispersionResult bloch_dispersion(const LineSpec& spec,
                                  std::span<const double> freq_grid,
                                  BranchModel model) {
  if (freq_grid.empty()) throw std::invalid_argument("bloch_dispersion: empty grid");
  const int m = spec.profile.period();

  DispersionResult res;
  res.freq.assign(freq_grid.begin(), freq_grid.end());
  res.k.resize(res.freq.size());
  res.in_gap.resize(res.freq.size());
  res.k_m = two_pi / m;

  // cos(k*m) = half trace of the period matrix. Walk the grid upward from dc
  // keeping track of the band index so Re(k*m) unwraps monotonically.
  int band = 1;
  bool was_in_gap = false;
  for (size_t idx = 0; idx < res.freq.size(); ++idx) {
    double ht = period_half_trace(spec, res.freq[idx], model);
    bool gap = std::abs(ht) > 1.0 + kGapTraceTol;
    if (was_in_gap && !gap) ++band;
    double re_km, im_km;
    if (!gap) {
      double theta = std::acos(std::clamp(ht, -1.0, 1.0));  // [0, pi]
      re_km = (band % 2 == 1) ? (band - 1) * pi + theta : band * pi - theta;
      im_km = 0.0;
    } else {
      re_km = band * pi;
      im_km = std::acosh(std::abs(ht));
    }
    res.k[idx] = cplx(re_km / m, im_km / m);
    res.in_gap[idx] = gap ? 1 : 0;
    was_in_gap = gap;
  }

  // Stop bands: maximal runs of in-gap points, edges refined by bisection.
  auto edge = [&](double f_in, double f_out) {
    for (int it = 0; it < 60; ++it) {
      double f_mid = 0.5 * (f_in + f_out);
      if (std::abs(period_half_trace(spec, f_mid, model)) > 1.0 + kGapTraceTol)
        f_in = f_mid;
      else
        f_out = f_mid;
    }
    return 0.5 * (f_in + f_out);
  };
  size_t idx = 0;
  while (idx < res.freq.size()) {
    if (!res.in_gap[idx]) {
      ++idx;
      continue;
    }
    size_t first = idx;
    while (idx < res.freq.size() && res.in_gap[idx]) ++idx;
    size_t last = idx - 1;
    StopBand sb;
    sb.f_lo = (first == 0) ? res.freq[first]
                           : edge(res.freq[first], res.freq[first - 1]);
    sb.f_hi = (last + 1 == res.freq.size())
                  ? res.freq[last]
                  : edge(res.freq[last], res.freq[last + 1]);
    if (sb.width() >= kMinGapWidth) res.stop_bands.push_back(sb);
  }

  // Analytic gap-center predictions omega_j = (j*pi/m)*omega0.
  double f0 = spec.scales.omega0 / two_pi;
  for (int j = 1;; ++j) {
    double fc = j * pi / m * f0;
    if (fc > res.freq.back()) break;
    res.gap_center_freq.push_back(fc);
  }
  return res;
}

namespace {

ProcessMismatch process_mismatch(const DispersionResult& disp, double f_tone,
                                 double k_sum) {
  ProcessMismatch pm;
  pm.blocked = disp.in_stop_band(f_tone);
  pm.dk = disp.re_k(f_tone) - k_sum;
  pm.xi = pm.blocked ? 0.0 : pi / std::abs(pm.dk);
  return pm;
}

}  // namespace

MismatchCurve phase_mismatch(const DispersionResult& disp, double fp,
                             std::span<const double> fs_grid) {
  MismatchCurve mc;
  mc.fp = fp;
  double kp = disp.re_k(fp);
  for (double fs : fs_grid) {
    if (!(fs > 0.0) || !(fs < fp))
      throw std::invalid_argument("phase_mismatch: need 0 < fs < fp");
    double fi = fp - fs;
    double ks = disp.re_k(fs);
    double ki = disp.re_k(fi);
    mc.fs.push_back(fs);
    mc.dk.push_back(kp - ks - ki);
    mc.xi.push_back(pi / std::abs(kp - ks - ki));
    mc.pump_plus_signal.push_back(process_mismatch(disp, fp + fs, kp + ks));
    mc.pump_plus_idler.push_back(process_mismatch(disp, fp + fi, kp + ki));
    mc.second_harmonic.push_back(process_mismatch(disp, 2.0 * fp, 2.0 * kp));
  }
  return mc;
}

SParameterSet linear_s_parameters(const LineSpec& spec,
                                  std::span<const double> freq_grid, double Z0,
                                  BranchModel model) {
  SParameterSet sp;
  sp.freq.assign(freq_grid.begin(), freq_grid.end());
  sp.Z0 = Z0;
  sp.model = model;
  sp.S11.reserve(sp.freq.size());
  sp.S21.reserve(sp.freq.size());
  for (double f : sp.freq) {
    TransferMatrix t = line_matrix(spec, two_pi * f, model);
    cplx denom = t.a + t.b / Z0 + t.c * Z0 + t.d;
    sp.S11.push_back((t.a + t.b / Z0 - t.c * Z0 - t.d) / denom);
    sp.S21.push_back(2.0 / denom);
  }
  return sp;
}

double side_lobe_spacing(const SParameterSet& sp, double f_lo, double f_hi) {
  // Local minima of |S11| with a small relative prominence filter to ignore
  // floating-point wiggles on smooth curves.
  std::vector<double> minima;
  for (size_t j = 1; j + 1 < sp.freq.size(); ++j) {
    double f = sp.freq[j];
    if (f < f_lo || f > f_hi) continue;
    double prev = std::abs(sp.S11[j - 1]);
    double cur = std::abs(sp.S11[j]);
    double next = std::abs(sp.S11[j + 1]);
    if (cur < prev && cur <= next) {
      double neighbor = std::max(prev, next);
      if (neighbor - cur > 1e-9 * neighbor) minima.push_back(f);
    }
  }
  if (minima.size() < 3)
    throw std::runtime_error("side_lobe_spacing: fewer than 3 |S11| minima in band");
  std::vector<double> spacing;
  for (size_t j = 1; j < minima.size(); ++j)
    spacing.push_back(minima[j] - minima[j - 1]);
  std::sort(spacing.begin(), spacing.end());
  size_t n = spacing.size();
  return (n % 2 == 1) ? spacing[n / 2]
                      : 0.5 * (spacing[n / 2 - 1] + spacing[n / 2]);
}

}  // namespace jtwpa
