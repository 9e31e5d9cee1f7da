#include "jtwpa/squid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jtwpa {

using constants::phi0;

SquidParams SquidParams::with_icrj(double L, double Ic, double CJ, double icrj) {
  SquidParams p;
  p.L = L;
  p.Ic = Ic;
  p.CJ = CJ;
  p.RJ = (Ic > 0.0) ? icrj / Ic : std::numeric_limits<double>::infinity();
  p.validate();
  return p;
}

void SquidParams::validate() const {
  if (!(L > 0.0)) throw std::invalid_argument("SquidParams: L must be positive");
  if (!(Ic >= 0.0)) throw std::invalid_argument("SquidParams: Ic must be non-negative");
  if (!(CJ > 0.0)) throw std::invalid_argument("SquidParams: CJ must be positive");
  if (!(RJ > 0.0)) throw std::invalid_argument("SquidParams: RJ must be positive");
}

double screening_parameter(double L, double Ic) {
  if (!(L > 0.0)) throw std::invalid_argument("screening_parameter: L must be positive");
  if (!(Ic >= 0.0)) throw std::invalid_argument("screening_parameter: Ic must be non-negative");
  return L * Ic / phi0;
}

double solve_dc_phase(double phi_e, double beta_L) {
  if (!(beta_L >= 0.0) || beta_L >= 1.0)
    throw std::invalid_argument("solve_dc_phase: need 0 <= beta_L < 1");

  // f(phi) = phi + beta_L*sin(phi) is strictly increasing, so the root lies
  // in [phi_e - beta_L, phi_e + beta_L].
  double lo = phi_e - beta_L;
  double hi = phi_e + beta_L;
  double x = phi_e;
  for (int it = 0; it < 100; ++it) {
    double f = x + beta_L * std::sin(x) - phi_e;
    if (std::abs(f) < 1e-12) return x;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double df = 1.0 + beta_L * std::cos(x);
    double step = f / df;
    double xn = x - step;
    if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
    x = xn;
  }
  return x;
}

double small_signal_inductance(double L, double beta_L, double phi_dc) {
  double denom = 1.0 + beta_L * std::cos(phi_dc);
  if (!(denom > 0.0))
    throw std::invalid_argument("small_signal_inductance: invalid bias, 1 + beta_L*cos(phi_dc) <= 0");
  return L / denom;
}

NonlinearityCoeffs nonlinearity_coeffs(double beta_L, double phi_dc) {
  double denom = 1.0 + beta_L * std::cos(phi_dc);
  if (!(denom > 0.0))
    throw std::invalid_argument("nonlinearity_coeffs: invalid bias, 1 + beta_L*cos(phi_dc) <= 0");
  return {beta_L / 2.0 * std::sin(phi_dc) / denom,
          beta_L / 6.0 * std::cos(phi_dc) / denom};
}

BiasPoint make_bias_point(const SquidParams& squid, double Idc) {
  squid.validate();
  double beta_L = screening_parameter(squid.L, squid.Ic);
  if (beta_L >= 1.0)
    throw std::invalid_argument("make_bias_point: beta_L = " + std::to_string(beta_L) +
                                " >= 1 (hysteretic SQUID)");
  BiasPoint bp;
  bp.Idc = Idc;
  bp.phi_e = squid.L * Idc / phi0;
  bp.phi_dc = solve_dc_phase(bp.phi_e, beta_L);
  bp.L_S0 = small_signal_inductance(squid.L, beta_L, bp.phi_dc);
  auto nl = nonlinearity_coeffs(beta_L, bp.phi_dc);
  bp.beta = nl.beta;
  bp.gamma = nl.gamma;
  return bp;
}

double LoadingProfile::at(int n) const {
  // Segment order [C01 x kappa, C03 x nu, C01 x kappa, C02 x mu]. The first
  // segment is C01 as published; placing the C02 run at the period end keeps
  // the in-band side-lobe envelope at the published -19 dB level (the
  // mirrored order starting with C02 raises it to -8 dB and drives the
  // pumped line into parametric self-oscillation).
  int m = period();
  int r = (n - 1) % m;  // position inside the loading period, 0-based
  if (r < kappa) return C01;
  r -= kappa;
  if (r < nu) return C03;
  r -= nu;
  if (r < kappa) return C01;
  return C02;
}

std::vector<double> LoadingProfile::sequence() const {
  validate();
  std::vector<double> c(cells);
  for (int n = 1; n <= cells; ++n) c[n - 1] = at(n);
  return c;
}

double LoadingProfile::mean_capacitance() const {
  int m = period();
  return (2.0 * kappa * C01 + double(mu) * C02 + double(nu) * C03) / m;
}

bool LoadingProfile::is_uniform() const {
  return (kappa == 0 || C01 == C02) && (nu == 0 || C03 == C02) &&
         (mu + 2 * kappa > 0);
}

void LoadingProfile::validate() const {
  if (kappa < 0 || mu < 0 || nu < 0)
    throw std::invalid_argument("LoadingProfile: segment lengths must be non-negative");
  if (period() < 1) throw std::invalid_argument("LoadingProfile: empty loading period");
  if (cells < 1) throw std::invalid_argument("LoadingProfile: need at least one cell");
  if (cells % period() != 0)
    throw std::invalid_argument("LoadingProfile: cell count " + std::to_string(cells) +
                                " is not a multiple of the loading period " +
                                std::to_string(period()));
  if (!(C01 > 0.0) || !(C02 > 0.0) || !(C03 > 0.0))
    throw std::invalid_argument("LoadingProfile: capacitances must be positive");
}

LoadingProfile LoadingProfile::uniform(double c, int cells) {
  LoadingProfile p;
  p.C01 = p.C02 = p.C03 = c;
  p.kappa = 0;
  p.mu = 1;
  p.nu = 0;
  p.cells = cells;
  p.validate();
  return p;
}

DerivedScales derived_scales(double L_S0, double CJ, double Cbar) {
  DerivedScales s;
  s.Cbar = Cbar;
  s.omega0 = 1.0 / std::sqrt(L_S0 * Cbar);
  s.omegaJ = 1.0 / std::sqrt(L_S0 * CJ);
  s.omegaC = 2.0 / std::sqrt(L_S0 * (Cbar + 4.0 * CJ));
  s.Zbar = std::sqrt(L_S0 / Cbar);
  return s;
}

LineSpec make_line_spec(const SquidParams& squid, double Idc,
                        const LoadingProfile& profile, double Z0, double Rs,
                        double Rt) {
  profile.validate();
  if (!(Z0 > 0.0)) throw std::invalid_argument("make_line_spec: Z0 must be positive");
  if (!(Rs > 0.0) || !(Rt > 0.0))
    throw std::invalid_argument("make_line_spec: terminations must be positive");
  LineSpec spec;
  spec.squid = squid;
  spec.bias = make_bias_point(squid, Idc);
  spec.profile = profile;
  spec.Z0 = Z0;
  spec.Rs = Rs;
  spec.Rt = Rt;
  spec.scales = derived_scales(spec.bias.L_S0, squid.CJ, profile.mean_capacitance());
  return spec;
}

LineSpec pin_small_signal_inductance(LineSpec spec, double L_S0) {
  if (!(L_S0 > 0.0))
    throw std::invalid_argument("pin_small_signal_inductance: L_S0 must be positive");
  spec.bias.L_S0 = L_S0;
  spec.scales = derived_scales(L_S0, spec.squid.CJ, spec.profile.mean_capacitance());
  return spec;
}

double approx_dispersion(double omega, double omega0, double omegaJ) {
  double x = omega / omega0;
  double y = omega / omegaJ;
  return x * (1.0 + 0.5 * y * y + x * x / 24.0);
}

double subgap_attenuation_db(int cells, double omega, double L_S0, double Z0,
                             double RJ) {
  if (!(RJ < std::numeric_limits<double>::infinity())) return 0.0;
  return 10.0 * std::log10(std::exp(1.0)) * cells * omega * omega * L_S0 * L_S0 /
         (Z0 * RJ);
}

}  // namespace jtwpa
