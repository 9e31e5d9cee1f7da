#pragma once

#include <limits>
#include <vector>

#include "jtwpa/constants.hpp"

namespace jtwpa {

// One rf-SQUID: loop inductance L shunted by a Josephson junction with
// critical current Ic, self-capacitance CJ and linear subgap resistance RJ.
// RJ = infinity selects the lossless junction.
struct SquidParams {
  double L = 84e-12;    // H
  double Ic = 1.57e-6;  // A
  double CJ = 20e-15;   // F
  double RJ = std::numeric_limits<double>::infinity();  // ohm

  // Junctions are usually specified through the IcRJ product (V).
  static SquidParams with_icrj(double L, double Ic, double CJ, double icrj);

  bool lossless() const { return !(RJ < std::numeric_limits<double>::infinity()); }
  void validate() const;
};

// beta_L = L*Ic/phi0. The ladder model requires beta_L < 1 (non-hysteretic).
double screening_parameter(double L, double Ic);

// Solves phi + beta_L*sin(phi) = phi_e for the dc junction phase.
// Unique and monotone for 0 <= beta_L < 1; safeguarded Newton, |res| < 1e-12.
double solve_dc_phase(double phi_e, double beta_L);

// L_S0 = L / (1 + beta_L*cos(phi_dc)). Throws on a non-positive denominator.
double small_signal_inductance(double L, double beta_L, double phi_dc);

struct NonlinearityCoeffs {
  double beta;   // non-centrosymmetric (3WM) coefficient, odd in phi_dc
  double gamma;  // Kerr coefficient, even in phi_dc
};
NonlinearityCoeffs nonlinearity_coeffs(double beta_L, double phi_dc);

// Operating point set by the dc current flowing through the ladder,
// phi_e = L*Idc/phi0.
struct BiasPoint {
  double Idc = 0.0;     // A
  double phi_e = 0.0;   // rad
  double phi_dc = 0.0;  // rad
  double L_S0 = 0.0;    // H
  double beta = 0.0;
  double gamma = 0.0;
};
BiasPoint make_bias_point(const SquidParams& squid, double Idc);

// Ground-capacitance pattern of one loading period:
// [C01 x kappa, C02 x mu, C01 x kappa, C03 x nu], repeated cells/m times.
struct LoadingProfile {
  double C01 = 8.8e-15;   // F
  double C02 = 62.3e-15;  // F
  double C03 = 80e-15;    // F
  int kappa = 5;
  int mu = 5;
  int nu = 5;
  int cells = 1500;  // N

  int period() const { return 2 * kappa + mu + nu; }
  double at(int n) const;  // ground capacitance of cell n, n in [1, cells]
  std::vector<double> sequence() const;
  double mean_capacitance() const;  // closed form, no accumulation error
  bool is_uniform() const;
  void validate() const;

  static LoadingProfile uniform(double c, int cells);
};

// Frequency and impedance scales of the equivalent uniform line.
struct DerivedScales {
  double Cbar = 0.0;    // F
  double omega0 = 0.0;  // rad/s, (L_S0*Cbar)^-1/2
  double omegaJ = 0.0;  // rad/s, (L_S0*CJ)^-1/2
  double omegaC = 0.0;  // rad/s, cutoff 2*(L_S0*(Cbar+4CJ))^-1/2
  double Zbar = 0.0;    // ohm, sqrt(L_S0/Cbar)
};
DerivedScales derived_scales(double L_S0, double CJ, double Cbar);

// Complete electrical description of the ladder plus its embedding.
struct LineSpec {
  SquidParams squid;
  BiasPoint bias;
  LoadingProfile profile;
  double Z0 = 50.0;  // reference impedance, ohm
  double Rs = 50.0;  // source shunt resistance at node 1, ohm (inf allowed)
  double Rt = 50.0;  // termination at node N+1, ohm (inf allowed)
  DerivedScales scales;

  int cells() const { return profile.cells; }
};
LineSpec make_line_spec(const SquidParams& squid, double Idc,
                        const LoadingProfile& profile, double Z0 = 50.0,
                        double Rs = 50.0, double Rt = 50.0);

// Same line with the small-signal inductance pinned to a given value instead
// of the bias-chain result (the published linear analysis quotes L_S0
// directly). Derived scales are recomputed.
LineSpec pin_small_signal_inductance(LineSpec spec, double L_S0);

// Weakly dispersive small-k expansion, valid for omega << omega0, omegaJ.
double approx_dispersion(double omega, double omega0, double omegaJ);

// Attenuation of an N-cell line caused by the subgap resistance, in dB.
double subgap_attenuation_db(int cells, double omega, double L_S0, double Z0,
                             double RJ);

}  // namespace jtwpa
