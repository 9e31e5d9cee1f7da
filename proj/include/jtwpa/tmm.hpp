#pragma once

#include <complex>
#include <span>
#include <vector>

#include "jtwpa/squid.hpp"

namespace jtwpa {

using cplx = std::complex<double>;

// ABCD matrix of a reciprocal two-port (det = 1).
struct TransferMatrix {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  cplx det() const { return a * d - b * c; }
  cplx half_trace() const { return 0.5 * (a + d); }

  static TransferMatrix identity() { return {}; }
  static TransferMatrix series_impedance(cplx z) { return {1.0, z, 0.0, 1.0}; }
  static TransferMatrix shunt_admittance(cplx y) { return {1.0, 0.0, y, 1.0}; }
};

TransferMatrix operator*(const TransferMatrix& lhs, const TransferMatrix& rhs);
TransferMatrix matrix_power(TransferMatrix t, int n);
TransferMatrix cascade(std::span<const TransferMatrix> sections);

// Whether the series branch includes the subgap resistance.
enum class BranchModel { lossless, with_rj };

// ABCD matrix of one pi-type unit cell: shunt Cn/2, rf-SQUID branch, shunt
// Cn/2. The lossless form reproduces the closed-form coefficients of the
// equivalent L_S0 || CJ branch; with_rj generalizes the branch impedance to
// [1/(iwL_S0) + iwCJ + 1/RJ]^-1.
TransferMatrix cell_transfer_matrix(double omega, double L_S0, double CJ,
                                    double Cn, double RJ,
                                    BranchModel model = BranchModel::lossless);

// One loading period (m cells in profile order) at angular frequency omega.
TransferMatrix period_matrix(const LineSpec& spec, double omega,
                             BranchModel model = BranchModel::lossless);

// Full line: the period matrix raised to cells/m.
TransferMatrix line_matrix(const LineSpec& spec, double omega,
                           BranchModel model = BranchModel::lossless);

struct StopBand {
  double f_lo = 0.0;  // Hz
  double f_hi = 0.0;  // Hz
  double width() const { return f_hi - f_lo; }
};

// Bloch wavenumber per cell on a frequency grid, extended-zone convention:
// Re(k*m) increases band by band (band j spans [(j-1)pi, j*pi]); inside gap j
// Re(k*m) is pinned to j*pi and Im(k) carries the evanescent decay.
struct DispersionResult {
  std::vector<double> freq;  // Hz, ascending
  std::vector<cplx> k;       // rad/cell
  std::vector<char> in_gap;
  std::vector<StopBand> stop_bands;
  double k_m = 0.0;                     // loading wavenumber 2*pi/m, rad/cell
  std::vector<double> gap_center_freq;  // analytic (j*pi/m)*omega0 / 2pi

  bool in_stop_band(double f) const;
  // Linear interpolation of Re(k); band-edge evaluations should land on grid.
  double re_k(double f) const;
  cplx k_at(double f) const;
};

DispersionResult bloch_dispersion(const LineSpec& spec,
                                  std::span<const double> freq_grid,
                                  BranchModel model = BranchModel::lossless);

// Convenience uniform grid [f_lo, f_hi] with the given step.
std::vector<double> frequency_grid(double f_lo, double f_hi, double step);

// Phase mismatch of one parasitic mixing process at a given signal frequency.
struct ProcessMismatch {
  double dk = 0.0;      // rad/cell
  double xi = 0.0;      // pi/|dk|, cells
  bool blocked = false; // tone falls inside a stop band
};

// dk(fs) = k(fp) - k(fs) - k(fp-fs) plus the unwanted p+s, p+i and 2p
// processes evaluated from the same dispersion result.
struct MismatchCurve {
  double fp = 0.0;
  std::vector<double> fs;
  std::vector<double> dk;  // rad/cell
  std::vector<double> xi;  // cells
  std::vector<ProcessMismatch> pump_plus_signal;
  std::vector<ProcessMismatch> pump_plus_idler;
  std::vector<ProcessMismatch> second_harmonic;
};

MismatchCurve phase_mismatch(const DispersionResult& disp, double fp,
                             std::span<const double> fs_grid);

struct SParameterSet {
  std::vector<double> freq;  // Hz
  std::vector<cplx> S11;
  std::vector<cplx> S21;
  double Z0 = 50.0;
  BranchModel model = BranchModel::lossless;
};

SParameterSet linear_s_parameters(const LineSpec& spec,
                                  std::span<const double> freq_grid, double Z0,
                                  BranchModel model = BranchModel::lossless);

// Median spacing of adjacent |S11| minima in [f_lo, f_hi]. Throws if fewer
// than three minima are found.
double side_lobe_spacing(const SParameterSet& sp, double f_lo, double f_hi);

}  // namespace jtwpa
