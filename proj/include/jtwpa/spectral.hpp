#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "jtwpa/transient.hpp"

namespace jtwpa {

// Forward DFT with 1/M normalization, X_q = (1/M) sum_tau x_tau e^{-2pi i tau q/M}.
// Mixed-radix FFT; any length is accepted (smooth lengths are fast).
std::vector<std::complex<double>> dft_forward(std::span<const double> x);

// Single bin of the same transform (Goertzel recurrence).
std::complex<double> dft_bin(std::span<const double> x, int q);

// Per-node spectra of a trace at a selected set of bins. Values are the raw
// 1/M-normalized DFT coefficients; the physical tone amplitude at bin q > 0
// is 2|X_q|.
struct SpectralFrame {
  double df = 0.0;
  int samples = 0;
  std::vector<int> nodes;
  std::vector<int> bins;
  std::vector<std::vector<std::complex<double>>> V;  // [bin][recorded node]
  std::vector<std::vector<std::complex<double>>> I;
};

SpectralFrame dft(const TransientTrace& trace, std::span<const int> bins);

// One mixing tone: complex node voltage/current phasors (peak convention)
// and the per-node power P_n = 0.5*Re{V_n I_n*}.
struct ToneField {
  std::string label;
  double freq = 0.0;
  int bin = 0;
  bool degenerate = false;  // signal and idler share this bin
  std::vector<int> nodes;
  std::vector<std::complex<double>> V;
  std::vector<std::complex<double>> I;
  std::vector<double> P;  // W
};

// The six 3WM tones {s, i, p, p+s, p+i, 2p} for a pump/signal pair. All tone
// frequencies must sit exactly on the DFT grid.
std::vector<ToneField> extract_tones(const TransientTrace& trace, double fp,
                                     double fs);

// A single tone at an arbitrary on-grid frequency.
ToneField extract_tone(const TransientTrace& trace, double f,
                       const std::string& label = "tone");

struct PortWaves {
  std::complex<double> S11;
  std::complex<double> S21;
};

// S-parameters from the tone fields at the line ends (input node 1, output
// node N+1, I_out = V_out/Rt by construction).
PortWaves s_parameters(const ToneField& tone, double Z0, int input_node,
                       int output_node);

double transducer_gain_db(std::complex<double> s21);

// Power of the incident (forward) wave at the input node, |V + Z0*I|^2/(8*Z0).
double incident_power(const ToneField& tone, double Z0, int input_node);

// Pump power converted into harmonics (2fp, 3fp, ... up to Nyquist),
// referenced to the incident pump power. The pump and its harmonics exchange
// power cyclically along the line, so the peak fraction over the recorded
// nodes is reported alongside the output value.
struct HarmonicConversion {
  double incident_pump = 0.0;   // W
  double harmonics_out = 0.0;   // W, at the output node
  double fraction = 0.0;        // max over recorded nodes
  double fraction_out = 0.0;    // at the output node
};
HarmonicConversion harmonic_conversion(const TransientTrace& trace, double fp);

// Least-squares fit of the signal/idler envelopes to the 3WM growth model
// A_s ~ cosh(g n), A_i ~ sinh(g n) with a common gain coefficient g.
struct GrowthFit {
  double g = 0.0;         // 1/cell
  double amp_signal = 0.0;
  double amp_idler = 0.0;
  double residual = 0.0;  // rms of the log-envelope misfit
  bool rejected = false;
  std::string reason;
};
GrowthFit fit_growth(const ToneField& signal, const ToneField& idler);

// Dominant spatial period of an undulating tone, from the median spacing of
// local maxima of P_n. Throws when fewer than 3 maxima exist.
double beating_period(const ToneField& tone);

inline double watt_to_dbm(double p) { return 10.0 * std::log10(p / 1e-3); }

}  // namespace jtwpa
