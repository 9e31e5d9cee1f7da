#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "jtwpa/config.hpp"
#include "jtwpa/spectral.hpp"
#include "jtwpa/tmm.hpp"
#include "jtwpa/transient.hpp"

namespace jtwpa {

// One transient measurement of the signal-frequency S-parameters.
struct GainPoint {
  double fs = 0.0;
  double gain_db = 0.0;  // transducer gain |S21|^2 in dB
  std::complex<double> S11, S21;
  bool degenerate = false;
  bool failed = false;
  std::string error;
  SolverDiagnostics diag;
};

// Runs the standard protocol for one drive and extracts S11/S21 at the
// signal frequency (ends-only recording).
GainPoint measure_gain_point(const LineSpec& spec, const DriveSpec& drive,
                             const Protocol& protocol);

struct DispersionArtifacts {
  DispersionResult dispersion;
  std::vector<MismatchCurve> mismatch;  // one per configured pump frequency
  std::vector<int> dk_zero_crossings;   // sign changes of dk(fs) per curve
};

struct ToneEvolutionArtifacts {
  std::vector<ToneField> tones;  // {s, i, p, p+s, p+i, 2p}
  GrowthFit fit;
  double signal_gain_db = 0.0;
  double pump_gain_db = 0.0;
  HarmonicConversion harmonics;
  std::optional<double> beat_2p;      // cells
  std::optional<double> beat_pi;      // cells
  double pump_depletion_db = 0.0;     // max/min of the pump power along the line
  bool second_harmonic_tops_pump = false;
  double second_harmonic_below_pump_db = 0.0;  // at the output node
  // median suppression of the up-conversion tones against the signal over
  // the back half of the line (the output-node value rides a beat pattern)
  double ps_below_signal_db = 0.0;
  double pi_below_signal_db = 0.0;
  SolverDiagnostics diag;
};

struct GainProfileArtifacts {
  double fp = 0.0;
  std::vector<GainPoint> points;
  double peak_gain_db = 0.0;
  double bandwidth_3db = 0.0;  // Hz
  double band_lo = 0.0, band_hi = 0.0;
  double ripple_db = 0.0;  // peak-to-peak deviation from a 500 MHz moving median
  std::vector<GainPoint> zoom_points;
  std::optional<double> ripple_spacing;  // Hz, from the fine-grid zoom window
  int failed_points = 0;
};

struct PhaseSweepArtifacts {
  std::vector<double> theta;
  std::vector<double> gain_db;
  double max_gain_db = 0.0;  // refined over theta
  double min_gain_db = 0.0;
  double extinction_db = 0.0;
  double nondegenerate_gain_db = 0.0;  // at fs = fp/2 +- a few bins, pump on
  double period_correlation = 0.0;     // corr(G(theta), G(theta+pi))
};

struct ReflectionScanArtifacts {
  std::vector<double> amps;
  std::vector<std::vector<double>> freq;    // per amplitude
  std::vector<std::vector<double>> s11_db;  // per amplitude (transient)
  SParameterSet tmm;                        // small-signal overlay
  std::vector<double> gap_edge;             // interpolated low edge per amplitude
};

struct UniformComparisonArtifacts {
  ToneEvolutionArtifacts tones;
  GainProfileArtifacts gain;
  double xi_ps = 0.0;  // coherence lengths of the up-conversion processes
  double xi_pi = 0.0;
};

// Scenario runners: execute, write CSV artifacts plus a JSON manifest into
// cfg.out_dir, return the measured results.
DispersionArtifacts run_dispersion_report(const ScenarioConfig& cfg);
ToneEvolutionArtifacts run_tone_evolution(const ScenarioConfig& cfg);
std::vector<GainProfileArtifacts> run_gain_sweep(const ScenarioConfig& cfg);
PhaseSweepArtifacts run_phase_sweep(const ScenarioConfig& cfg);
ReflectionScanArtifacts run_reflection_scan(const ScenarioConfig& cfg);
UniformComparisonArtifacts run_uniform_comparison(const ScenarioConfig& cfg);

// Dispatch on cfg.kind; returns the number of failed sweep points.
int run_scenario(const ScenarioConfig& cfg);

extern const char* const kToolVersion;

}  // namespace jtwpa
