#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jtwpa/squid.hpp"
#include "jtwpa/transient.hpp"

namespace jtwpa {

enum class ScenarioKind {
  dispersion_report,
  tone_evolution,
  gain_sweep,
  phase_sweep,
  reflection_scan,
  uniform_comparison,
  custom,
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

// Declarative description of one experiment. Parsed from a key = value text
// file where every physical quantity carries a unit suffix (84 pH, 12.92 GHz,
// ...); defaults reproduce the published circuit.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::custom;

  // circuit
  double L = 84e-12;
  double Ic = 1.57e-6;
  double CJ = 20e-15;
  double icrj = 16.5e-3;  // V; 0 selects a lossless junction
  double Idc = 9.8e-6;
  double L_S0_pin = 0.0;  // >0 pins the linearized inductance (linear reports)
  double Z0 = 50.0;
  double Rs = 50.0;
  double Rt = 50.0;
  LoadingProfile profile;  // paper loading by default

  // drive
  DriveSpec drive;

  // protocol
  Protocol protocol;

  // sweeps
  double fs_start = 3e9;
  double fs_stop = 10e9;
  double fs_step = 100e6;
  std::vector<double> pump_freqs{12.48e9, 12.92e9};
  std::vector<double> pump_amps{0.01e-6, 1.8e-6};
  int phase_steps = 24;
  double zoom_lo = 4.5e9;
  double zoom_hi = 5.5e9;
  bool fine_grid = false;

  // linear-analysis grids
  double f_lo = 0.1e9;
  double f_hi = 30e9;
  double grid_step = 1e6;

  // execution
  std::string out_dir = "out";
  int workers = 1;

  LineSpec line_spec() const;
  std::string to_text() const;  // canonical serialization (round-trips)
  uint64_t hash() const;
};

ScenarioConfig parse_scenario_config(const std::string& text);
ScenarioConfig load_scenario_config(const std::string& path);

// Built-in defaults for each canned scenario (paper parameters).
ScenarioConfig default_config(ScenarioKind kind);

// "84 pH" -> 8.4e-11 etc.; bare numbers are dimensionless.
double parse_quantity(const std::string& token);

}  // namespace jtwpa
