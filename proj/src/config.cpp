#include "jtwpa/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jtwpa {

namespace {

const std::map<std::string, double>& unit_table() {
  static const std::map<std::string, double> units = {
      {"H", 1.0},    {"uH", 1e-6},  {"nH", 1e-9},  {"pH", 1e-12},
      {"F", 1.0},    {"nF", 1e-9},  {"pF", 1e-12}, {"fF", 1e-15},
      {"A", 1.0},    {"mA", 1e-3},  {"uA", 1e-6},  {"nA", 1e-9},
      {"V", 1.0},    {"mV", 1e-3},  {"uV", 1e-6},
      {"ohm", 1.0},  {"Ohm", 1.0},  {"kohm", 1e3},
      {"Hz", 1.0},   {"kHz", 1e3},  {"MHz", 1e6},  {"GHz", 1e9},
      {"s", 1.0},    {"us", 1e-6},  {"ns", 1e-9},  {"ps", 1e-12},
      {"rad", 1.0},  {"deg", constants::pi / 180.0},
  };
  return units;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

// fixed decimal exponent formatting so serialized configs are reproducible
std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

double parse_quantity(const std::string& token) {
  std::istringstream ss(trim(token));
  double value;
  if (!(ss >> value))
    throw std::invalid_argument("parse_quantity: cannot parse '" + token + "'");
  std::string unit;
  ss >> unit;
  if (unit.empty()) return value;
  auto it = unit_table().find(unit);
  if (it == unit_table().end())
    throw std::invalid_argument("parse_quantity: unknown unit '" + unit + "'");
  std::string rest;
  if (ss >> rest)
    throw std::invalid_argument("parse_quantity: trailing garbage in '" + token + "'");
  return value * it->second;
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::dispersion_report: return "dispersion-report";
    case ScenarioKind::tone_evolution: return "tone-evolution";
    case ScenarioKind::gain_sweep: return "gain-sweep";
    case ScenarioKind::phase_sweep: return "phase-sweep";
    case ScenarioKind::reflection_scan: return "reflection-scan";
    case ScenarioKind::uniform_comparison: return "uniform-comparison";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "dispersion-report" || name == "dispersion") return ScenarioKind::dispersion_report;
  if (name == "tone-evolution" || name == "tones") return ScenarioKind::tone_evolution;
  if (name == "gain-sweep" || name == "gain") return ScenarioKind::gain_sweep;
  if (name == "phase-sweep" || name == "phase") return ScenarioKind::phase_sweep;
  if (name == "reflection-scan" || name == "reflect") return ScenarioKind::reflection_scan;
  if (name == "uniform-comparison" || name == "uniform") return ScenarioKind::uniform_comparison;
  if (name == "custom") return ScenarioKind::custom;
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

LineSpec ScenarioConfig::line_spec() const {
  SquidParams squid;
  squid.L = L;
  squid.Ic = Ic;
  squid.CJ = CJ;
  squid.RJ = (icrj > 0.0 && Ic > 0.0)
                 ? icrj / Ic
                 : std::numeric_limits<double>::infinity();
  LineSpec spec = make_line_spec(squid, Idc, profile, Z0, Rs, Rt);
  if (L_S0_pin > 0.0) spec = pin_small_signal_inductance(spec, L_S0_pin);
  return spec;
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream os;
  auto emit = [&](const char* key, double v, const char* unit, double scale) {
    os << key << " = " << format_number(v / scale) << " " << unit << "\n";
  };
  os << "scenario = " << to_string(kind) << "\n";
  emit("L", L, "pH", 1e-12);
  emit("Ic", Ic, "uA", 1e-6);
  emit("CJ", CJ, "fF", 1e-15);
  emit("IcRJ", icrj, "mV", 1e-3);
  emit("Idc", Idc, "uA", 1e-6);
  if (L_S0_pin > 0.0) emit("L_S0", L_S0_pin, "pH", 1e-12);
  emit("Z0", Z0, "ohm", 1.0);
  emit("Rs", Rs, "ohm", 1.0);
  emit("Rt", Rt, "ohm", 1.0);
  emit("C01", profile.C01, "fF", 1e-15);
  emit("C02", profile.C02, "fF", 1e-15);
  emit("C03", profile.C03, "fF", 1e-15);
  os << "kappa = " << profile.kappa << "\n";
  os << "mu = " << profile.mu << "\n";
  os << "nu = " << profile.nu << "\n";
  os << "N = " << profile.cells << "\n";
  emit("pump_amp", drive.pump_amp, "uA", 1e-6);
  emit("pump_freq", drive.pump_freq, "GHz", 1e9);
  emit("pump_phase", drive.pump_phase, "rad", 1.0);
  emit("signal_amp", drive.signal_amp, "uA", 1e-6);
  emit("signal_freq", drive.signal_freq, "GHz", 1e9);
  emit("signal_phase", drive.signal_phase, "rad", 1.0);
  emit("ramp_time", drive.ramp_time, "ns", 1e-9);
  emit("dt", protocol.dt, "ps", 1e-12);
  emit("discard", protocol.discard, "ns", 1e-9);
  emit("record", protocol.record, "ns", 1e-9);
  emit("fs_start", fs_start, "GHz", 1e9);
  emit("fs_stop", fs_stop, "GHz", 1e9);
  emit("fs_step", fs_step, "MHz", 1e6);
  os << "pump_freqs = ";
  for (size_t j = 0; j < pump_freqs.size(); ++j)
    os << (j ? ", " : "") << format_number(pump_freqs[j] / 1e9) << " GHz";
  os << "\n";
  os << "pump_amps = ";
  for (size_t j = 0; j < pump_amps.size(); ++j)
    os << (j ? ", " : "") << format_number(pump_amps[j] / 1e-6) << " uA";
  os << "\n";
  os << "phase_steps = " << phase_steps << "\n";
  emit("zoom_lo", zoom_lo, "GHz", 1e9);
  emit("zoom_hi", zoom_hi, "GHz", 1e9);
  os << "fine_grid = " << (fine_grid ? "true" : "false") << "\n";
  emit("f_lo", f_lo, "GHz", 1e9);
  emit("f_hi", f_hi, "GHz", 1e9);
  emit("grid_step", grid_step, "MHz", 1e6);
  os << "out_dir = " << out_dir << "\n";
  os << "workers = " << workers << "\n";
  return os.str();
}

uint64_t ScenarioConfig::hash() const {
  // identifies the scenario content; where it runs and how many workers
  // execute it do not change the results
  std::istringstream ss(to_text());
  std::string line, canonical;
  while (std::getline(ss, line)) {
    if (line.rfind("out_dir", 0) == 0 || line.rfind("workers", 0) == 0) continue;
    canonical += line;
    canonical += '\n';
  }
  return fnv1a(canonical);
}

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    auto q = [&] { return parse_quantity(value); };
    auto qlist = [&] {
      std::vector<double> out;
      for (const auto& item : split(value, ',')) out.push_back(parse_quantity(item));
      return out;
    };
    auto b = [&] {
      if (value == "true") return true;
      if (value == "false") return false;
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected true/false");
    };
    if (key == "scenario") cfg.kind = scenario_kind_from_string(value);
    else if (key == "L") cfg.L = q();
    else if (key == "Ic") cfg.Ic = q();
    else if (key == "CJ") cfg.CJ = q();
    else if (key == "IcRJ") cfg.icrj = q();
    else if (key == "Idc") cfg.Idc = q();
    else if (key == "L_S0") cfg.L_S0_pin = q();
    else if (key == "Z0") cfg.Z0 = q();
    else if (key == "Rs") cfg.Rs = q();
    else if (key == "Rt") cfg.Rt = q();
    else if (key == "C01") cfg.profile.C01 = q();
    else if (key == "C02") cfg.profile.C02 = q();
    else if (key == "C03") cfg.profile.C03 = q();
    else if (key == "kappa") cfg.profile.kappa = int(q());
    else if (key == "mu") cfg.profile.mu = int(q());
    else if (key == "nu") cfg.profile.nu = int(q());
    else if (key == "N") cfg.profile.cells = int(q());
    else if (key == "pump_amp") cfg.drive.pump_amp = q();
    else if (key == "pump_freq") cfg.drive.pump_freq = q();
    else if (key == "pump_phase") cfg.drive.pump_phase = q();
    else if (key == "signal_amp") cfg.drive.signal_amp = q();
    else if (key == "signal_freq") cfg.drive.signal_freq = q();
    else if (key == "signal_phase") cfg.drive.signal_phase = q();
    else if (key == "ramp_time") cfg.drive.ramp_time = q();
    else if (key == "dt") cfg.protocol.dt = q();
    else if (key == "discard") cfg.protocol.discard = q();
    else if (key == "record") cfg.protocol.record = q();
    else if (key == "fs_start") cfg.fs_start = q();
    else if (key == "fs_stop") cfg.fs_stop = q();
    else if (key == "fs_step") cfg.fs_step = q();
    else if (key == "pump_freqs") cfg.pump_freqs = qlist();
    else if (key == "pump_amps") cfg.pump_amps = qlist();
    else if (key == "phase_steps") cfg.phase_steps = int(q());
    else if (key == "zoom_lo") cfg.zoom_lo = q();
    else if (key == "zoom_hi") cfg.zoom_hi = q();
    else if (key == "fine_grid") cfg.fine_grid = b();
    else if (key == "f_lo") cfg.f_lo = q();
    else if (key == "f_hi") cfg.f_hi = q();
    else if (key == "grid_step") cfg.grid_step = q();
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "workers") cfg.workers = int(q());
    else
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig cfg;  // paper circuit by default
  cfg.kind = kind;
  switch (kind) {
    case ScenarioKind::tone_evolution:
      cfg.drive.pump_amp = 2.0e-6;
      cfg.drive.pump_freq = 12.92e9;
      cfg.drive.signal_amp = 0.01e-6;
      cfg.drive.signal_freq = 6.7e9;
      break;
    case ScenarioKind::gain_sweep:
      cfg.drive.pump_amp = 1.8e-6;
      cfg.drive.signal_amp = 0.01e-6;
      break;
    case ScenarioKind::phase_sweep:
      cfg.drive.pump_amp = 1.8e-6;
      cfg.drive.pump_freq = 12.48e9;
      cfg.drive.signal_amp = 0.01e-6;
      cfg.drive.signal_freq = 6.24e9;  // fp/2
      break;
    case ScenarioKind::reflection_scan:
      cfg.f_lo = 11.8e9;
      cfg.f_hi = 13.4e9;
      cfg.grid_step = 40e6;
      break;
    case ScenarioKind::uniform_comparison:
      cfg.profile = LoadingProfile::uniform(40e-15, cfg.profile.cells);
      cfg.drive.pump_amp = 2.0e-6;
      cfg.drive.pump_freq = 12.92e9;
      cfg.drive.signal_amp = 0.01e-6;
      cfg.drive.signal_freq = 8.0e9;
      break;
    case ScenarioKind::dispersion_report:
      cfg.L_S0_pin = 109e-12;  // the published linear-analysis inductance
      break;
    case ScenarioKind::custom:
      break;
  }
  return cfg;
}

}  // namespace jtwpa
