#include "jtwpa/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "jtwpa/csv.hpp"
#include "jtwpa/sweep.hpp"

namespace jtwpa {

const char* const kToolVersion = "0.1.0";

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

double db10(double ratio) { return 10.0 * std::log10(std::max(ratio, 1e-300)); }
double dbm_abs(double p) { return db10(std::abs(p) / 1e-3); }

// Collects emitted files and writes one manifest per scenario invocation.
class ArtifactSession {
 public:
  explicit ArtifactSession(const ScenarioConfig& cfg)
      : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(cfg.out_dir);
    ref_ = hash_hex(cfg.hash());
    manifest_["tool_version"] = kToolVersion;
    manifest_["scenario"] = to_string(cfg.kind);
    manifest_["config_hash"] = ref_;
    manifest_["config"] = cfg.to_text();

    LineSpec spec = cfg.line_spec();
    json r;
    r["beta_L"] = screening_parameter(spec.squid.L, spec.squid.Ic);
    r["phi_e_rad"] = spec.bias.phi_e;
    r["phi_dc_rad"] = spec.bias.phi_dc;
    r["L_S0_H"] = spec.bias.L_S0;
    r["beta"] = spec.bias.beta;
    r["gamma"] = spec.bias.gamma;
    r["Cbar_F"] = spec.scales.Cbar;
    r["Zbar_ohm"] = spec.scales.Zbar;
    r["f0_Hz"] = spec.scales.omega0 / constants::two_pi;
    r["fJ_Hz"] = spec.scales.omegaJ / constants::two_pi;
    r["fc_Hz"] = spec.scales.omegaC / constants::two_pi;
    r["RJ_ohm"] = spec.squid.RJ;
    manifest_["resolved"] = r;
  }

  const std::string& ref() const { return ref_; }

  std::string path(const std::string& name) {
    manifest_["files"].push_back(name);
    return (fs::path(cfg_.out_dir) / name).string();
  }

  void note(const std::string& key, const json& value) { manifest_[key] = value; }

  void add_run_diag(const SolverDiagnostics& d) {
    total_steps_ += d.steps;
    total_newton_ += d.newton_iterations;
    max_newton_ = std::max(max_newton_, d.max_newton_iterations);
    ++runs_;
  }

  void finish() {
    auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() /
        1e3;
    json d;
    d["transient_runs"] = runs_;
    d["total_steps"] = total_steps_;
    d["total_newton_iterations"] = total_newton_;
    d["max_newton_iterations_per_step"] = max_newton_;
    manifest_["integrator"] = d;
    std::ofstream out(fs::path(cfg_.out_dir) / "manifest.json");
    out << manifest_.dump(2) << "\n";
  }

 private:
  ScenarioConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::string ref_;
  json manifest_;
  long runs_ = 0, total_steps_ = 0, total_newton_ = 0;
  int max_newton_ = 0;
};

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

GainPoint measure_gain_point(const LineSpec& spec, const DriveSpec& drive,
                             const Protocol& protocol) {
  GainPoint point;
  point.fs = drive.signal_freq;
  try {
    LadderSimulator sim(spec, drive);
    TransientTrace trace =
        sim.run_protocol(protocol, RecordingSpec::ends_only(spec.cells() + 1));
    point.diag = trace.diag;
    ToneField tone = extract_tone(trace, drive.signal_freq, "s");
    double df = trace.df();
    point.degenerate =
        drive.pump_amp != 0.0 &&
        std::lround(drive.signal_freq / df) ==
            std::lround((drive.pump_freq - drive.signal_freq) / df);
    PortWaves waves = s_parameters(tone, spec.Z0, 1, spec.cells() + 1);
    point.S11 = waves.S11;
    point.S21 = waves.S21;
    point.gain_db = transducer_gain_db(waves.S21);
  } catch (const std::exception& e) {
    point.failed = true;
    point.error = e.what();
  }
  return point;
}

DispersionArtifacts run_dispersion_report(const ScenarioConfig& cfg) {
  ArtifactSession session(cfg);
  LineSpec spec = cfg.line_spec();

  DispersionArtifacts art;
  std::vector<double> grid = frequency_grid(cfg.f_lo, cfg.f_hi, cfg.grid_step);
  art.dispersion = bloch_dispersion(spec, grid);

  {
    CsvWriter csv(session.path("dispersion.csv"), session.ref(),
                  {"f_Hz", "re_k_rad_per_cell", "im_k_rad_per_cell", "in_gap"});
    for (size_t j = 0; j < grid.size(); ++j)
      csv.row({grid[j], art.dispersion.k[j].real(), art.dispersion.k[j].imag(),
               double(art.dispersion.in_gap[j])});
  }
  {
    CsvWriter csv(session.path("stop_bands.csv"), session.ref(),
                  {"f_lo_Hz", "f_hi_Hz", "width_Hz"});
    for (const auto& sb : art.dispersion.stop_bands)
      csv.row({sb.f_lo, sb.f_hi, sb.width()});
  }
  {
    // full-line linear S-parameters on a coarser grid
    std::vector<double> sgrid =
        frequency_grid(cfg.f_lo, cfg.f_hi, std::max(cfg.grid_step, 5e6));
    SParameterSet sp = linear_s_parameters(spec, sgrid, cfg.Z0);
    CsvWriter csv(session.path("sparams_tmm.csv"), session.ref(),
                  {"f_Hz", "S11_dB", "arg_S11_rad", "S21_dB", "arg_S21_rad"});
    for (size_t j = 0; j < sgrid.size(); ++j)
      csv.row({sgrid[j], 20.0 * std::log10(std::abs(sp.S11[j])),
               std::arg(sp.S11[j]), 20.0 * std::log10(std::abs(sp.S21[j])),
               std::arg(sp.S21[j])});
  }

  for (double fp : cfg.pump_freqs) {
    std::vector<double> fs_grid = frequency_grid(0.5e9, fp - 0.5e9, 10e6);
    MismatchCurve mc = phase_mismatch(art.dispersion, fp, fs_grid);
    // crossings inside the usable signal band; close to the band extremes
    // the idler rides the gap edge and the curve swings steeply
    int crossings = 0;
    for (size_t j = 1; j < mc.dk.size(); ++j) {
      if (mc.fs[j] < 2.5e9 || mc.fs[j] > fp - 2.5e9) continue;
      if ((mc.dk[j - 1] < 0) != (mc.dk[j] < 0)) ++crossings;
    }
    art.dk_zero_crossings.push_back(crossings);

    char name[64];
    std::snprintf(name, sizeof name, "mismatch_fp%.0fMHz.csv", fp / 1e6);
    CsvWriter csv(session.path(name), session.ref(),
                  {"fs_Hz", "dk_rad_per_cell", "xi_cells", "dk_ps", "xi_ps",
                   "ps_blocked", "dk_pi", "xi_pi", "pi_blocked", "dk_2p",
                   "xi_2p", "p2_blocked"});
    for (size_t j = 0; j < mc.fs.size(); ++j) {
      const auto& ps = mc.pump_plus_signal[j];
      const auto& pi_ = mc.pump_plus_idler[j];
      const auto& pp = mc.second_harmonic[j];
      csv.row({mc.fs[j], mc.dk[j], mc.xi[j], ps.dk, ps.xi, double(ps.blocked),
               pi_.dk, pi_.xi, double(pi_.blocked), pp.dk, pp.xi,
               double(pp.blocked)});
    }
    art.mismatch.push_back(std::move(mc));
  }
  session.note("gap_count", art.dispersion.stop_bands.size());
  session.finish();
  return art;
}

ToneEvolutionArtifacts run_tone_evolution(const ScenarioConfig& cfg) {
  ArtifactSession session(cfg);
  LineSpec spec = cfg.line_spec();
  ToneEvolutionArtifacts art;

  DriveSpec drive = cfg.drive;
  drive.Idc = cfg.Idc;
  LadderSimulator sim(spec, drive);
  TransientTrace trace = sim.run_protocol(
      cfg.protocol, RecordingSpec::all_nodes(spec.cells() + 1));
  art.diag = trace.diag;
  session.add_run_diag(trace.diag);

  art.tones = extract_tones(trace, cfg.drive.pump_freq, cfg.drive.signal_freq);
  const ToneField& sig = art.tones[0];
  const ToneField& idl = art.tones[1];
  const ToneField& pump = art.tones[2];
  const ToneField& second = art.tones[5];

  art.signal_gain_db = transducer_gain_db(
      s_parameters(sig, spec.Z0, 1, spec.cells() + 1).S21);
  art.pump_gain_db = transducer_gain_db(
      s_parameters(pump, spec.Z0, 1, spec.cells() + 1).S21);
  art.harmonics = harmonic_conversion(trace, cfg.drive.pump_freq);
  art.fit = sig.degenerate ? GrowthFit{.rejected = true,
                                       .reason = "degenerate signal/idler"}
                           : fit_growth(sig, idl);

  try {
    art.beat_2p = beating_period(second);
  } catch (const std::exception&) {
  }
  try {
    art.beat_pi = beating_period(art.tones[4]);
  } catch (const std::exception&) {
  }

  // pump depletion along the line: max over min of |P_p(n)| past the input
  {
    double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
    for (size_t n = 50; n < pump.P.size(); ++n) {
      double p = std::abs(pump.P[n]);
      pmax = std::max(pmax, p);
      pmin = std::min(pmin, p);
      if (std::abs(second.P[n]) > p) art.second_harmonic_tops_pump = true;
    }
    art.pump_depletion_db = db10(pmax / pmin);
  }

  // suppression levels of the parasitic tones
  {
    size_t out = pump.P.size() - 1;
    art.second_harmonic_below_pump_db =
        db10(std::abs(pump.P[out]) / std::abs(second.P[out]));
    auto median_suppression = [&](const ToneField& tone) {
      std::vector<double> ratio;
      for (size_t n = sig.P.size() / 2; n < sig.P.size(); ++n)
        ratio.push_back(db10(std::abs(sig.P[n]) / std::abs(tone.P[n])));
      return median_of(std::move(ratio));
    };
    art.ps_below_signal_db = median_suppression(art.tones[3]);
    art.pi_below_signal_db = median_suppression(art.tones[4]);
  }

  {
    CsvWriter csv(session.path("tones_vs_node.csv"), session.ref(),
                  {"n", "P_s_dBm", "P_i_dBm", "P_p_dBm", "P_ps_dBm",
                   "P_pi_dBm", "P_2p_dBm"});
    for (size_t r = 0; r < trace.nodes.size(); ++r)
      csv.row({double(trace.nodes[r]), dbm_abs(art.tones[0].P[r]),
               dbm_abs(art.tones[1].P[r]), dbm_abs(art.tones[2].P[r]),
               dbm_abs(art.tones[3].P[r]), dbm_abs(art.tones[4].P[r]),
               dbm_abs(art.tones[5].P[r])});
  }

  json summary;
  summary["signal_gain_db"] = art.signal_gain_db;
  summary["pump_gain_db"] = art.pump_gain_db;
  summary["harmonic_fraction_peak"] = art.harmonics.fraction;
  summary["harmonic_fraction_out"] = art.harmonics.fraction_out;
  summary["incident_pump_dbm"] = dbm_abs(art.harmonics.incident_pump);
  summary["growth_g_per_cell"] = art.fit.g;
  summary["growth_residual"] = art.fit.residual;
  summary["growth_rejected"] = art.fit.rejected;
  summary["growth_reason"] = art.fit.reason;
  if (art.beat_2p) summary["beat_2p_cells"] = *art.beat_2p;
  if (art.beat_pi) summary["beat_pi_cells"] = *art.beat_pi;
  summary["pump_depletion_db"] = art.pump_depletion_db;
  summary["second_harmonic_below_pump_db"] = art.second_harmonic_below_pump_db;
  summary["ps_below_signal_db"] = art.ps_below_signal_db;
  summary["pi_below_signal_db"] = art.pi_below_signal_db;
  summary["max_phase_excursion_rad"] = art.diag.max_phase_excursion;
  session.note("summary", summary);
  session.finish();
  return art;
}

namespace {

// Sweep plumbing shared between the coarse band sweep and the zoom window.
std::vector<GainPoint> sweep_gain_points(const LineSpec& spec,
                                         const DriveSpec& base,
                                         const Protocol& protocol,
                                         const std::vector<double>& fs_list,
                                         int workers) {
  std::vector<GainPoint> points(fs_list.size());
  parallel_for(int(fs_list.size()), workers, [&](int j) {
    DriveSpec drive = base;
    drive.signal_freq = fs_list[j];
    points[j] = measure_gain_point(spec, drive, protocol);
  });
  return points;
}

GainProfileArtifacts analyze_gain_profile(double fp,
                                          std::vector<GainPoint> points,
                                          double step) {
  GainProfileArtifacts art;
  art.fp = fp;
  art.points = std::move(points);

  double peak = -1e30;
  for (const auto& p : art.points) {
    if (p.failed) {
      ++art.failed_points;
      continue;
    }
    if (!p.degenerate) peak = std::max(peak, p.gain_db);
  }
  art.peak_gain_db = peak;

  // widest contiguous run within 3 dB of the peak (degenerate bin rides on
  // top of the band and does not break contiguity)
  size_t best_lo = 0, best_len = 0;
  size_t j = 0;
  while (j < art.points.size()) {
    if (art.points[j].failed ||
        (!art.points[j].degenerate && art.points[j].gain_db < peak - 3.0)) {
      ++j;
      continue;
    }
    size_t lo = j;
    while (j < art.points.size() && !art.points[j].failed &&
           (art.points[j].degenerate || art.points[j].gain_db >= peak - 3.0))
      ++j;
    if (j - lo > best_len) {
      best_len = j - lo;
      best_lo = lo;
    }
  }
  if (best_len > 0) {
    art.band_lo = art.points[best_lo].fs;
    art.band_hi = art.points[best_lo + best_len - 1].fs;
    art.bandwidth_3db = art.band_hi - art.band_lo;
  }

  // ripple: peak-to-peak deviation from a 500 MHz moving median inside the band
  int half = std::max(1, int(std::lround(250e6 / step)));
  std::vector<double> dev;
  for (size_t c = 0; c < art.points.size(); ++c) {
    const auto& p = art.points[c];
    if (p.failed || p.degenerate || p.fs < art.band_lo || p.fs > art.band_hi)
      continue;
    std::vector<double> window;
    for (size_t k = (c >= size_t(half) ? c - half : 0);
         k < art.points.size() && k <= c + half; ++k)
      if (!art.points[k].failed && !art.points[k].degenerate)
        window.push_back(art.points[k].gain_db);
    if (window.size() >= 3) dev.push_back(p.gain_db - median_of(window));
  }
  if (!dev.empty())
    art.ripple_db = *std::max_element(dev.begin(), dev.end()) -
                    *std::min_element(dev.begin(), dev.end());
  return art;
}

std::optional<double> zoom_ripple_spacing(const std::vector<GainPoint>& zoom) {
  std::vector<double> minima;
  for (size_t j = 1; j + 1 < zoom.size(); ++j) {
    if (zoom[j].failed || zoom[j - 1].failed || zoom[j + 1].failed) continue;
    if (zoom[j].gain_db < zoom[j - 1].gain_db &&
        zoom[j].gain_db <= zoom[j + 1].gain_db)
      minima.push_back(zoom[j].fs);
  }
  if (minima.size() < 3) return std::nullopt;
  std::vector<double> spacing;
  for (size_t j = 1; j < minima.size(); ++j)
    spacing.push_back(minima[j] - minima[j - 1]);
  return median_of(spacing);
}

void write_gain_csv(CsvWriter& csv, const std::vector<GainPoint>& points) {
  for (const auto& p : points) {
    if (p.failed) continue;
    csv.row({p.fs, p.gain_db, 20.0 * std::log10(std::abs(p.S11)),
             double(p.degenerate)});
  }
}

}  // namespace

std::vector<GainProfileArtifacts> run_gain_sweep(const ScenarioConfig& cfg) {
  ArtifactSession session(cfg);
  LineSpec spec = cfg.line_spec();
  const double step = cfg.fine_grid ? 20e6 : cfg.fs_step;

  std::vector<GainProfileArtifacts> all;
  for (double fp : cfg.pump_freqs) {
    DriveSpec base = cfg.drive;
    base.Idc = cfg.Idc;
    base.pump_freq = fp;

    std::vector<double> fs_list = frequency_grid(cfg.fs_start, cfg.fs_stop, step);
    GainProfileArtifacts art = analyze_gain_profile(
        fp, sweep_gain_points(spec, base, cfg.protocol, fs_list, cfg.workers),
        step);
    for (const auto& p : art.points)
      if (!p.failed) session.add_run_diag(p.diag);

    // fine-grid zoom window resolving the ripple period
    if (!cfg.fine_grid && cfg.zoom_hi > cfg.zoom_lo) {
      std::vector<double> zoom_list =
          frequency_grid(cfg.zoom_lo, cfg.zoom_hi, 20e6);
      art.zoom_points =
          sweep_gain_points(spec, base, cfg.protocol, zoom_list, cfg.workers);
      art.ripple_spacing = zoom_ripple_spacing(art.zoom_points);
    } else {
      art.ripple_spacing = zoom_ripple_spacing(art.points);
    }

    char name[64];
    std::snprintf(name, sizeof name, "gain_fp%.0fMHz.csv", fp / 1e6);
    {
      CsvWriter csv(session.path(name), session.ref(),
                    {"fs_Hz", "G_dB", "S11_dB", "degenerate"});
      write_gain_csv(csv, art.points);
    }
    if (!art.zoom_points.empty()) {
      std::snprintf(name, sizeof name, "gain_zoom_fp%.0fMHz.csv", fp / 1e6);
      CsvWriter csv(session.path(name), session.ref(),
                    {"fs_Hz", "G_dB", "S11_dB", "degenerate"});
      write_gain_csv(csv, art.zoom_points);
    }

    json summary;
    summary["fp_Hz"] = fp;
    summary["peak_gain_db"] = art.peak_gain_db;
    summary["bandwidth_3db_Hz"] = art.bandwidth_3db;
    summary["band_lo_Hz"] = art.band_lo;
    summary["band_hi_Hz"] = art.band_hi;
    summary["ripple_db"] = art.ripple_db;
    if (art.ripple_spacing) summary["ripple_spacing_Hz"] = *art.ripple_spacing;
    summary["failed_points"] = art.failed_points;
    session.note("gain_" + std::to_string(std::lround(fp / 1e6)) + "MHz", summary);

    all.push_back(std::move(art));
  }
  session.finish();
  return all;
}

namespace {

// One-dimensional golden-section refinement of the degenerate gain extreme.
double refine_phase_extreme(const LineSpec& spec, const DriveSpec& base,
                            const Protocol& protocol, double center,
                            double halfwidth, bool maximize, double* arg_out) {
  auto eval = [&](double theta) {
    DriveSpec d = base;
    d.signal_phase = theta;
    GainPoint p = measure_gain_point(spec, d, protocol);
    if (p.failed) throw std::runtime_error("phase refinement point failed: " + p.error);
    return maximize ? -p.gain_db : p.gain_db;
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = center - halfwidth, b = center + halfwidth;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  while (b - a > 1e-3) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = eval(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = eval(x2);
    }
  }
  double arg = 0.5 * (a + b);
  if (arg_out) *arg_out = arg;
  double best = std::min(f1, f2);
  return maximize ? -best : best;
}

}  // namespace

PhaseSweepArtifacts run_phase_sweep(const ScenarioConfig& cfg) {
  ArtifactSession session(cfg);
  LineSpec spec = cfg.line_spec();
  PhaseSweepArtifacts art;

  const double fp = cfg.drive.pump_freq;
  DriveSpec base = cfg.drive;
  base.Idc = cfg.Idc;
  base.signal_freq = 0.5 * fp;  // degenerate point

  const int steps = std::max(cfg.phase_steps, 24);
  std::vector<double> thetas(steps);
  for (int j = 0; j < steps; ++j) thetas[j] = constants::two_pi * j / steps;

  std::vector<GainPoint> points(steps);
  parallel_for(steps, cfg.workers, [&](int j) {
    DriveSpec d = base;
    d.signal_phase = thetas[j];
    points[j] = measure_gain_point(spec, d, cfg.protocol);
  });
  for (int j = 0; j < steps; ++j) {
    if (points[j].failed)
      throw std::runtime_error("phase sweep point failed: " + points[j].error);
    art.theta.push_back(thetas[j]);
    art.gain_db.push_back(points[j].gain_db);
  }

  // periodicity: correlation between G(theta) and G(theta + pi)
  if (steps % 2 == 0) {
    int half = steps / 2;
    double ma = 0, mb = 0;
    for (int j = 0; j < half; ++j) {
      ma += art.gain_db[j];
      mb += art.gain_db[j + half];
    }
    ma /= half;
    mb /= half;
    double num = 0, da = 0, db_ = 0;
    for (int j = 0; j < half; ++j) {
      double xa = art.gain_db[j] - ma, xb = art.gain_db[j + half] - mb;
      num += xa * xb;
      da += xa * xa;
      db_ += xb * xb;
    }
    art.period_correlation = num / std::sqrt(da * db_);
  }

  // refine the extremes; the deamplification null is far sharper than the
  // coarse grid
  int arg_max = int(std::max_element(art.gain_db.begin(), art.gain_db.end()) -
                    art.gain_db.begin());
  int arg_min = int(std::min_element(art.gain_db.begin(), art.gain_db.end()) -
                    art.gain_db.begin());
  double step_width = constants::two_pi / steps;
  art.max_gain_db = refine_phase_extreme(spec, base, cfg.protocol,
                                         thetas[arg_max], step_width, true,
                                         nullptr);
  art.min_gain_db = refine_phase_extreme(spec, base, cfg.protocol,
                                         thetas[arg_min], step_width, false,
                                         nullptr);
  art.extinction_db = art.max_gain_db - art.min_gain_db;

  // non-degenerate reference gain next to fp/2 (+-100 MHz)
  {
    double df = cfg.protocol.df();
    double offset = 5.0 * df;
    double acc = 0.0;
    for (double fs : {0.5 * fp - offset, 0.5 * fp + offset}) {
      DriveSpec d = base;
      d.signal_freq = fs;
      d.signal_phase = 0.0;
      GainPoint p = measure_gain_point(spec, d, cfg.protocol);
      if (p.failed)
        throw std::runtime_error("non-degenerate reference failed: " + p.error);
      acc += p.gain_db;
    }
    art.nondegenerate_gain_db = 0.5 * acc;
  }

  {
    CsvWriter csv(session.path("phase_sweep.csv"), session.ref(),
                  {"theta_rad", "G_dB"});
    for (size_t j = 0; j < art.theta.size(); ++j)
      csv.row({art.theta[j], art.gain_db[j]});
  }
  json summary;
  summary["max_gain_db"] = art.max_gain_db;
  summary["min_gain_db"] = art.min_gain_db;
  summary["extinction_db"] = art.extinction_db;
  summary["nondegenerate_gain_db"] = art.nondegenerate_gain_db;
  summary["period_correlation"] = art.period_correlation;
  session.note("summary", summary);
  session.finish();
  return art;
}

ReflectionScanArtifacts run_reflection_scan(const ScenarioConfig& cfg) {
  ArtifactSession session(cfg);
  LineSpec spec = cfg.line_spec();
  ReflectionScanArtifacts art;
  art.amps = cfg.pump_amps;

  std::vector<double> grid = frequency_grid(cfg.f_lo, cfg.f_hi, cfg.grid_step);
  for (double amp : cfg.pump_amps) {
    std::vector<double> s11(grid.size());
    parallel_for(int(grid.size()), cfg.workers, [&](int j) {
      DriveSpec drive;
      drive.pump_amp = amp;
      drive.pump_freq = grid[j];
      drive.Idc = cfg.Idc;
      drive.ramp_time = cfg.drive.ramp_time;
      try {
        LadderSimulator sim(spec, drive);
        TransientTrace trace = sim.run_protocol(
            cfg.protocol, RecordingSpec::ends_only(spec.cells() + 1));
        ToneField tone = extract_tone(trace, grid[j], "p");
        PortWaves waves = s_parameters(tone, spec.Z0, 1, spec.cells() + 1);
        s11[j] = 20.0 * std::log10(std::abs(waves.S11));
      } catch (const std::exception&) {
        s11[j] = std::numeric_limits<double>::quiet_NaN();
      }
    });
    art.freq.push_back(grid);
    art.s11_db.push_back(s11);

    // interpolated lower gap edge: first upward crossing of -5 dB
    double edge = 0.0;
    for (size_t j = 1; j < grid.size(); ++j) {
      if (std::isnan(s11[j - 1]) || std::isnan(s11[j])) continue;
      if (s11[j - 1] < -5.0 && s11[j] >= -5.0) {
        double w = (-5.0 - s11[j - 1]) / (s11[j] - s11[j - 1]);
        edge = grid[j - 1] + w * (grid[j] - grid[j - 1]);
        break;
      }
    }
    art.gap_edge.push_back(edge);

    char name[64];
    std::snprintf(name, sizeof name, "reflection_%.3guA.csv", amp / 1e-6);
    CsvWriter csv(session.path(name), session.ref(), {"f_Hz", "S11_dB"});
    for (size_t j = 0; j < grid.size(); ++j)
      if (!std::isnan(s11[j])) csv.row({grid[j], s11[j]});
  }

  // small-signal TMM overlay on a finer grid
  std::vector<double> tmm_grid = frequency_grid(cfg.f_lo, cfg.f_hi, 5e6);
  art.tmm = linear_s_parameters(spec, tmm_grid, cfg.Z0, BranchModel::with_rj);
  {
    CsvWriter csv(session.path("reflection_tmm.csv"), session.ref(),
                  {"f_Hz", "S11_dB"});
    for (size_t j = 0; j < tmm_grid.size(); ++j)
      csv.row({tmm_grid[j], 20.0 * std::log10(std::abs(art.tmm.S11[j]))});
  }

  json summary;
  summary["gap_edges_Hz"] = art.gap_edge;
  session.note("summary", summary);
  session.finish();
  return art;
}

UniformComparisonArtifacts run_uniform_comparison(const ScenarioConfig& cfg) {
  UniformComparisonArtifacts art;

  ScenarioConfig tones_cfg = cfg;
  tones_cfg.kind = ScenarioKind::tone_evolution;
  tones_cfg.profile = LoadingProfile::uniform(cfg.profile.mean_capacitance(),
                                              cfg.profile.cells);
  tones_cfg.out_dir = cfg.out_dir + "/tones";
  art.tones = run_tone_evolution(tones_cfg);

  ScenarioConfig gain_cfg = tones_cfg;
  gain_cfg.kind = ScenarioKind::gain_sweep;
  gain_cfg.drive.pump_amp = 1.8e-6;
  gain_cfg.pump_freqs = {cfg.drive.pump_freq};
  gain_cfg.out_dir = cfg.out_dir + "/gain";
  art.gain = std::move(run_gain_sweep(gain_cfg).front());

  // coherence lengths of the up-conversion processes from the linear analysis
  LineSpec spec = tones_cfg.line_spec();
  std::vector<double> grid = frequency_grid(0.1e9, 30e9, 1e6);
  DispersionResult disp = bloch_dispersion(spec, grid);
  std::vector<double> fs{cfg.drive.signal_freq};
  MismatchCurve mc = phase_mismatch(disp, cfg.drive.pump_freq, fs);
  art.xi_ps = mc.pump_plus_signal[0].xi;
  art.xi_pi = mc.pump_plus_idler[0].xi;
  return art;
}

int run_scenario(const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::dispersion_report:
      run_dispersion_report(cfg);
      return 0;
    case ScenarioKind::tone_evolution:
      run_tone_evolution(cfg);
      return 0;
    case ScenarioKind::gain_sweep: {
      int failed = 0;
      for (const auto& art : run_gain_sweep(cfg)) failed += art.failed_points;
      return failed;
    }
    case ScenarioKind::phase_sweep:
      run_phase_sweep(cfg);
      return 0;
    case ScenarioKind::reflection_scan:
      run_reflection_scan(cfg);
      return 0;
    case ScenarioKind::uniform_comparison: {
      UniformComparisonArtifacts art = run_uniform_comparison(cfg);
      return art.gain.failed_points;
    }
    case ScenarioKind::custom:
      throw std::invalid_argument("custom scenarios have no canned runner");
  }
  return 0;
}

}  // namespace jtwpa
