#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "jtwpa/scenarios.hpp"

namespace {

// Flags shared by every subcommand, applied on top of the scenario defaults.
struct CommonFlags {
  std::string out_dir;
  int workers = 0;
  double dt_ps = 0.0;
  bool fine_grid = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--out", flags->out_dir, "output directory");
  cmd->add_option("--workers", flags->workers, "parallel sweep workers");
  cmd->add_option("--dt", flags->dt_ps, "time step in ps (max 4)");
  cmd->add_flag("--fine-grid", flags->fine_grid, "sweep on the full 20 MHz grid");
}

void apply_common(jtwpa::ScenarioConfig& cfg, const CommonFlags& flags) {
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (flags.dt_ps > 0.0) cfg.protocol.dt = flags.dt_ps * 1e-12;
  if (flags.fine_grid) cfg.fine_grid = true;
}

int execute(const jtwpa::ScenarioConfig& cfg) {
  int failed = jtwpa::run_scenario(cfg);
  if (failed > 0) {
    std::fprintf(stderr, "%d sweep point(s) failed; see manifest.json\n", failed);
    return 2;
  }
  std::printf("artifacts written to %s\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JTWPA ladder simulator: linear analysis, nonlinear transients, "
               "spectral gain extraction"};
  app.require_subcommand(1);

  struct Sub {
    jtwpa::ScenarioKind kind;
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {jtwpa::ScenarioKind::dispersion_report, "dispersion",
       "band structure, stop bands and phase-mismatch curves"},
      {jtwpa::ScenarioKind::tone_evolution, "tones",
       "tone powers along the line for the reference drive"},
      {jtwpa::ScenarioKind::gain_sweep, "gain", "gain versus signal frequency"},
      {jtwpa::ScenarioKind::phase_sweep, "phase",
       "phase-sensitive degenerate gain at fs = fp/2"},
      {jtwpa::ScenarioKind::reflection_scan, "reflect",
       "|S11| around the first stop band at low and high pump power"},
      {jtwpa::ScenarioKind::uniform_comparison, "uniform",
       "same circuit without dispersion engineering"},
  };

  CommonFlags flags[7];
  CLI::App* cmds[7];
  for (size_t j = 0; j < std::size(subs); ++j) {
    cmds[j] = app.add_subcommand(subs[j].name, subs[j].help);
    add_common(cmds[j], &flags[j]);
  }

  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario config file");
  run_cmd->add_option("config", config_path, "scenario config file")->required();
  add_common(run_cmd, &flags[6]);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      jtwpa::ScenarioConfig cfg = jtwpa::load_scenario_config(config_path);
      apply_common(cfg, flags[6]);
      return execute(cfg);
    }
    for (size_t j = 0; j < std::size(subs); ++j) {
      if (cmds[j]->parsed()) {
        jtwpa::ScenarioConfig cfg = jtwpa::default_config(subs[j].kind);
        cfg.out_dir = "out/" + std::string(subs[j].name);
        apply_common(cfg, flags[j]);
        return execute(cfg);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
