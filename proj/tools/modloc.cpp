// Command-line front end: one subcommand per experiment plus `replay`.
// Exit codes: 0 all checks pass, 1 at least one check failed, 2 invalid
// configuration, 3 replay mismatch, 4 any other error.
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "modloc/experiment.hpp"
#include "modloc/serialize.hpp"

namespace {

const std::map<std::string, std::string>& experiment_blurbs() {
  static const std::map<std::string, std::string> blurbs = {
      {"lattice-verify", "modular identities on seeded standard subspaces"},
      {"little-group", "radius rescaling and translation spectrum of the stabilizer representation"},
      {"induce", "induced momentum-space representation: exact elements and grid convergence"},
      {"localize", "wedge modular structure, translation scaling, and localization-score trend"},
      {"huygens", "line-transform involution, kernel partner, and support leakage under refinement"},
      {"fock-verify", "fermionic quantization: anticommutation, commutants, lifted modular data"},
      {"counterexample", "modular flow vs assigned boosts on a tensor factor with a rotation twist"},
  };
  return blurbs;
}

void print_checks(const std::string& experiment) {
  std::printf("%s: %s\n", experiment.c_str(), experiment_blurbs().at(experiment).c_str());
  for (const auto& [name, description] : modloc::list_checks(experiment))
    std::printf("  %-44s %s\n", name.c_str(), description.c_str());
}

int print_manifest(const modloc::run_manifest_t& man) {
  for (const auto& c : man.checks)
    std::printf("%-44s %s  deviation %11.4e  bound %9.2e  (%.2fs)\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.deviation, c.bound, c.runtime_s);
  std::printf("%s: %zu checks, hash %s, %.2fs total\n", man.all_pass() ? "PASS" : "FAIL",
              man.checks.size(), man.hash().c_str(), man.total_runtime_s);
  if (!man.config.out_dir.empty())
    std::printf("manifest written to %s/manifest.json\n", man.config.out_dir.c_str());
  if (!man.all_pass()) {
    std::fprintf(stderr, "CheckFailed: at least one check exceeded its bound\n");
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for modular localization"};
  app.require_subcommand(0, 1);
  bool list_all = false;
  app.add_flag("--list", list_all, "list every experiment's checks and exit");

  struct sub_state_t {
    modloc::experiment_config_t cfg;
    bool list = false;
  };
  std::map<std::string, std::shared_ptr<sub_state_t>> states;
  for (const std::string& name : modloc::experiment_names()) {
    auto state = std::make_shared<sub_state_t>();
    state->cfg.experiment = name;
    CLI::App* sub = app.add_subcommand(name, experiment_blurbs().at(name));
    sub->add_option("--seed", state->cfg.seed, "base seed for every randomized draw");
    sub->add_option("--grid", state->cfg.grid, "base grid resolution (0 = default)");
    sub->add_option("--dim", state->cfg.dim, "ambient dimension cap (0 = default)");
    sub->add_option("--families", state->cfg.families, "seeded repetitions (0 = default)");
    sub->add_option("--wedges", state->cfg.wedges, "wedge count (0 = default)");
    sub->add_option("--kappa", state->cfg.kappas, "comma-separated radius list")->delimiter(',');
    sub->add_option("--tol", state->cfg.tol, "override the bound of absolute checks");
    sub->add_option("--out", state->cfg.out_dir, "directory for manifest.json and CSV tables");
    sub->add_flag("--list", state->list, "list this experiment's checks and exit");
    states[name] = state;
  }

  std::string manifest_path;
  CLI::App* replay = app.add_subcommand(
      "replay", "re-run a stored manifest and require bit-identical deviations");
  replay->add_option("manifest", manifest_path, "path to a manifest.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      if (list_all) {
        for (const std::string& name : modloc::experiment_names()) print_checks(name);
        return 0;
      }
      std::printf("%s", app.help().c_str());
      return 0;
    }
    const CLI::App* sub = subs.front();
    if (sub == replay) {
      const auto report = modloc::replay_manifest(modloc::read_text_file(manifest_path));
      if (!report.version_match) {
        std::fprintf(stderr,
                     "warning: manifest was produced by a different artifact version; "
                     "comparing instead of asserting\n%s",
                     report.comparison.c_str());
      } else {
        std::printf("replay reproduced the stored manifest bit-exactly\n");
      }
      return print_manifest(report.fresh);
    }
    const sub_state_t& state = *states.at(sub->get_name());
    if (state.list || list_all) {
      print_checks(sub->get_name());
      return 0;
    }
    return print_manifest(modloc::run_experiment(state.cfg));
  } catch (const modloc::error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    switch (e.code()) {
      case modloc::errc::config_invalid: return 2;
      case modloc::errc::replay_mismatch: return 3;
      default: return 4;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
