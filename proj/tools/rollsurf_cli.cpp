// Command-line experiment runner for the rollsurf library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rollsurf/rollsurf.hpp"

namespace {

rollsurf::ExperimentSpec load_spec_argument(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) {
    std::ifstream in(arg, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return rollsurf::parse_experiment_spec(buf.str());
  }
  const auto& catalog = rollsurf::experiment_catalog();
  for (const auto& name : catalog) {
    if (name == arg) {
      rollsurf::ExperimentSpec spec;
      spec.name = name;
      return spec;
    }
  }
  throw CLI::ValidationError(
      "run", "'" + arg + "' is neither a spec file nor a catalog experiment");
}

void apply_set_flags(rollsurf::ExperimentSpec& spec,
                     const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    spec.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

int cmd_run(const std::string& arg, int trials, std::uint64_t seed,
            bool seed_given, const std::string& out,
            const std::string& transport, const std::string& algorithm,
            const std::vector<std::string>& sets, const std::string& capture) {
  rollsurf::ExperimentSpec spec = load_spec_argument(arg);
  if (trials > 0) spec.trials = trials;
  if (seed_given) spec.seed = seed;
  if (!out.empty()) spec.out_dir = out;
  if (!algorithm.empty()) spec.algorithm = algorithm;
  if (!capture.empty()) spec.capture_path = capture;
  if (transport == "socket")
    spec.transport = rollsurf::TransportKind::socket;
  else if (transport == "inproc")
    spec.transport = rollsurf::TransportKind::inproc;
  else if (!transport.empty())
    throw CLI::ValidationError("--transport", "must be inproc or socket");
  apply_set_flags(spec, sets);

  const rollsurf::ExperimentResult result = rollsurf::run_experiment(spec);
  std::printf("experiment %s: %zu table(s)\n", result.name.c_str(),
              result.tables.size());
  for (const auto& [key, csv] : result.tables)
    std::printf("  %-14s %zu rows\n", (key + ".csv").c_str(), csv.rows.size());
  if (!result.errors.rows.empty())
    std::printf("  %zu trial error(s) recorded\n", result.errors.rows.size());
  if (!spec.out_dir.empty())
    std::printf("written to %s\n", spec.out_dir.c_str());
  return result.errors.rows.empty() ? 0 : 1;
}

int cmd_list() {
  for (const auto& name : rollsurf::experiment_catalog())
    std::printf("%s\n", name.c_str());
  return 0;
}

int cmd_validate(const std::string& scene_path) {
  std::ifstream in(scene_path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "cannot read %s\n", scene_path.c_str());
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const rollsurf::Scene scene = rollsurf::parse_scene(buf.str());
    std::printf("ok: %zu panel(s), %zu endpoint(s), %zu link(s), %zu roll(s)\n",
                scene.panels.size(), scene.endpoints.size(), scene.links.size(),
                scene.roll_count());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

int cmd_replay_cache(const std::string& cache_path, const std::string& scene_path,
                     const std::vector<std::string>& sets) {
  rollsurf::RunParams params;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set", "expected key=value");
    params.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  const rollsurf::ConfigCache cache = rollsurf::ConfigCache::load(cache_path);
  const rollsurf::Scene scene = rollsurf::load_scene_file(scene_path);
  std::vector<std::string> link_ids;
  for (const auto& l : scene.links) link_ids.push_back(l.id);
  const auto entry = cache.lookup(scene, link_ids);
  if (!entry) {
    std::printf("cache miss for this link set (key %s)\n",
                rollsurf::cache_key(scene, link_ids).c_str());
    return 1;
  }
  std::printf("cache hit: %zu extended roll(s)\n", entry->extended_lengths.size());
  rollsurf::SeededRng rng(rollsurf::mix_seed(scene.multipath_seed, "replay"));
  const auto config = rollsurf::ConfigCache::expand(*entry, scene);
  const auto off = rollsurf::all_off_config(scene);
  for (const auto& link_id : link_ids) {
    const auto& link = scene.link(link_id);
    const double base =
        rollsurf::measure_rssi(link, scene, off, params.models.policy, rng,
                               params.models.resonance, params.models.multipath);
    const double now =
        rollsurf::measure_rssi(link, scene, config, params.models.policy, rng,
                               params.models.resonance, params.models.multipath);
    const auto rec = entry->recorded_gain_db.find(link_id);
    std::printf("  %s: replayed gain %+.1f dB (recorded %+.1f dB)\n",
                link_id.c_str(), now - base,
                rec == entry->recorded_gain_db.end() ? 0.0 : rec->second);
  }
  rollsurf::SeededRng vrng(rollsurf::mix_seed(scene.multipath_seed, "validate"));
  const bool valid = rollsurf::cache_validate(
      *entry, scene, link_ids, params.models.policy, vrng,
      params.models.resonance, params.models.multipath,
      params.cache_retain_fraction);
  std::printf("validity check: %s\n", valid ? "valid" : "invalid");
  return valid ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rollsurf: simulator and control plane for roll-tunable "
               "reflective surfaces"};
  app.require_subcommand(1);

  // run
  std::string run_arg, out, transport, algorithm, capture;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "run an experiment (catalog name or spec file)");
  run->add_option("spec", run_arg, "experiment name or spec file")->required();
  run->add_option("--trials", trials, "trial count override");
  auto* seed_opt = run->add_option("--seed", seed, "run seed");
  run->add_option("--out", out, "output directory for CSV + manifest");
  run->add_option("--transport", transport, "inproc or socket");
  run->add_option("--algorithm", algorithm, "enumerate or group");
  run->add_option("--set", sets, "parameter override key=value")->take_all();
  run->add_option("--capture", capture, "dump control-plane traffic to file");

  // list
  auto* list = app.add_subcommand("list", "list catalog experiments");

  // validate
  std::string scene_path;
  auto* validate = app.add_subcommand("validate", "validate a scene file");
  validate->add_option("scene", scene_path, "scene file")->required();

  // replay-cache
  std::string cache_path, replay_scene;
  std::vector<std::string> replay_sets;
  auto* replay = app.add_subcommand("replay-cache",
                                    "apply a cached configuration to a scene");
  replay->add_option("cache", cache_path, "cache file")->required();
  replay->add_option("scene", replay_scene, "scene file")->required();
  replay->add_option("--set", replay_sets, "parameter override key=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(run_arg, trials, seed, seed_opt->count() > 0, out, transport,
                     algorithm, sets, capture);
    if (*list) return cmd_list();
    if (*validate) return cmd_validate(scene_path);
    if (*replay) return cmd_replay_cache(cache_path, replay_scene, replay_sets);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
