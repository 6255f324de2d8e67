#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsurf/baselines.hpp"
#include "rollsurf/environment.hpp"
#include "rollsurf/nodes.hpp"
#include "rollsurf/record.hpp"
#include "rollsurf/sweep.hpp"

namespace rollsurf {

inline constexpr const char* kVersion = "0.1.0";

// Scene generation defaults for the bundled experiments: a row of panels
// on a desk, receivers a fixed standoff in front, transmitters sampled a
// few meters into the room.
struct SceneDefaults {
  std::string layout = "setup1";
  int panel_count = 4;
  double panel_top_z = 1.15;
  double rx_standoff = 0.35;
  double tx_dist_min = 3.0;
  double tx_dist_max = 12.0;
};

// Every tunable the experiment runner knows about, addressable by a flat
// dotted key so overrides and the run manifest stay in lockstep.
struct RunParams {
  SimModels models;
  SweepParams sweep;
  SceneDefaults scene;
  StudyGeometry study_geom;
  double study_spacing = 0.03;
  int study_trials = 200;
  int study_grid_cap = 40;
  double cache_retain_fraction = 0.5;
  TransportOptions transport_opts;

  struct Binding {
    std::string key;
    enum class Kind { f64, i32, u64, flag } kind;
    void* target;
  };

  std::vector<Binding> bindings() {
    return {
        {"policy.samples_per_point", Binding::Kind::i32, &models.policy.samples_per_point},
        {"policy.noise_sigma_db", Binding::Kind::f64, &models.policy.noise_sigma_db},
        {"policy.noise_floor_margin_db", Binding::Kind::f64, &models.policy.noise_floor_margin_db},
        {"policy.rssi_offset_db", Binding::Kind::f64, &models.policy.rssi_offset_db},
        {"policy.quantum_db", Binding::Kind::f64, &models.policy.quantum_db},
        {"resonance.peak_reflectivity", Binding::Kind::f64, &models.resonance.peak_reflectivity},
        {"resonance.fractional_bandwidth", Binding::Kind::f64, &models.resonance.fractional_bandwidth},
        {"resonance.off_length", Binding::Kind::f64, &models.resonance.off_length},
        {"multipath.sigma_db", Binding::Kind::f64, &models.multipath.sigma_db},
        {"multipath.enabled", Binding::Kind::flag, &models.multipath.enabled},
        {"motor.rpm", Binding::Kind::f64, &models.motor.rpm},
        {"motor.rod_radius", Binding::Kind::f64, &models.motor.rod_radius},
        {"motor.min_step", Binding::Kind::f64, &models.motor.min_step},
        {"sweep.dwell_per_stop_s", Binding::Kind::f64, &sweep.dwell_per_stop_s},
        {"scene.panel_count", Binding::Kind::i32, &scene.panel_count},
        {"scene.panel_top_z", Binding::Kind::f64, &scene.panel_top_z},
        {"scene.rx_standoff", Binding::Kind::f64, &scene.rx_standoff},
        {"scene.tx_dist_min", Binding::Kind::f64, &scene.tx_dist_min},
        {"scene.tx_dist_max", Binding::Kind::f64, &scene.tx_dist_max},
        {"study.room_x", Binding::Kind::f64, &study_geom.room_x},
        {"study.room_y", Binding::Kind::f64, &study_geom.room_y},
        {"study.room_z", Binding::Kind::f64, &study_geom.room_z},
        {"study.min_y", Binding::Kind::f64, &study_geom.min_y},
        {"study.wall_height", Binding::Kind::f64, &study_geom.wall_height},
        {"study.spacing", Binding::Kind::f64, &study_spacing},
        {"study.trials", Binding::Kind::i32, &study_trials},
        {"study.grid_cap", Binding::Kind::i32, &study_grid_cap},
        {"cache.retain_fraction", Binding::Kind::f64, &cache_retain_fraction},
        {"transport.latency_ms", Binding::Kind::f64, &transport_opts.latency_ms},
        {"transport.jitter_ms", Binding::Kind::f64, &transport_opts.jitter_ms},
        {"transport.command_loss_probability", Binding::Kind::f64, &transport_opts.command_loss_probability},
        {"transport.loss_seed", Binding::Kind::u64, &transport_opts.loss_seed},
        {"transport.port", Binding::Kind::i32, &transport_opts.port},
    };
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& b : bindings()) {
      if (b.key != key) continue;
      switch (b.kind) {
        case Binding::Kind::f64:
          *static_cast<double*>(b.target) = std::strtod(value.c_str(), nullptr);
          return;
        case Binding::Kind::i32:
          *static_cast<int*>(b.target) = std::atoi(value.c_str());
          return;
        case Binding::Kind::u64:
          *static_cast<std::uint64_t*>(b.target) =
              std::strtoull(value.c_str(), nullptr, 10);
          return;
        case Binding::Kind::flag:
          *static_cast<bool*>(b.target) = (value == "1" || value == "true");
          return;
      }
    }
    if (key == "scene.layout") {
      scene.layout = value;
      return;
    }
    throw std::invalid_argument("unknown parameter: " + key);
  }

  std::vector<std::pair<std::string, std::string>> dump() {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& b : bindings()) {
      switch (b.kind) {
        case Binding::Kind::f64:
          out.emplace_back(b.key, textio::format_double(*static_cast<double*>(b.target)));
          break;
        case Binding::Kind::i32:
          out.emplace_back(b.key, std::to_string(*static_cast<int*>(b.target)));
          break;
        case Binding::Kind::u64:
          out.emplace_back(b.key, std::to_string(*static_cast<std::uint64_t*>(b.target)));
          break;
        case Binding::Kind::flag:
          out.emplace_back(b.key, *static_cast<bool*>(b.target) ? "true" : "false");
          break;
      }
    }
    out.emplace_back("scene.layout", scene.layout);
    return out;
  }
};

}  // namespace rollsurf
