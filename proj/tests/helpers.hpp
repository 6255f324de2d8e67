#pragma once

// Shared scene builders for the test suite.

#include <string>
#include <vector>

#include "rollsurf/rng.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf::test {

inline Roll make_roll(const std::string& id, const std::string& panel_id,
                      const Position& origin, int n_strips = kStripsPerRoll,
                      double spacing = 0.03) {
  Roll roll;
  roll.id = id;
  roll.panel_id = panel_id;
  roll.axis_origin = origin;
  for (int i = 0; i < n_strips; ++i) roll.strip_offsets.push_back(i * spacing);
  return roll;
}

// A panel with a chosen number of rolls/strips, for small hand-checked
// scenes.
inline Panel make_small_panel(const std::string& id, const Position& origin,
                              int n_rolls, int n_strips) {
  Panel panel;
  panel.id = id;
  panel.frame_origin = origin;
  for (int j = 0; j < n_rolls; ++j) {
    panel.rolls.push_back(make_roll(id + "/r" + std::to_string(j), id,
                                    origin + Position{0.0, 0.0, -0.05 * j},
                                    n_strips));
  }
  return panel;
}

inline Scene one_link_scene(std::vector<Panel> panels, const Position& tx,
                            const Position& rx, double freq_hz = 2.412e9,
                            std::uint64_t seed = 0) {
  Scene scene;
  scene.panels = std::move(panels);
  scene.multipath_seed = seed;
  scene.endpoints.push_back({"tx0", tx, EndpointRole::transmitter,
                             FeedbackTransport::in_process});
  scene.endpoints.push_back({"rx0", rx, EndpointRole::receiver,
                             FeedbackTransport::in_process});
  Link link;
  link.id = "l0";
  link.tx_id = "tx0";
  link.rx_id = "rx0";
  link.frequency = Frequency(freq_hz);
  scene.links.push_back(link);
  return scene;
}

// Random desk-like scene for property tests: one or two default panels,
// receiver near the surface, transmitter a few meters out.
inline Scene random_scene(SeededRng& rng, int n_panels = 1, int n_links = 1) {
  Scene scene;
  scene.multipath_seed = rng.next_u64();
  for (int p = 0; p < n_panels; ++p) {
    scene.panels.push_back(build_default_panel(
        "p" + std::to_string(p), {p * 0.5, 0.0, 1.15}));
  }
  static const double bands[] = {915e6, 2.412e9, 3.7e9, 5.21e9};
  for (int i = 0; i < n_links; ++i) {
    Endpoint tx{"tx" + std::to_string(i),
                {rng.uniform(-1.0, n_panels * 0.5 + 1.0), rng.uniform(3.0, 10.0),
                 rng.uniform(0.8, 1.8)},
                EndpointRole::transmitter,
                FeedbackTransport::in_process};
    Endpoint rx{"rx" + std::to_string(i),
                {rng.uniform(0.0, n_panels * 0.5), rng.uniform(0.3, 0.6),
                 rng.uniform(0.8, 1.1)},
                EndpointRole::receiver,
                FeedbackTransport::in_process};
    Link link;
    link.id = "l" + std::to_string(i);
    link.tx_id = tx.id;
    link.rx_id = rx.id;
    link.frequency = Frequency(bands[rng.uniform_index(4)]);
    scene.endpoints.push_back(std::move(tx));
    scene.endpoints.push_back(std::move(rx));
    scene.links.push_back(std::move(link));
  }
  return scene;
}

// Random configuration within each roll's band states (or off).
inline SurfaceConfig random_config(const Scene& scene, SeededRng& rng) {
  SurfaceConfig cfg = all_off_config(scene);
  for (auto& [roll_id, len] : cfg.lengths) {
    const double pick = rng.uniform01();
    if (pick < 0.5) continue;  // off
    len = 0.01 * (1 + rng.uniform_index(16));  // 1..16 cm
  }
  return cfg;
}

}  // namespace rollsurf::test
