#pragma once

#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rollsurf/em.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

// Environment factor applied to the direct path: complex log-normal
// magnitude (sigma in dB) with uniform phase, drawn from the scene seed.
// Keyed by the unordered endpoint pair so the factor is identical in both
// link directions, and constant while an endpoint merely moves.
struct MultipathModel {
  double sigma_db = 3.0;
  bool enabled = true;
};

inline ComplexAmplitude multipath_factor(const Scene& scene, const Link& link,
                                         const MultipathModel& model = {}) {
  if (!model.enabled) return {1.0, 0.0};
  const std::string& a = std::min(link.tx_id, link.rx_id);
  const std::string& b = std::max(link.tx_id, link.rx_id);
  std::uint64_t seed = mix_seed(scene.multipath_seed, "multipath");
  seed = mix_seed(seed, fnv1a(a));
  seed = mix_seed(seed, fnv1a(b));
  seed = mix_seed(seed, std::bit_cast<std::uint64_t>(link.frequency.hertz()));
  SeededRng rng(seed);
  const double gain_db = rng.gaussian(model.sigma_db);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return std::polar(std::pow(10.0, gain_db / 20.0), phase);
}

// One term of a channel evaluation: the direct path or one strip element.
struct PathContribution {
  ComplexAmplitude amplitude;
  std::string via;  // "direct" or the strip id
};

// Per-path breakdown of the channel: the (possibly multipath scaled)
// direct term, exactly once and first, then one scattered term per strip
// whose exposed length in `config` reflects this carrier.
inline std::vector<PathContribution> channel_contributions(
    const Link& link, const Scene& scene, const SurfaceConfig& config,
    const ResonanceModel& resonance = {}, const MultipathModel& multipath = {}) {
  const Position tx = scene.endpoint(link.tx_id).position;
  const Position rx = scene.endpoint(link.rx_id).position;
  std::vector<PathContribution> parts;
  parts.push_back({direct_amplitude(tx, rx, link.frequency) *
                       multipath_factor(scene, link, multipath),
                   "direct"});
  for (const auto& panel : scene.panels) {
    for (const auto& roll : panel.rolls) {
      const double length = config.length_of(roll.id);
      const double refl = reflectivity(length, link.frequency, resonance);
      if (refl == 0.0) continue;
      for (const auto& site : element_positions(roll, length)) {
        parts.push_back(
            {scattered_amplitude(tx, site.position, rx, link.frequency, refl),
             site.strip_id});
      }
    }
  }
  return parts;
}

// Complex channel between the link endpoints: the direct term plus every
// live scattered term.
inline ComplexAmplitude total_channel(const Link& link, const Scene& scene,
                                      const SurfaceConfig& config,
                                      const ResonanceModel& resonance = {},
                                      const MultipathModel& multipath = {}) {
  const Position tx = scene.endpoint(link.tx_id).position;
  const Position rx = scene.endpoint(link.rx_id).position;
  ComplexAmplitude h =
      direct_amplitude(tx, rx, link.frequency) * multipath_factor(scene, link, multipath);
  for (const auto& panel : scene.panels) {
    for (const auto& roll : panel.rolls) {
      const double length = config.length_of(roll.id);
      const double refl = reflectivity(length, link.frequency, resonance);
      if (refl == 0.0) continue;
      for (const auto& site : element_positions(roll, length)) {
        h += scattered_amplitude(tx, site.position, rx, link.frequency, refl);
      }
    }
  }
  return h;
}

}  // namespace rollsurf
