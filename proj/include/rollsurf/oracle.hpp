#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsurf/channel.hpp"
#include "rollsurf/rssi.hpp"
#include "rollsurf/state_space.hpp"

namespace rollsurf {

// Joint objective used by the exhaustive search: sum of per-link dB gains
// over the all-off baseline, with any configuration that loses power on
// any link ruled infeasible. Evaluated on the noiseless channel.
struct OracleResult {
  SurfaceConfig best_config;
  double objective_db = 0.0;           // sum of per-link gains
  std::vector<double> gains_db;        // link order
  std::uint64_t configurations = 0;    // search-space size actually visited
};

inline constexpr std::uint64_t kOracleSearchCap = 1'000'000;

// Exhaustively evaluates every joint roll-length assignment (each roll's
// band states plus off). Refuses search spaces above the cap.
inline OracleResult brute_force_oracle(const Scene& scene,
                                       const MeasurementPolicy& policy = {},
                                       const ResonanceModel& resonance = {},
                                       const MultipathModel& multipath = {},
                                       const MotorSpec& motor = {}) {
  std::vector<const Roll*> rolls;
  for (const auto& p : scene.panels)
    for (const auto& r : p.rolls) rolls.push_back(&r);

  std::vector<Frequency> freqs;
  for (const auto& l : scene.links) freqs.push_back(l.frequency);
  if (freqs.empty()) throw std::invalid_argument("oracle needs at least one link");

  // Per-roll candidate lengths, off first.
  std::vector<std::vector<double>> choices;
  std::uint64_t total = 1;
  double full_size = 1.0;  // the whole N^R, reported on refusal
  for (const Roll* r : rolls) {
    std::vector<double> c{r->min_length};
    for (double s :
         merged_state_space(freqs, motor, r->min_length, r->max_length).lengths)
      c.push_back(s);
    full_size *= static_cast<double>(c.size());
    choices.push_back(std::move(c));
  }
  if (full_size > static_cast<double>(kOracleSearchCap)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", full_size);
    throw std::domain_error("oracle refused: search space " + std::string(buf) +
                            " configurations exceeds the cap of " +
                            std::to_string(kOracleSearchCap));
  }
  for (const auto& c : choices) total *= c.size();

  SurfaceConfig config = all_off_config(scene);
  std::vector<double> baseline;
  for (const auto& l : scene.links)
    baseline.push_back(
        true_rssi_dbm(l, scene, config, policy, resonance, multipath));

  OracleResult result;
  result.best_config = config;
  result.gains_db.assign(scene.links.size(), 0.0);
  result.configurations = total;

  std::vector<std::size_t> index(rolls.size(), 0);
  for (std::uint64_t visit = 0; visit < total; ++visit) {
    for (std::size_t i = 0; i < rolls.size(); ++i)
      config.lengths[rolls[i]->id] = choices[i][index[i]];

    bool feasible = true;
    double objective = 0.0;
    std::vector<double> gains(scene.links.size(), 0.0);
    for (std::size_t li = 0; li < scene.links.size(); ++li) {
      const double rssi = true_rssi_dbm(scene.links[li], scene, config, policy,
                                        resonance, multipath);
      gains[li] = rssi - baseline[li];
      if (gains[li] < -1e-9) {
        feasible = false;
        break;
      }
      objective += gains[li];
    }
    if (feasible && objective > result.objective_db + 1e-12) {
      result.objective_db = objective;
      result.gains_db = gains;
      result.best_config = config;
    }

    for (std::size_t i = rolls.size(); i-- > 0;) {
      if (++index[i] < choices[i].size()) break;
      index[i] = 0;
    }
  }
  result.best_config.epoch = 0;
  return result;
}

// Linear power gain of a configuration for one link, used when comparing
// greedy results against the oracle.
inline double linear_power_gain(const Link& link, const Scene& scene,
                                const SurfaceConfig& config,
                                const ResonanceModel& resonance = {},
                                const MultipathModel& multipath = {}) {
  const double off =
      std::abs(total_channel(link, scene, all_off_config(scene), resonance, multipath));
  const double now = std::abs(total_channel(link, scene, config, resonance, multipath));
  return (now * now) / (off * off);
}

}  // namespace rollsurf
