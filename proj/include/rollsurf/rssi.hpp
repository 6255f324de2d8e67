#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsurf/channel.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

// How endpoint feedback is sampled and interpreted.
struct MeasurementPolicy {
  int samples_per_point = 5;         // odd, so the median is a sample
  double noise_sigma_db = 0.8;
  double noise_floor_margin_db = 1.0;  // smallest delta treated as a real gain
  double rssi_offset_db = 0.0;         // rx calibration constant
  double quantum_db = 1.0;             // RSSI reporting granularity

  void validate() const {
    if (samples_per_point < 1 || samples_per_point % 2 == 0)
      throw std::invalid_argument("samples_per_point must be odd and >= 1");
    if (noise_sigma_db < 0.0) throw std::invalid_argument("negative noise sigma");
  }
};

struct RssiReport {
  std::string link_id;
  double value_dbm = 0.0;   // quantized
  std::int64_t epoch = 0;   // config epoch the sample was taken under
  std::int64_t seq = 0;     // per-endpoint running counter
};

inline double quantize_db(double value, double quantum) {
  if (quantum <= 0.0) return value;
  return quantum * static_cast<double>(std::llround(value / quantum));
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Unquantized, noise-free received power for a link under a configuration.
inline double true_rssi_dbm(const Link& link, const Scene& scene,
                            const SurfaceConfig& config,
                            const MeasurementPolicy& policy = {},
                            const ResonanceModel& resonance = {},
                            const MultipathModel& multipath = {}) {
  const ComplexAmplitude h = total_channel(link, scene, config, resonance, multipath);
  return db_from_amplitude(h) + link.tx_power_dbm + policy.rssi_offset_db;
}

// What an endpoint reports: the true RSSI with per-sample Gaussian noise,
// quantized to the device granularity, median across the sample burst.
inline double measure_rssi(const Link& link, const Scene& scene,
                           const SurfaceConfig& config,
                           const MeasurementPolicy& policy, SeededRng& rng,
                           const ResonanceModel& resonance = {},
                           const MultipathModel& multipath = {}) {
  policy.validate();
  const double base = true_rssi_dbm(link, scene, config, policy, resonance, multipath);
  std::vector<double> samples;
  samples.reserve(policy.samples_per_point);
  for (int i = 0; i < policy.samples_per_point; ++i) {
    samples.push_back(
        quantize_db(base + rng.gaussian(policy.noise_sigma_db), policy.quantum_db));
  }
  return median_of(std::move(samples));
}

}  // namespace rollsurf
