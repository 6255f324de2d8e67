#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rollsurf/actuation.hpp"
#include "rollsurf/em.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

// Candidate exposed lengths to explore for one carrier band, ascending.
struct LengthStateSpace {
  std::string band;
  std::vector<double> lengths;  // meters
};

namespace detail {

struct BandEntry {
  const char* name;
  double f_lo_hz, f_hi_hz;       // band window
  double center_hz;              // nominal carrier, for nearest-band lookup
  double len_lo, len_hi, step;   // length range and sweep granularity
};

// Length ranges and granularities per band. The windows bracket the common
// carriers; anything outside falls back to the half-wave rule below.
inline constexpr BandEntry kBands[] = {
    {"900MHz", 0.80e9, 1.00e9, 0.915e9, 0.10, 0.16, 0.010},
    {"2.4GHz", 2.20e9, 2.70e9, 2.4e9, 0.05, 0.09, 0.010},
    {"3.7GHz", 3.40e9, 4.40e9, 3.7e9, 0.02, 0.05, 0.005},
    {"5GHz", 4.90e9, 6.00e9, 5.2e9, 0.015, 0.04, 0.005},
};

inline double round_to_step(double v, double step) {
  return step * std::round(v / step);
}

}  // namespace detail

// State space for a carrier: the band table when the frequency falls in a
// tabulated band, otherwise a synthetic space centered on the half-wave
// length, spanning +-25%, using the nearest band's granularity. Lengths
// are snapped to the actuation resolution and clamped to roll bounds.
inline LengthStateSpace state_space_for(const Frequency& f,
                                        const MotorSpec& motor = {},
                                        double min_length = kDefaultOffLength,
                                        double max_length = 0.16) {
  const double hz = f.hertz();
  for (const auto& band : detail::kBands) {
    if (hz >= band.f_lo_hz && hz <= band.f_hi_hz) {
      LengthStateSpace space;
      space.band = band.name;
      for (double len = band.len_lo; len <= band.len_hi + 1e-9; len += band.step) {
        const double snapped = detail::round_to_step(len, motor.min_step);
        if (snapped > min_length && snapped <= max_length)
          space.lengths.push_back(snapped);
      }
      return space;
    }
  }
  // Synthetic space for an untabulated carrier.
  const detail::BandEntry* nearest = &detail::kBands[0];
  for (const auto& band : detail::kBands) {
    if (std::abs(band.center_hz - hz) < std::abs(nearest->center_hz - hz))
      nearest = &band;
  }
  const double half_wave = kSpeedOfLight / (2.0 * hz);
  const double center = detail::round_to_step(half_wave, motor.min_step);
  const double lo = 0.75 * half_wave, hi = 1.25 * half_wave;
  LengthStateSpace space;
  space.band = "synthetic";
  int k_min = static_cast<int>(std::ceil((lo - center) / nearest->step - 1e-9));
  int k_max = static_cast<int>(std::floor((hi - center) / nearest->step + 1e-9));
  for (int k = k_min; k <= k_max; ++k) {
    const double snapped =
        detail::round_to_step(center + k * nearest->step, motor.min_step);
    if (snapped > min_length && snapped <= max_length)
      space.lengths.push_back(snapped);
  }
  return space;
}

// Ascending union of the state spaces of several carriers; the sweep order
// when concurrent links span bands.
inline LengthStateSpace merged_state_space(const std::vector<Frequency>& freqs,
                                           const MotorSpec& motor = {},
                                           double min_length = kDefaultOffLength,
                                           double max_length = 0.16) {
  std::set<long long> keys;  // micrometer keys, exact for snapped lengths
  std::string band;
  for (const auto& f : freqs) {
    const LengthStateSpace s = state_space_for(f, motor, min_length, max_length);
    band = band.empty() ? s.band : (band == s.band ? band : "multi");
    for (double len : s.lengths) keys.insert(std::llround(len * 1e6));
  }
  LengthStateSpace merged;
  merged.band = band;
  for (long long k : keys) merged.lengths.push_back(static_cast<double>(k) * 1e-6);
  return merged;
}

}  // namespace rollsurf
