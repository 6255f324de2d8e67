#include <catch2/catch_amalgamated.hpp>

#include "rollsurf/rssi.hpp"
#include "rollsurf/state_space.hpp"
#include "helpers.hpp"

using namespace rollsurf;
using Catch::Approx;

namespace {

void check_lengths(const LengthStateSpace& space, std::vector<double> expect) {
  REQUIRE(space.lengths.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(space.lengths[i] == Approx(expect[i]).margin(1e-9));
}

}  // namespace

TEST_CASE("band table state spaces", "[state-space]") {
  check_lengths(state_space_for(Frequency(2.412e9)),
                {0.05, 0.06, 0.07, 0.08, 0.09});
  check_lengths(state_space_for(Frequency(5.21e9)),
                {0.015, 0.02, 0.025, 0.03, 0.035, 0.04});
  check_lengths(state_space_for(Frequency(3.7e9)),
                {0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05});
  check_lengths(state_space_for(Frequency(915e6)),
                {0.10, 0.11, 0.12, 0.13, 0.14, 0.15, 0.16});
}

TEST_CASE("synthetic space for untabulated carriers", "[state-space]") {
  // 1.8 GHz: half-wave 8.33 cm, +-25% at the nearest band's 1 cm step.
  check_lengths(state_space_for(Frequency(1.8e9)),
                {0.063, 0.073, 0.083, 0.093, 0.103});

  SECTION("ascending and inside the roll bounds everywhere") {
    SeededRng rng(21);
    for (int i = 0; i < 300; ++i) {
      const Frequency f(rng.uniform(kMinFrequencyHz, kMaxFrequencyHz));
      const auto space = state_space_for(f);
      for (std::size_t k = 0; k < space.lengths.size(); ++k) {
        CHECK(space.lengths[k] > kDefaultOffLength);
        CHECK(space.lengths[k] <= 0.16 + 1e-12);
        if (k > 0) CHECK(space.lengths[k] > space.lengths[k - 1]);
      }
    }
  }
}

TEST_CASE("merged state space for concurrent bands", "[state-space]") {
  const auto merged = merged_state_space(
      {Frequency(2.412e9), Frequency(5.21e9)});
  check_lengths(merged, {0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.05, 0.06,
                         0.07, 0.08, 0.09});
  CHECK(merged.band == "multi");
}

TEST_CASE("measurement policy validation", "[rssi]") {
  MeasurementPolicy policy;
  CHECK_NOTHROW(policy.validate());
  policy.samples_per_point = 4;
  CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
  policy.samples_per_point = 0;
  CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
}

TEST_CASE("rssi measurement", "[rssi]") {
  SeededRng scene_rng(31);
  Scene scene = test::random_scene(scene_rng);
  const Link& link = scene.links[0];
  const SurfaceConfig off = all_off_config(scene);

  SECTION("noiseless all-off equals the quantized direct-path power") {
    MeasurementPolicy p;
    p.noise_sigma_db = 0.0;
    SeededRng rng(1);
    const double measured = measure_rssi(link, scene, off, p, rng);
    const double truth = true_rssi_dbm(link, scene, off, p);
    CHECK(measured == quantize_db(truth, p.quantum_db));
  }

  SECTION("same seed, same answer") {
    MeasurementPolicy p;
    SeededRng a(77), b(77);
    CHECK(measure_rssi(link, scene, off, p, a) ==
          measure_rssi(link, scene, off, p, b));
  }

  SECTION("median lies within the sample range") {
    MeasurementPolicy p;
    SeededRng rng(5);
    const double truth = true_rssi_dbm(link, scene, off, p);
    for (int i = 0; i < 50; ++i) {
      const double m = measure_rssi(link, scene, off, p, rng);
      CHECK(std::abs(m - truth) < 6.0 * p.noise_sigma_db + p.quantum_db);
    }
  }

  SECTION("quantization uses the device granularity") {
    CHECK(quantize_db(-41.4, 1.0) == -41.0);
    CHECK(quantize_db(-41.6, 1.0) == -42.0);
    CHECK(quantize_db(3.26, 0.5) == 3.5);
  }
}
