#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "rollsurf/channel.hpp"
#include "rollsurf/em.hpp"
#include "helpers.hpp"

using namespace rollsurf;
using Catch::Approx;

TEST_CASE("wavelength matches c/f", "[em]") {
  CHECK(wavelength(Frequency(915e6)) == Approx(0.32764).epsilon(1e-4));
  CHECK(wavelength(Frequency(2.4e9)) == Approx(0.12491).epsilon(1e-4));
  CHECK(wavelength(Frequency(5.21e9)) == Approx(0.05754).epsilon(1e-4));
  CHECK(wavelength(Frequency(1e9)) == kSpeedOfLight / 1e9);
}

TEST_CASE("frequency envelope is enforced", "[em]") {
  CHECK_THROWS_AS(Frequency(50e6), std::domain_error);
  CHECK_THROWS_AS(Frequency(11e9), std::domain_error);
  CHECK_NOTHROW(Frequency(100e6));
  CHECK_NOTHROW(Frequency(10e9));
}

TEST_CASE("half-wave resonance", "[em]") {
  CHECK(resonant_frequency(0.164).hertz() == Approx(914.0e6).epsilon(1e-3));
  CHECK(resonant_frequency(0.0625).hertz() == Approx(2.398e9).epsilon(1e-3));
  CHECK(resonant_frequency(0.02877).hertz() == Approx(5.210e9).epsilon(1e-3));
  CHECK_THROWS_AS(resonant_frequency(0.0), std::domain_error);
  CHECK_THROWS_AS(resonant_frequency(-0.1), std::domain_error);
}

TEST_CASE("resonance round trip is exact", "[em]") {
  SeededRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double hz = rng.uniform(kMinFrequencyHz, kMaxFrequencyHz);
    const Frequency f(hz);
    const double back = resonant_frequency_hz(wavelength(f) / 2.0);
    CHECK(std::abs(back - hz) <= 1e-9 * hz);
  }
}

TEST_CASE("reflectivity curve", "[em]") {
  const ResonanceModel m;

  SECTION("fully rolled strips reflect nothing") {
    CHECK(reflectivity(0.01, Frequency(2.4e9), m) == 0.0);
    CHECK(reflectivity(0.0, Frequency(915e6), m) == 0.0);
    CHECK(reflectivity(0.005, Frequency(5.21e9), m) == 0.0);
  }

  SECTION("peak sits at the resonant frequency") {
    const double f_res = resonant_frequency_hz(0.0625);
    CHECK(reflectivity(0.0625, Frequency(f_res), m) == m.peak_reflectivity);
    CHECK(reflectivity(0.0625, Frequency(2.398e9), m) == Approx(0.99).margin(1e-3));
  }

  SECTION("half-max points at f_res(1 +- fb/2)") {
    for (double len : {0.03, 0.0625, 0.12}) {
      const double f_res = resonant_frequency_hz(len);
      for (double sign : {-1.0, 1.0}) {
        const double f = f_res * (1.0 + sign * m.fractional_bandwidth / 2.0);
        CHECK(reflectivity(len, Frequency(f), m) ==
              Approx(m.peak_reflectivity / 2.0).epsilon(1e-9));
      }
    }
  }

  SECTION("unimodal in frequency with the maximum at resonance") {
    const double len = 0.07;
    const double f_res = resonant_frequency_hz(len);
    double prev = -1.0;
    bool rising = true;
    for (double hz = 0.5e9; hz <= 9.5e9; hz += 2e6) {
      const double r = reflectivity(len, Frequency(hz), m);
      if (rising && r < prev) {
        rising = false;
        CHECK(hz - 2e6 <= f_res * (1 + 1e-3));
        CHECK(hz >= f_res * (1 - 1e-3));
      }
      if (!rising) CHECK(r <= prev + 1e-12);
      prev = r;
    }
    CHECK_FALSE(rising);
  }

  SECTION("a 2.4 GHz roll barely reflects 5.21 GHz") {
    for (double len = 0.05; len <= 0.09 + 1e-9; len += 0.01)
      CHECK(reflectivity(len, Frequency(5.21e9), m) < 0.05);
  }

  SECTION("bounded for arbitrary inputs") {
    SeededRng rng(3);
    for (int i = 0; i < 500; ++i) {
      const double len = rng.uniform(0.0, 0.2);
      const double hz = rng.uniform(kMinFrequencyHz, kMaxFrequencyHz);
      const double r = reflectivity(len, Frequency(hz), m);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }
}

TEST_CASE("direct path amplitude", "[em]") {
  const Frequency f(2.4e9);
  const double lambda = wavelength(f);

  SECTION("full-wavelength separation wraps the phase") {
    const auto h = direct_amplitude({0, 0, 0}, {lambda, 0, 0}, f);
    CHECK(std::abs(h) == Approx(1.0 / (4.0 * std::numbers::pi)));
    CHECK(std::arg(h) == Approx(0.0).margin(1e-9));
  }

  SECTION("inverse distance law") {
    const auto h1 = direct_amplitude({0, 0, 0}, {2, 0, 0}, f);
    const auto h2 = direct_amplitude({0, 0, 0}, {4, 0, 0}, f);
    CHECK(std::abs(h1) == Approx(2.0 * std::abs(h2)));
  }

  SECTION("symmetric under endpoint swap") {
    const Position a{1.5, 2, 3}, b{-2, 0.5, 1};
    const auto hab = direct_amplitude(a, b, f);
    const auto hba = direct_amplitude(b, a, f);
    CHECK(hab == hba);
  }

  SECTION("coincident endpoints are rejected") {
    CHECK_THROWS_AS(direct_amplitude({1, 1, 1}, {1, 1, 1}, f), std::domain_error);
  }
}

TEST_CASE("scattered amplitude", "[em]") {
  const Frequency f(2.4e9);
  const double lambda = wavelength(f);

  SECTION("off element contributes nothing") {
    CHECK(std::abs(scattered_amplitude({0, 0, 0}, {1, 1, 0}, {2, 0, 0}, f, 0.0)) ==
          0.0);
  }

  SECTION("symmetric in the two legs") {
    const auto a = scattered_amplitude({0, 0, 0}, {1, 2, 0}, {3, 0, 1}, f, 0.7);
    const auto b = scattered_amplitude({3, 0, 1}, {1, 2, 0}, {0, 0, 0}, f, 0.7);
    CHECK(a == b);
  }

  SECTION("collinear midpoint of a one-wavelength link reflects in antiphase") {
    const auto h =
        scattered_amplitude({0, 0, 0}, {lambda / 2, 0, 0}, {lambda, 0, 0}, f, 1.0);
    CHECK(std::abs(std::abs(std::arg(h)) - std::numbers::pi) < 1e-9);
  }

  SECTION("vanishes as either leg grows") {
    double prev = 1e9;
    for (double d = 1.0; d < 300.0; d *= 3.0) {
      const double mag =
          std::abs(scattered_amplitude({0, 0, 0}, {d, 1, 0}, {1, 0, 0}, f, 1.0));
      CHECK(mag < prev);
      prev = mag;
    }
    CHECK(prev < 1e-6);
  }

  SECTION("degenerate geometry is rejected") {
    CHECK_THROWS_AS(scattered_amplitude({0, 0, 0}, {0, 0, 0}, {1, 0, 0}, f, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(scattered_amplitude({0, 0, 0}, {1, 0, 0}, {1, 0, 0}, f, 1.0),
                    std::domain_error);
  }
}

namespace {

// Independent term-by-term channel sum: element centers recomputed from
// the roll fields, amplitudes from the raw formulas.
ComplexAmplitude oracle_channel(const Link& link, const Scene& scene,
                                const SurfaceConfig& config,
                                const ResonanceModel& res,
                                const MultipathModel& mp) {
  const Position tx = scene.endpoint(link.tx_id).position;
  const Position rx = scene.endpoint(link.rx_id).position;
  const double lambda = kSpeedOfLight / link.frequency.hertz();
  const double d = distance(tx, rx);
  ComplexAmplitude h = std::polar(lambda / (4 * std::numbers::pi * d),
                                  -2 * std::numbers::pi * d / lambda) *
                       multipath_factor(scene, link, mp);
  for (const auto& panel : scene.panels) {
    for (const auto& roll : panel.rolls) {
      const double len = config.lengths.at(roll.id);
      const double refl = reflectivity(len, link.frequency, res);
      for (double off : roll.strip_offsets) {
        const Position center = roll.axis_origin + off * roll.rod_direction +
                                (len / 2) * roll.orientation;
        const double d1 = distance(tx, center);
        const double d2 = distance(center, rx);
        h += std::polar(std::sqrt(refl) * lambda * lambda /
                            (16 * std::numbers::pi * std::numbers::pi * d1 * d2),
                        -2 * std::numbers::pi * (d1 + d2) / lambda +
                            std::numbers::pi);
      }
    }
  }
  return h;
}

}  // namespace

TEST_CASE("total channel", "[em][channel]") {
  using test::make_small_panel;

  SECTION("all rolls off leaves exactly the direct term") {
    Scene scene = test::one_link_scene({make_small_panel("p0", {0, 0, 1}, 3, 4)},
                                       {0.5, 6.0, 1.2}, {0.2, 0.4, 0.8});
    const SurfaceConfig off = all_off_config(scene);
    const Link& link = scene.links[0];
    const auto h = total_channel(link, scene, off, {}, {});
    const auto expect = direct_amplitude(scene.endpoint("tx0").position,
                                         scene.endpoint("rx0").position,
                                         link.frequency) *
                        multipath_factor(scene, link, {});
    CHECK(h == expect);
  }

  SECTION("matches an independent term-by-term sum to 1e-12") {
    SeededRng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
      Scene scene = test::one_link_scene(
          {make_small_panel("p0", {rng.uniform(-1, 1), 0, 1}, 3, 5)},
          {rng.uniform(-2, 2), rng.uniform(4, 9), rng.uniform(0.5, 2)},
          {rng.uniform(-1, 1), rng.uniform(0.2, 0.6), rng.uniform(0.6, 1.2)},
          2.412e9, rng.next_u64());
      SurfaceConfig cfg = all_off_config(scene);
      // three rolls, two states each: off or an in-band length
      int k = trial;
      for (auto& [id, len] : cfg.lengths) {
        if (k & 1) len = 0.06;
        k >>= 1;
      }
      const Link& link = scene.links[0];
      const auto fast = total_channel(link, scene, cfg, {}, {});
      const auto slow = oracle_channel(link, scene, cfg, {}, {});
      CHECK(std::abs(fast - slow) <= 1e-12 * std::abs(slow));
    }
  }

  SECTION("an aligned element adds constructively") {
    // One strip offset sideways from a 4 m link so the excess path is near
    // half a wavelength; with the metallic pi reflection that puts the
    // reflected field in phase with the direct one.
    const Frequency f(2.4e9);
    Panel panel;
    panel.id = "p0";
    Roll roll = test::make_roll("p0/r0", "p0", {0.0, 0.36, 0.03}, 1);
    roll.max_length = 0.2;
    panel.rolls.push_back(roll);
    Scene scene = test::one_link_scene({panel}, {-2.0, 0, 0}, {2.0, 0, 0},
                                       f.hertz());
    double best_gain = -1.0;
    const MultipathModel mp_off{3.0, false};
    SurfaceConfig cfg = all_off_config(scene);
    const double direct_mag = std::abs(total_channel(scene.links[0], scene, cfg,
                                                     {}, mp_off));
    for (double len = 0.05; len <= 0.2; len += 0.001) {
      cfg.lengths["p0/r0"] = len;
      best_gain = std::max(
          best_gain, std::abs(total_channel(scene.links[0], scene, cfg, {}, mp_off)));
    }
    CHECK(best_gain > direct_mag);
  }

  SECTION("reciprocity under endpoint swap") {
    SeededRng rng(99);
    for (int i = 0; i < 50; ++i) {
      Scene scene = test::random_scene(rng, 1 + (i % 2));
      const SurfaceConfig cfg = test::random_config(scene, rng);
      Scene swapped = scene;
      std::swap(swapped.links[0].tx_id, swapped.links[0].rx_id);
      const double a = std::abs(total_channel(scene.links[0], scene, cfg));
      const double b = std::abs(total_channel(swapped.links[0], swapped, cfg));
      CHECK(std::abs(a - b) <= 1e-12 * a);
    }
  }

  SECTION("contribution breakdown sums to the channel") {
    SeededRng rng(314);
    Scene scene = test::random_scene(rng, 1);
    const SurfaceConfig cfg = test::random_config(scene, rng);
    const auto parts = channel_contributions(scene.links[0], scene, cfg);
    int direct = 0;
    ComplexAmplitude sum{0.0, 0.0};
    for (const auto& p : parts) {
      direct += p.via == "direct";
      sum += p.amplitude;
    }
    CHECK(direct == 1);
    CHECK(parts[0].via == "direct");
    const auto h = total_channel(scene.links[0], scene, cfg);
    CHECK(std::abs(sum - h) <= 1e-12 * std::abs(h));
  }

  SECTION("config must cover the scene") {
    Scene scene = test::one_link_scene({make_small_panel("p0", {0, 0, 1}, 2, 3)},
                                       {0, 5, 1}, {0, 0.4, 0.9});
    SurfaceConfig cfg = all_off_config(scene);
    cfg.lengths.erase("p0/r1");
    CHECK_THROWS_AS(total_channel(scene.links[0], scene, cfg), std::out_of_range);
  }
}

TEST_CASE("multipath factor", "[em][channel]") {
  SeededRng rng(5);
  Scene scene = test::random_scene(rng);
  const Link& link = scene.links[0];

  SECTION("deterministic per scene and link") {
    CHECK(multipath_factor(scene, link) == multipath_factor(scene, link));
  }

  SECTION("identical in both link directions") {
    Link back = link;
    std::swap(back.tx_id, back.rx_id);
    CHECK(multipath_factor(scene, link) == multipath_factor(scene, back));
  }

  SECTION("changes with the scene seed") {
    Scene other = scene;
    other.multipath_seed += 1;
    CHECK(multipath_factor(scene, link) != multipath_factor(other, link));
  }

  SECTION("disabled model is unity") {
    CHECK(multipath_factor(scene, link, {3.0, false}) == ComplexAmplitude{1.0, 0.0});
  }
}
