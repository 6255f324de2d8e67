#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rollsurf {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

// Simulation validity envelope.
inline constexpr double kMinFrequencyHz = 100e6;
inline constexpr double kMaxFrequencyHz = 10e9;

using ComplexAmplitude = std::complex<double>;

// Carrier frequency, validated against the envelope on construction.
class Frequency {
 public:
  explicit Frequency(double hertz) : hertz_(hertz) {
    if (!(hertz >= kMinFrequencyHz && hertz <= kMaxFrequencyHz)) {
      throw std::domain_error("frequency " + std::to_string(hertz) +
                              " Hz outside envelope [100 MHz, 10 GHz]");
    }
  }

  double hertz() const { return hertz_; }

  friend bool operator==(const Frequency& a, const Frequency& b) {
    return a.hertz_ == b.hertz_;
  }

 private:
  double hertz_;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Position operator+(const Position& a, const Position& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Position operator-(const Position& a, const Position& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Position operator*(double s, const Position& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  friend bool operator==(const Position& a, const Position& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double distance(const Position& a, const Position& b) {
  return (a - b).norm();
}

// Parametric power-reflectivity curve of one strip: a Lorentzian in
// frequency peaking at the strip's half-wave resonance. Strips at or
// below off_length are treated as fully rolled and reflect nothing.
struct ResonanceModel {
  double peak_reflectivity = 0.99;
  double fractional_bandwidth = 0.10;  // FWHM relative to the resonant frequency
  double off_length = 0.01;            // meters
};

inline double wavelength(const Frequency& f) { return kSpeedOfLight / f.hertz(); }

// Half-wave resonance of an exposed strip length, unchecked (raw Hz).
inline double resonant_frequency_hz(double length_m) {
  if (!(length_m > 0.0)) {
    throw std::domain_error("resonant_frequency: length must be positive");
  }
  return kSpeedOfLight / (2.0 * length_m);
}

inline Frequency resonant_frequency(double length_m) {
  return Frequency(resonant_frequency_hz(length_m));
}

inline double reflectivity(double length_m, const Frequency& f,
                           const ResonanceModel& m = {}) {
  if (length_m < 0.0) {
    throw std::domain_error("reflectivity: negative length");
  }
  if (length_m <= m.off_length) return 0.0;
  const double f_res = resonant_frequency_hz(length_m);
  const double half_width = 0.5 * m.fractional_bandwidth * f_res;
  const double detune = (f.hertz() - f_res) / half_width;
  return m.peak_reflectivity / (1.0 + detune * detune);
}

// Free-space amplitude of the direct path, |h| = lambda/(4*pi*d) with the
// propagation phase -2*pi*d/lambda.
inline ComplexAmplitude direct_amplitude(const Position& tx, const Position& rx,
                                         const Frequency& f) {
  const double d = distance(tx, rx);
  if (d <= 0.0) {
    throw std::domain_error("direct_amplitude: coincident endpoints");
  }
  const double lambda = wavelength(f);
  const double mag = lambda / (4.0 * std::numbers::pi * d);
  const double phase = -2.0 * std::numbers::pi * d / lambda;
  return std::polar(mag, phase);
}

// Two-hop amplitude through one reflective element, modeled as a unit-gain
// isotropic re-radiator: Friis leg in, Friis leg out, metallic reflection
// phase of pi, scaled by sqrt of the element's power reflectivity. Keeps
// the scattered-to-direct ratio proportional to wavelength, so lower bands
// see a relatively stronger surface.
inline ComplexAmplitude scattered_amplitude(const Position& tx,
                                            const Position& elem,
                                            const Position& rx,
                                            const Frequency& f, double refl) {
  if (refl < 0.0 || refl > 1.0) {
    throw std::domain_error("scattered_amplitude: reflectivity outside [0,1]");
  }
  const double d1 = distance(tx, elem);
  const double d2 = distance(elem, rx);
  if (d1 <= 0.0 || d2 <= 0.0) {
    throw std::domain_error("scattered_amplitude: element coincides with an endpoint");
  }
  if (refl == 0.0) return {0.0, 0.0};
  const double lambda = wavelength(f);
  const double mag = std::sqrt(refl) * (lambda / (4.0 * std::numbers::pi * d1)) *
                     (lambda / (4.0 * std::numbers::pi * d2));
  const double phase =
      -2.0 * std::numbers::pi * (d1 + d2) / lambda + std::numbers::pi;
  return std::polar(mag, phase);
}

inline double db_from_amplitude(const ComplexAmplitude& h) {
  return 20.0 * std::log10(std::abs(h));
}

}  // namespace rollsurf
