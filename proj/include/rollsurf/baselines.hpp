#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsurf/em.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/rssi.hpp"

namespace rollsurf {

// The three element-array designs compared by the study. A wideband
// element reflects every band alike and can only be on or off for all of
// them at once; a multi-design element is permanently assigned one band;
// a tunable element can pick any band.
enum class DesignKind { wideband, multi_design, tunable };

inline const char* design_name(DesignKind k) {
  switch (k) {
    case DesignKind::wideband: return "wideband";
    case DesignKind::multi_design: return "multi-design";
    case DesignKind::tunable: return "tunable";
  }
  return "?";
}

// How a wideband element decides to turn on when several links are active.
// `all_aligned` turns on only when the reflection helps every link (the
// no-loss rule applied to an all-or-nothing element); `majority_sum` turns
// on when the summed projection across links is positive.
enum class WidebandRule { all_aligned, majority_sum };

struct ArrayDesign {
  DesignKind kind = DesignKind::tunable;
  int rows = 20;
  int cols = 20;
  double spacing = 0.03;  // m; wideband antennas need double
  WidebandRule wideband_rule = WidebandRule::all_aligned;

  int element_count() const { return rows * cols; }
};

inline ArrayDesign make_design(DesignKind kind, int rows, int cols,
                               double base_spacing = 0.03) {
  ArrayDesign d;
  d.kind = kind;
  d.rows = rows;
  d.cols = cols;
  d.spacing = kind == DesignKind::wideband ? 2.0 * base_spacing : base_spacing;
  return d;
}

// One simulated link: endpoints drawn somewhere in the room, the surface
// on a wall.
struct StudyLink {
  Position tx;
  Position rx;
  Frequency frequency{2.412e9};
};

struct StudyGeometry {
  double room_x = 10.0;   // m, wall length
  double room_y = 10.0;   // m, depth away from the surface wall
  double room_z = 3.0;    // m
  double min_y = 0.5;     // keep endpoints off the wall itself
  double wall_height = 1.5;
};

inline std::vector<Frequency> study_frequencies(int n) {
  static const double bands[] = {915e6, 2.412e9, 5.21e9, 3.7e9};
  if (n < 1 || n > 4)
    throw std::invalid_argument("study supports 1..4 frequencies");
  std::vector<Frequency> out;
  for (int i = 0; i < n; ++i) out.emplace_back(bands[i]);
  return out;
}

inline std::vector<StudyLink> draw_study_links(int n_frequencies, SeededRng& rng,
                                               const StudyGeometry& geom = {}) {
  const auto freqs = study_frequencies(n_frequencies);
  std::vector<StudyLink> links;
  for (const Frequency& f : freqs) {
    StudyLink link;
    link.tx = {rng.uniform(-geom.room_x / 2, geom.room_x / 2),
               rng.uniform(geom.min_y, geom.room_y),
               rng.uniform(0.2, geom.room_z - 0.2)};
    link.rx = {rng.uniform(-geom.room_x / 2, geom.room_x / 2),
               rng.uniform(geom.min_y, geom.room_y),
               rng.uniform(0.2, geom.room_z - 0.2)};
    link.frequency = f;
    links.push_back(link);
  }
  return links;
}

inline std::vector<Position> element_grid(const ArrayDesign& design,
                                          const StudyGeometry& geom = {}) {
  std::vector<Position> out;
  out.reserve(design.element_count());
  for (int r = 0; r < design.rows; ++r) {
    for (int c = 0; c < design.cols; ++c) {
      out.push_back({(c - (design.cols - 1) / 2.0) * design.spacing, 0.0,
                     geom.wall_height + (r - (design.rows - 1) / 2.0) * design.spacing});
    }
  }
  return out;
}

// Per-element control decision: off, or on serving one link's band
// (wideband elements serve every band at once and use serving_link = -1).
struct ElementChoice {
  bool on = false;
  int serving_link = -1;
};

struct StudyResult {
  std::vector<double> delivered_power_db;  // per link
  int elements_on = 0;
  int elements_total = 0;
  std::uint64_t trial_seed = 0;
};

namespace detail {

// Projection of an element's unit reflection onto the link's direct
// phasor, normalized by the direct magnitude: the element's relative
// channel improvement for that link. Positive means the phases align
// within a quarter cycle. For cross-band comparisons the projection is
// further scaled per wavelength, which removes the band factor our
// amplitude convention carries and treats the bands symmetrically, as
// isotropic elements do.
struct ElementView {
  ComplexAmplitude scattered;  // refl = 1
  double projection = 0.0;     // relative channel improvement
  double choice_metric = 0.0;  // projection per wavelength
};

inline ElementView element_view(const Position& elem, const StudyLink& link,
                                const ComplexAmplitude& direct) {
  ElementView v;
  v.scattered = scattered_amplitude(link.tx, elem, link.rx, link.frequency, 1.0);
  const double dmag2 = std::norm(direct);
  v.projection = (v.scattered * std::conj(direct)).real() / dmag2;
  v.choice_metric = v.projection / wavelength(link.frequency);
  return v;
}

}  // namespace detail

// On-off phase-alignment control: each element turns on when its reflected
// phase is within a quarter cycle of the direct phase, near-optimal for
// large on-off arrays. Multi-link behavior depends on the design's
// frequency selectivity.
inline std::vector<ElementChoice> phase_alignment_control(
    const std::vector<Position>& elements, const std::vector<StudyLink>& links,
    const std::vector<ComplexAmplitude>& direct, const ArrayDesign& design) {
  if (links.size() != direct.size())
    throw std::invalid_argument("one direct channel per link required");
  const int n_links = static_cast<int>(links.size());
  std::vector<ElementChoice> choices(elements.size());
  for (std::size_t e = 0; e < elements.size(); ++e) {
    std::vector<detail::ElementView> views;
    views.reserve(n_links);
    for (int l = 0; l < n_links; ++l)
      views.push_back(detail::element_view(elements[e], links[l], direct[l]));

    ElementChoice choice;
    switch (design.kind) {
      case DesignKind::tunable: {
        for (int l = 0; l < n_links; ++l) {
          if (views[l].projection <= 0.0) continue;
          if (!choice.on ||
              views[l].choice_metric > views[choice.serving_link].choice_metric) {
            choice.on = true;
            choice.serving_link = l;
          }
        }
        break;
      }
      case DesignKind::multi_design: {
        // Elements are striped evenly across the target frequency set.
        const int band = static_cast<int>(e) % n_links;
        if (views[band].projection > 0.0) {
          choice.on = true;
          choice.serving_link = band;
        }
        break;
      }
      case DesignKind::wideband: {
        if (design.wideband_rule == WidebandRule::all_aligned) {
          bool ok = true;
          for (int l = 0; l < n_links; ++l) ok &= views[l].projection > 0.0;
          choice.on = ok;
        } else {
          double sum = 0.0;
          for (int l = 0; l < n_links; ++l) sum += views[l].projection;
          choice.on = sum > 0.0;
        }
        choice.serving_link = -1;
        break;
      }
    }
    choices[e] = choice;
  }
  return choices;
}

// Power reaching the receiver from the surface alone (the direct path is
// excluded): coherent sum of the on elements that reflect this link's band.
inline double delivered_power_db(int link_index, const StudyLink& link,
                                 const std::vector<Position>& elements,
                                 const std::vector<ElementChoice>& choices,
                                 const ArrayDesign& design) {
  ComplexAmplitude sum{0.0, 0.0};
  for (std::size_t e = 0; e < elements.size(); ++e) {
    if (!choices[e].on) continue;
    if (design.kind != DesignKind::wideband &&
        choices[e].serving_link != link_index)
      continue;
    sum += scattered_amplitude(link.tx, elements[e], link.rx, link.frequency, 1.0);
  }
  const double mag = std::abs(sum);
  return 20.0 * std::log10(std::max(mag, 1e-30));
}

inline StudyResult run_study_trial(const ArrayDesign& design,
                                   const std::vector<StudyLink>& links,
                                   std::uint64_t trial_seed,
                                   const StudyGeometry& geom = {}) {
  const std::vector<Position> elements = element_grid(design, geom);
  std::vector<ComplexAmplitude> direct;
  direct.reserve(links.size());
  for (const auto& link : links)
    direct.push_back(direct_amplitude(link.tx, link.rx, link.frequency));
  const auto choices = phase_alignment_control(elements, links, direct, design);

  StudyResult result;
  result.trial_seed = trial_seed;
  result.elements_total = static_cast<int>(elements.size());
  for (const auto& c : choices) result.elements_on += c.on ? 1 : 0;
  for (std::size_t l = 0; l < links.size(); ++l) {
    result.delivered_power_db.push_back(delivered_power_db(
        static_cast<int>(l), links[l], elements, choices, design));
  }
  return result;
}

// Smallest square array whose median delivered power meets each link's
// band target. Trials are paired across grid sizes and designs through
// the seed.
struct ElementsNeededResult {
  bool converged = false;
  int grid_side = 0;
  int elements = 0;
};

inline ElementsNeededResult elements_needed(DesignKind kind, int n_frequencies,
                                            const std::vector<double>& targets_db,
                                            int trials, std::uint64_t seed,
                                            int grid_cap = 40,
                                            const StudyGeometry& geom = {},
                                            double base_spacing = 0.03) {
  if (static_cast<int>(targets_db.size()) < n_frequencies)
    throw std::invalid_argument("one target per frequency required");
  for (int g = 2; g <= grid_cap; ++g) {
    const ArrayDesign design = make_design(kind, g, g, base_spacing);
    std::vector<std::vector<double>> per_link(n_frequencies);
    for (int t = 0; t < trials; ++t) {
      SeededRng rng(mix_seed(mix_seed(seed, "study-trial"), t));
      const auto links = draw_study_links(n_frequencies, rng, geom);
      const StudyResult r = run_study_trial(design, links, t, geom);
      for (int l = 0; l < n_frequencies; ++l)
        per_link[l].push_back(r.delivered_power_db[l]);
    }
    bool ok = true;
    for (int l = 0; l < n_frequencies; ++l)
      ok &= median_of(per_link[l]) >= targets_db[l];
    if (ok) return {true, g, g * g};
  }
  return {false, grid_cap, grid_cap * grid_cap};
}

// The reference each link is measured against: what a dedicated 10x10
// tunable array serving one link on that band delivers. The first band's
// trials reuse the geometry stream of elements_needed so the single-link
// tunable search lands exactly back on 10x10.
inline std::vector<double> baseline_targets_db(int n_frequencies, int trials,
                                               std::uint64_t seed,
                                               const StudyGeometry& geom = {},
                                               double base_spacing = 0.03) {
  const ArrayDesign design = make_design(DesignKind::tunable, 10, 10, base_spacing);
  const auto freqs = study_frequencies(n_frequencies);
  std::vector<double> targets;
  for (int b = 0; b < n_frequencies; ++b) {
    std::vector<double> values;
    for (int t = 0; t < trials; ++t) {
      SeededRng rng(mix_seed(mix_seed(seed, "study-trial"), t));
      auto links = draw_study_links(1, rng, geom);
      links[0].frequency = freqs[b];
      values.push_back(run_study_trial(design, links, t, geom).delivered_power_db[0]);
    }
    targets.push_back(median_of(values));
  }
  return targets;
}

}  // namespace rollsurf
