#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rollsurf/em.hpp"

namespace rollsurf {

// Copper strip geometry shared by all rolls.
struct StripSpec {
  double width = 0.006;       // m
  double max_length = 0.16;   // m, completely unrolled
  double spacing = 0.03;      // m between adjacent strips on a roll
};

inline constexpr double kDefaultOffLength = 0.01;   // m, fully rolled
inline constexpr double kDefaultRollWidth = 0.40;   // m of rod hosting strips
inline constexpr int kStripsPerRoll = 14;
inline constexpr int kRollsPerPanel = 9;
inline constexpr double kPanelExtent = 0.45;        // m, square frame

// One rotatable sheet of strips. axis_origin is the start of the rod;
// rod_direction runs along the rod, orientation is the direction strips
// extend as they unroll (default straight down).
struct Roll {
  std::string id;
  std::string panel_id;
  Position axis_origin;
  Position rod_direction{1.0, 0.0, 0.0};
  Position orientation{0.0, 0.0, -1.0};
  std::vector<double> strip_offsets;  // along the rod, from axis_origin
  double exposed_length = kDefaultOffLength;
  double min_length = kDefaultOffLength;
  double max_length = 0.16;
};

struct Panel {
  std::string id;
  Position frame_origin;    // top corner of the frame, rod side
  double yaw_rad = 0.0;     // rotation of the frame about +z
  std::vector<Roll> rolls;
};

enum class EndpointRole { transmitter, receiver };
enum class FeedbackTransport { in_process, socket };

struct Endpoint {
  std::string id;
  Position position;
  EndpointRole role = EndpointRole::transmitter;
  FeedbackTransport feedback = FeedbackTransport::in_process;
};

struct Link {
  std::string id;
  std::string tx_id;
  std::string rx_id;
  Frequency frequency{2.412e9};
  double tx_power_dbm = 15.0;
};

struct Scene {
  std::vector<Panel> panels;
  std::vector<Endpoint> endpoints;
  std::vector<Link> links;
  std::uint64_t multipath_seed = 0;
  std::int64_t applied_epoch = 0;  // bumped by apply_config

  const Endpoint& endpoint(const std::string& id) const {
    for (const auto& e : endpoints)
      if (e.id == id) return e;
    throw std::out_of_range("unknown endpoint: " + id);
  }
  const Link& link(const std::string& id) const {
    for (const auto& l : links)
      if (l.id == id) return l;
    throw std::out_of_range("unknown link: " + id);
  }
  Roll* find_roll(const std::string& roll_id) {
    for (auto& p : panels)
      for (auto& r : p.rolls)
        if (r.id == roll_id) return &r;
    return nullptr;
  }
  const Roll* find_roll(const std::string& roll_id) const {
    return const_cast<Scene*>(this)->find_roll(roll_id);
  }
  std::size_t roll_count() const {
    std::size_t n = 0;
    for (const auto& p : panels) n += p.rolls.size();
    return n;
  }
};

// Exposed length per roll plus the version stamp that binds feedback
// measurements to the surface state they were taken under.
struct SurfaceConfig {
  std::map<std::string, double> lengths;  // roll id -> meters
  std::int64_t epoch = 0;

  double length_of(const std::string& roll_id) const {
    auto it = lengths.find(roll_id);
    if (it == lengths.end())
      throw std::out_of_range("config missing roll: " + roll_id);
    return it->second;
  }
};

inline SurfaceConfig all_off_config(const Scene& scene) {
  SurfaceConfig cfg;
  for (const auto& p : scene.panels)
    for (const auto& r : p.rolls) cfg.lengths[r.id] = r.min_length;
  return cfg;
}

inline Position rotate_yaw(const Position& v, double yaw_rad) {
  const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

// 9 rolls of 14 strips at 3 cm pitch, all fully rolled. The frame is a
// 45 cm square in the local x-z plane; rods run along local +x spaced
// 5 cm apart vertically, strips unroll straight down.
inline Panel build_default_panel(const std::string& id,
                                 const Position& frame_origin,
                                 double yaw_rad = 0.0,
                                 const StripSpec& strips = {}) {
  Panel panel;
  panel.id = id;
  panel.frame_origin = frame_origin;
  panel.yaw_rad = yaw_rad;
  const double rod_pitch = kPanelExtent / kRollsPerPanel;              // 5 cm
  const double used = (kStripsPerRoll - 1) * strips.spacing;           // 39 cm
  const double rod_margin = 0.5 * (kDefaultRollWidth - used);          // 0.5 cm
  const double frame_margin = 0.5 * (kPanelExtent - kDefaultRollWidth);
  for (int j = 0; j < kRollsPerPanel; ++j) {
    Roll roll;
    roll.id = id + "/r" + std::to_string(j);
    roll.panel_id = id;
    roll.rod_direction = rotate_yaw({1.0, 0.0, 0.0}, yaw_rad);
    roll.orientation = {0.0, 0.0, -1.0};
    const Position local{frame_margin, 0.0, -(0.5 * rod_pitch + j * rod_pitch)};
    roll.axis_origin = frame_origin + rotate_yaw(local, yaw_rad);
    roll.strip_offsets.reserve(kStripsPerRoll);
    for (int i = 0; i < kStripsPerRoll; ++i)
      roll.strip_offsets.push_back(rod_margin + i * strips.spacing);
    roll.exposed_length = kDefaultOffLength;
    roll.min_length = kDefaultOffLength;
    roll.max_length = strips.max_length;
    panel.rolls.push_back(std::move(roll));
  }
  return panel;
}

struct ElementSite {
  std::string strip_id;
  Position position;       // radiating center of the exposed part
  double exposed_length;   // m
};

// Effective radiating centers: the midpoint of the exposed part of each
// strip, so rolling shifts both the resonance and the path phase.
inline std::vector<ElementSite> element_positions(const Roll& roll) {
  std::vector<ElementSite> out;
  out.reserve(roll.strip_offsets.size());
  for (std::size_t i = 0; i < roll.strip_offsets.size(); ++i) {
    ElementSite site;
    site.strip_id = roll.id + "/s" + std::to_string(i);
    site.position = roll.axis_origin + roll.strip_offsets[i] * roll.rod_direction +
                    (0.5 * roll.exposed_length) * roll.orientation;
    site.exposed_length = roll.exposed_length;
    out.push_back(std::move(site));
  }
  return out;
}

inline std::vector<ElementSite> element_positions(const Roll& roll,
                                                  double exposed_length) {
  Roll r = roll;
  r.exposed_length = exposed_length;
  return element_positions(r);
}

// Validates the whole scene and returns every violation found.
inline std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> bad;
  std::unordered_set<std::string> ids;
  auto claim = [&](const std::string& id, const char* what) {
    if (!ids.insert(id).second)
      bad.push_back(std::string(what) + " id not unique: " + id);
  };
  for (const auto& p : scene.panels) {
    claim(p.id, "panel");
    for (const auto& r : p.rolls) {
      claim(r.id, "roll");
      if (!(r.min_length <= r.exposed_length && r.exposed_length <= r.max_length))
        bad.push_back("roll " + r.id + ": exposed length " +
                      std::to_string(r.exposed_length) + " outside bounds");
      if (!r.strip_offsets.empty()) {
        const double used = r.strip_offsets.back() - r.strip_offsets.front();
        if (used > kDefaultRollWidth + 1e-9)
          bad.push_back("roll " + r.id + ": strips exceed roll width");
      }
      if (!r.axis_origin.finite())
        bad.push_back("roll " + r.id + ": non-finite origin");
    }
  }
  for (const auto& e : scene.endpoints) {
    claim(e.id, "endpoint");
    if (!e.position.finite())
      bad.push_back("endpoint " + e.id + ": non-finite position");
  }
  for (const auto& l : scene.links) {
    claim(l.id, "link");
    if (l.tx_id == l.rx_id)
      bad.push_back("link " + l.id + ": tx and rx are the same endpoint");
    for (const std::string& ep : {l.tx_id, l.rx_id}) {
      bool found = false;
      for (const auto& e : scene.endpoints) found |= (e.id == ep);
      if (!found) bad.push_back("link " + l.id + ": unknown endpoint " + ep);
    }
  }
  return bad;
}

// Applies a full configuration atomically: every length is validated
// against its roll's bounds before any roll is touched.
inline void apply_config(Scene& scene, const SurfaceConfig& config) {
  for (const auto& p : scene.panels) {
    for (const auto& r : p.rolls) {
      auto it = config.lengths.find(r.id);
      if (it == config.lengths.end())
        throw std::invalid_argument("config does not cover roll " + r.id);
      if (!(it->second >= r.min_length - 1e-12 &&
            it->second <= r.max_length + 1e-12))
        throw std::out_of_range("config length for roll " + r.id +
                                " outside bounds");
    }
  }
  for (auto& p : scene.panels)
    for (auto& r : p.rolls) r.exposed_length = config.lengths.at(r.id);
  ++scene.applied_epoch;
}

// Panel placement presets. setup1: panels side by side in a row facing +y.
// setup2: half the row turned 90 degrees. setup3: two stacked rows of two.
inline std::vector<Panel> panel_layout(const std::string& name,
                                       const Position& origin,
                                       int count = 4) {
  std::vector<Panel> panels;
  const double pitch = kPanelExtent + 0.05;
  if (name == "setup1") {
    for (int i = 0; i < count; ++i)
      panels.push_back(build_default_panel(
          "p" + std::to_string(i), origin + Position{i * pitch, 0.0, 0.0}));
  } else if (name == "setup2") {
    const int straight = (count + 1) / 2;
    for (int i = 0; i < count; ++i) {
      if (i < straight) {
        panels.push_back(build_default_panel(
            "p" + std::to_string(i), origin + Position{i * pitch, 0.0, 0.0}));
      } else {
        const Position corner =
            origin + Position{straight * pitch, -(i - straight) * pitch, 0.0};
        panels.push_back(build_default_panel("p" + std::to_string(i), corner,
                                             -std::numbers::pi / 2.0));
      }
    }
  } else if (name == "setup3") {
    for (int i = 0; i < count; ++i) {
      const int col = i % 2, row = i / 2;
      panels.push_back(build_default_panel(
          "p" + std::to_string(i),
          origin + Position{col * pitch, 0.0, row * pitch}));
    }
  } else {
    throw std::invalid_argument("unknown panel layout: " + name);
  }
  return panels;
}

}  // namespace rollsurf
