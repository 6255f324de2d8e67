#pragma once

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsurf/record.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

namespace detail {

inline std::string format_position(const Position& p) {
  return textio::format_double(p.x) + "," + textio::format_double(p.y) + "," +
         textio::format_double(p.z);
}

inline Position parse_position(const std::string& s) {
  Position p;
  char* end = nullptr;
  p.x = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != ',') throw std::invalid_argument("bad position: " + s);
  p.y = std::strtod(end + 1, &end);
  if (end == nullptr || *end != ',') throw std::invalid_argument("bad position: " + s);
  p.z = std::strtod(end + 1, &end);
  return p;
}

}  // namespace detail

// Scene description format: one record per line.
//   scene seed=<u64>
//   layout name=<setup1|setup2|setup3> origin=<x,y,z> [count=<n>]
//   panel id=<id> origin=<x,y,z> [yaw_deg=<deg>]
//   endpoint id=<id> pos=<x,y,z> role=<transmitter|receiver> [feedback=<in-process|socket>]
//   link id=<id> tx=<endpoint> rx=<endpoint> freq_hz=<hz> [tx_power_dbm=<dbm>]
// Layout records are sugar; they expand to explicit panels on load, and
// writing a scene always emits the expanded canonical form.
inline Scene parse_scene(const std::string& text) {
  Scene scene;
  for (const Record& rec : parse_records(text)) {
    if (rec.name == "scene") {
      if (auto seed = rec.find("seed"))
        scene.multipath_seed = std::strtoull(seed->c_str(), nullptr, 10);
    } else if (rec.name == "layout") {
      const Position origin = detail::parse_position(rec.at("origin"));
      int count = 4;
      if (auto c = rec.find("count")) count = std::atoi(c->c_str());
      for (auto& p : panel_layout(rec.at("name"), origin, count))
        scene.panels.push_back(std::move(p));
    } else if (rec.name == "panel") {
      double yaw_deg = 0.0;
      if (auto y = rec.find("yaw_deg")) yaw_deg = std::strtod(y->c_str(), nullptr);
      scene.panels.push_back(build_default_panel(
          rec.at("id"), detail::parse_position(rec.at("origin")),
          yaw_deg * std::numbers::pi / 180.0));
    } else if (rec.name == "endpoint") {
      Endpoint e;
      e.id = rec.at("id");
      e.position = detail::parse_position(rec.at("pos"));
      const std::string role = rec.at("role");
      if (role == "transmitter") {
        e.role = EndpointRole::transmitter;
      } else if (role == "receiver") {
        e.role = EndpointRole::receiver;
      } else {
        throw std::invalid_argument("endpoint role must be transmitter|receiver");
      }
      if (auto fb = rec.find("feedback"))
        e.feedback = (*fb == "socket") ? FeedbackTransport::socket
                                       : FeedbackTransport::in_process;
      scene.endpoints.push_back(std::move(e));
    } else if (rec.name == "link") {
      Link l;
      l.id = rec.at("id");
      l.tx_id = rec.at("tx");
      l.rx_id = rec.at("rx");
      l.frequency = Frequency(std::strtod(rec.at("freq_hz").c_str(), nullptr));
      if (auto p = rec.find("tx_power_dbm"))
        l.tx_power_dbm = std::strtod(p->c_str(), nullptr);
      scene.links.push_back(std::move(l));
    } else {
      throw std::invalid_argument("unknown scene record: " + rec.name);
    }
  }
  const auto violations = validate_scene(scene);
  if (!violations.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  return scene;
}

inline std::string write_scene(const Scene& scene) {
  std::string out = "# rollsurf scene\n";
  {
    Record rec{"scene", {}};
    rec.add("seed", std::to_string(scene.multipath_seed));
    out += encode_record(rec);
  }
  for (const auto& p : scene.panels) {
    Record rec{"panel", {}};
    rec.add("id", p.id);
    rec.add("origin", detail::format_position(p.frame_origin));
    rec.add("yaw_deg", textio::format_double(p.yaw_rad * 180.0 / std::numbers::pi));
    out += encode_record(rec);
  }
  for (const auto& e : scene.endpoints) {
    Record rec{"endpoint", {}};
    rec.add("id", e.id);
    rec.add("pos", detail::format_position(e.position));
    rec.add("role",
            e.role == EndpointRole::transmitter ? "transmitter" : "receiver");
    rec.add("feedback", e.feedback == FeedbackTransport::socket ? "socket"
                                                                : "in-process");
    out += encode_record(rec);
  }
  for (const auto& l : scene.links) {
    Record rec{"link", {}};
    rec.add("id", l.id);
    rec.add("tx", l.tx_id);
    rec.add("rx", l.rx_id);
    rec.add("freq_hz", textio::format_double(l.frequency.hertz()));
    rec.add("tx_power_dbm", textio::format_double(l.tx_power_dbm));
    out += encode_record(rec);
  }
  return out;
}

inline Scene load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scene file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

inline void save_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << write_scene(scene);
}

}  // namespace rollsurf
