#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "rollsurf/record.hpp"

namespace rollsurf {

enum class NodeRole { server, controller, panel, endpoint };

inline const char* role_name(NodeRole r) {
  switch (r) {
    case NodeRole::server: return "server";
    case NodeRole::controller: return "controller";
    case NodeRole::panel: return "panel";
    case NodeRole::endpoint: return "endpoint";
  }
  return "?";
}

inline NodeRole parse_role(const std::string& s) {
  if (s == "server") return NodeRole::server;
  if (s == "controller") return NodeRole::controller;
  if (s == "panel") return NodeRole::panel;
  if (s == "endpoint") return NodeRole::endpoint;
  throw std::invalid_argument("unknown node role: " + s);
}

// Command to one roll. `epoch` is the per-panel command sequence number;
// panels reject anything out of order, which makes retried deliveries
// harmless.
struct SetLength {
  std::string panel_id;
  std::string roll_id;
  int target_mm = 0;
  std::int64_t epoch = 0;

  bool operator==(const SetLength&) const = default;
};

struct Ack {
  std::string panel_id;
  std::string roll_id;
  std::int64_t epoch = 0;
  int actual_mm = 0;

  bool operator==(const Ack&) const = default;
};

// Proactive endpoint feedback. `epoch` here is the global configuration
// epoch the sample was measured under.
struct RssiFeedback {
  std::string link_id;
  double value_dbm = 0.0;
  std::int64_t epoch = 0;
  std::int64_t seq = 0;

  bool operator==(const RssiFeedback&) const = default;
};

struct Hello {
  std::string node_id;
  NodeRole role = NodeRole::panel;

  bool operator==(const Hello&) const = default;
};

struct ErrorMsg {
  std::string code;  // "bounds", "stale", "malformed", ...
  std::string detail;

  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<SetLength, Ack, RssiFeedback, Hello, ErrorMsg>;

// Wire form: one newline-delimited text record per message. Unknown fields
// in inbound records are ignored so the format can grow.
inline std::string encode_message(const Message& msg) {
  Record rec;
  std::visit(
      [&rec](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SetLength>) {
          rec.name = "set-length";
          rec.add("panel", m.panel_id);
          rec.add("roll", m.roll_id);
          rec.add("target_mm", std::to_string(m.target_mm));
          rec.add("epoch", std::to_string(m.epoch));
        } else if constexpr (std::is_same_v<T, Ack>) {
          rec.name = "ack";
          rec.add("panel", m.panel_id);
          rec.add("roll", m.roll_id);
          rec.add("epoch", std::to_string(m.epoch));
          rec.add("actual_mm", std::to_string(m.actual_mm));
        } else if constexpr (std::is_same_v<T, RssiFeedback>) {
          rec.name = "rssi";
          rec.add("link", m.link_id);
          rec.add("value_dbm", textio::format_double(m.value_dbm));
          rec.add("epoch", std::to_string(m.epoch));
          rec.add("seq", std::to_string(m.seq));
        } else if constexpr (std::is_same_v<T, Hello>) {
          rec.name = "hello";
          rec.add("node", m.node_id);
          rec.add("role", role_name(m.role));
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          rec.name = "error";
          rec.add("code", m.code);
          rec.add("detail", m.detail);
        }
      },
      msg);
  return encode_record(rec);
}

inline Message decode_message(std::string_view line, std::size_t base_offset = 0) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.remove_suffix(1);
  const Record rec = parse_record(line, base_offset);
  const auto to_i64 = [&](const std::string& v) -> std::int64_t {
    return std::strtoll(v.c_str(), nullptr, 10);
  };
  if (rec.name == "set-length") {
    SetLength m;
    m.panel_id = rec.at("panel");
    m.roll_id = rec.at("roll");
    m.target_mm = static_cast<int>(to_i64(rec.at("target_mm")));
    m.epoch = to_i64(rec.at("epoch"));
    return m;
  }
  if (rec.name == "ack") {
    Ack m;
    m.panel_id = rec.at("panel");
    m.roll_id = rec.at("roll");
    m.epoch = to_i64(rec.at("epoch"));
    m.actual_mm = static_cast<int>(to_i64(rec.at("actual_mm")));
    return m;
  }
  if (rec.name == "rssi") {
    RssiFeedback m;
    m.link_id = rec.at("link");
    m.value_dbm = std::strtod(rec.at("value_dbm").c_str(), nullptr);
    m.epoch = to_i64(rec.at("epoch"));
    m.seq = to_i64(rec.at("seq"));
    return m;
  }
  if (rec.name == "hello") {
    return Hello{rec.at("node"), parse_role(rec.at("role"))};
  }
  if (rec.name == "error") {
    return ErrorMsg{rec.at("code"), rec.at("detail")};
  }
  throw RecordError(base_offset, "unknown message type: " + rec.name);
}

}  // namespace rollsurf
