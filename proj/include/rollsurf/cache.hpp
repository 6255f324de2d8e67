#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsurf/record.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/rssi.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

// A remembered surface configuration for one set of links: only the
// extended rolls are stored, together with the gain each link saw when the
// configuration was produced.
struct CacheEntry {
  std::string key;
  std::map<std::string, double> extended_lengths;  // roll id -> meters
  std::map<std::string, double> recorded_gain_db;  // link id -> dB
};

namespace detail {

inline long long round_cm(double meters) {
  return std::llround(meters * 100.0);
}

}  // namespace detail

// Canonical key for a link set: endpoint positions rounded to 1 cm plus
// the carrier frequencies, order-independent.
inline std::string cache_key(const Scene& scene,
                             const std::vector<std::string>& link_ids) {
  std::vector<std::string> parts;
  for (const auto& id : link_ids) {
    const Link& link = scene.link(id);
    const Position tx = scene.endpoint(link.tx_id).position;
    const Position rx = scene.endpoint(link.rx_id).position;
    std::ostringstream os;
    os << "f=" << std::llround(link.frequency.hertz()) << ";tx="
       << detail::round_cm(tx.x) << ',' << detail::round_cm(tx.y) << ','
       << detail::round_cm(tx.z) << ";rx=" << detail::round_cm(rx.x) << ','
       << detail::round_cm(rx.y) << ',' << detail::round_cm(rx.z);
    parts.push_back(os.str());
  }
  std::sort(parts.begin(), parts.end());
  std::uint64_t h = fnv1a("linkset");
  for (const auto& p : parts) h = mix_seed(h, fnv1a(p));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class ConfigCache {
 public:
  void store(const Scene& scene, const std::vector<std::string>& link_ids,
             const SurfaceConfig& config,
             const std::map<std::string, double>& gains_db,
             double off_length = kDefaultOffLength) {
    CacheEntry entry;
    entry.key = cache_key(scene, link_ids);
    for (const auto& [roll_id, length] : config.lengths) {
      if (length > off_length + 1e-12) entry.extended_lengths[roll_id] = length;
    }
    entry.recorded_gain_db = gains_db;
    entries_[entry.key] = std::move(entry);
  }

  std::optional<CacheEntry> lookup(const Scene& scene,
                                   const std::vector<std::string>& link_ids) const {
    auto it = entries_.find(cache_key(scene, link_ids));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }

  // Expands an entry back to a full configuration for a scene (unlisted
  // rolls are off).
  static SurfaceConfig expand(const CacheEntry& entry, const Scene& scene) {
    SurfaceConfig config = all_off_config(scene);
    for (const auto& [roll_id, length] : entry.extended_lengths) {
      if (config.lengths.find(roll_id) == config.lengths.end())
        throw std::invalid_argument("cached roll not in scene: " + roll_id);
      config.lengths[roll_id] = length;
    }
    return config;
  }

  // The cache file is a plain record stream; it is a pure performance
  // artifact and safe to delete at any time.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cache file: " + path);
    out << "# rollsurf configuration cache\n";
    for (const auto& [key, entry] : entries_) {
      Record rec{"cache-entry", {}};
      rec.add("key", key);
      for (const auto& [link_id, gain] : entry.recorded_gain_db)
        rec.add("gain." + link_id, textio::format_double(gain));
      for (const auto& [roll_id, length] : entry.extended_lengths)
        rec.add("roll." + roll_id,
                std::to_string(std::llround(length * 1000.0)));
      out << encode_record(rec);
    }
  }

  static ConfigCache load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cache file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ConfigCache cache;
    for (const Record& rec : parse_records(buf.str())) {
      if (rec.name != "cache-entry") continue;
      CacheEntry entry;
      entry.key = rec.at("key");
      for (const auto& [k, v] : rec.fields) {
        if (k.rfind("gain.", 0) == 0)
          entry.recorded_gain_db[k.substr(5)] = std::strtod(v.c_str(), nullptr);
        else if (k.rfind("roll.", 0) == 0)
          entry.extended_lengths[k.substr(5)] =
              static_cast<double>(std::strtoll(v.c_str(), nullptr, 10)) / 1000.0;
      }
      cache.entries_[entry.key] = std::move(entry);
    }
    return cache;
  }

 private:
  std::map<std::string, CacheEntry> entries_;
};

// Replays the entry and checks it still earns its keep: every link must
// retain at least `retain_fraction` of its recorded gain relative to the
// all-off baseline.
inline bool cache_validate(const CacheEntry& entry, const Scene& scene,
                           const std::vector<std::string>& link_ids,
                           const MeasurementPolicy& policy, SeededRng& rng,
                           const ResonanceModel& resonance = {},
                           const MultipathModel& multipath = {},
                           double retain_fraction = 0.5) {
  const SurfaceConfig off = all_off_config(scene);
  const SurfaceConfig cfg = ConfigCache::expand(entry, scene);
  for (const auto& link_id : link_ids) {
    const Link& link = scene.link(link_id);
    const double base = measure_rssi(link, scene, off, policy, rng, resonance, multipath);
    const double now = measure_rssi(link, scene, cfg, policy, rng, resonance, multipath);
    auto it = entry.recorded_gain_db.find(link_id);
    const double recorded = it == entry.recorded_gain_db.end() ? 0.0 : it->second;
    if (now - base < retain_fraction * recorded) return false;
  }
  return true;
}

}  // namespace rollsurf
