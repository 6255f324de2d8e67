#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsurf/environment.hpp"

namespace rollsurf {

struct RollRef {
  std::string id;
  std::string panel_id;
  double min_length = kDefaultOffLength;
  double max_length = 0.16;
};

// What a control algorithm is allowed to do to the surface: move rolls and
// dwell for feedback. Implementations run either in-process against the
// simulated environment directly, or across the control-plane transport;
// the algorithms cannot tell the difference.
class Plant {
 public:
  virtual ~Plant() = default;

  virtual const std::vector<RollRef>& rolls() const = 0;          // panel-major
  virtual const std::vector<std::string>& link_ids() const = 0;   // scene order
  virtual double current_length(const std::string& roll_id) const = 0;
  virtual std::int64_t epoch() const = 0;

  // Move one roll and block until acknowledged.
  virtual void set_length(const std::string& roll_id, double target_m) = 0;

  // Move several rolls as one simultaneous action (one motor per roll, so
  // the elapsed cost is the slowest member).
  virtual void set_lengths(
      const std::vector<std::pair<std::string, double>>& moves) = 0;

  // Dwell at the current state and return one report per link, in link
  // order, all stamped with the current epoch.
  virtual std::vector<RssiReport> measure_stop(double dwell_s) = 0;

  virtual ActuationLog& log() = 0;
  virtual SurfaceConfig config_snapshot() const = 0;
};

namespace detail {

inline std::vector<RollRef> collect_rolls(const Scene& scene) {
  std::vector<RollRef> out;
  for (const auto& p : scene.panels)
    for (const auto& r : p.rolls)
      out.push_back({r.id, r.panel_id, r.min_length, r.max_length});
  return out;
}

inline std::vector<std::string> collect_link_ids(const Scene& scene) {
  std::vector<std::string> out;
  for (const auto& l : scene.links) out.push_back(l.id);
  return out;
}

// Keeps the most recent report per link and the epoch it was taken under.
// Reports whose epoch does not match the current config epoch are never
// handed to the control loop.
class ReportCollector {
 public:
  void offer(const RssiReport& report) { latest_[report.link_id] = report; }

  std::vector<RssiReport> take_current(const std::vector<std::string>& link_order,
                                       std::int64_t epoch) const {
    std::vector<RssiReport> out;
    out.reserve(link_order.size());
    for (const auto& id : link_order) {
      auto it = latest_.find(id);
      if (it == latest_.end() || it->second.epoch != epoch)
        throw std::runtime_error("no current-epoch feedback from link " + id);
      out.push_back(it->second);
    }
    return out;
  }

  bool has_current(const std::vector<std::string>& link_order,
                   std::int64_t epoch) const {
    for (const auto& id : link_order) {
      auto it = latest_.find(id);
      if (it == latest_.end() || it->second.epoch != epoch) return false;
    }
    return true;
  }

 private:
  std::map<std::string, RssiReport> latest_;
};

}  // namespace detail

// Plant backed directly by the in-process environment; the zero-latency,
// zero-loss reference all transports must match.
class InprocPlant : public Plant {
 public:
  explicit InprocPlant(RfEnvironment& env) : env_(env) {
    rolls_ = detail::collect_rolls(env.scene());
    link_ids_ = detail::collect_link_ids(env.scene());
    env_.set_report_sink([this](const RssiReport& r) { collector_.offer(r); });
  }

  const std::vector<RollRef>& rolls() const override { return rolls_; }
  const std::vector<std::string>& link_ids() const override { return link_ids_; }

  double current_length(const std::string& roll_id) const override {
    return env_.config().length_of(roll_id);
  }

  std::int64_t epoch() const override { return env_.epoch(); }

  void set_length(const std::string& roll_id, double target_m) override {
    const double from = current_length(roll_id);
    const auto applied = env_.apply_roll(roll_id, target_m);
    log_.record_move(roll_id, from, applied.achieved_m, env_.models().motor);
  }

  void set_lengths(
      const std::vector<std::pair<std::string, double>>& moves) override {
    std::vector<std::tuple<std::string, double, double>> done;
    done.reserve(moves.size());
    for (const auto& [roll_id, target] : moves) {
      const double from = current_length(roll_id);
      const auto applied = env_.apply_roll(roll_id, target);
      done.emplace_back(roll_id, from, applied.achieved_m);
    }
    log_.record_group_move(done, env_.models().motor);
  }

  std::vector<RssiReport> measure_stop(double dwell_s) override {
    log_.record_dwell(dwell_s);
    return collector_.take_current(link_ids_, env_.epoch());
  }

  ActuationLog& log() override { return log_; }
  SurfaceConfig config_snapshot() const override { return env_.config(); }

 private:
  RfEnvironment& env_;
  std::vector<RollRef> rolls_;
  std::vector<std::string> link_ids_;
  detail::ReportCollector collector_;
  ActuationLog log_;
};

}  // namespace rollsurf
