#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsurf/actuation.hpp"
#include "rollsurf/channel.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/rssi.hpp"
#include "rollsurf/scene.hpp"

namespace rollsurf {

// All simulation knobs a run depends on, in one place so experiment
// manifests can record every one of them.
struct SimModels {
  MeasurementPolicy policy;
  ResonanceModel resonance;
  MultipathModel multipath;
  MotorSpec motor;
};

// The simulated RF truth shared by every node of a run: scene geometry,
// the live surface state, and the feedback endpoints. Each roll
// application advances the config epoch by one and makes every endpoint
// measure once and push a report, mirroring proactive device feedback.
class RfEnvironment {
 public:
  using ReportSink = std::function<void(const RssiReport&)>;

  RfEnvironment(Scene scene, SimModels models, std::uint64_t run_seed)
      : scene_(std::move(scene)), models_(models) {
    current_ = all_off_config(scene_);
    for (auto& p : scene_.panels)
      for (auto& r : p.rolls) r.exposed_length = current_.lengths.at(r.id);
    current_.epoch = 0;
    for (const auto& link : scene_.links) {
      feedback_.push_back(FeedbackState{
          link.id, SeededRng(mix_seed(mix_seed(run_seed, "endpoint"), fnv1a(link.id))),
          0});
    }
  }

  void set_report_sink(ReportSink sink) { sink_ = std::move(sink); }

  struct ApplyResult {
    double achieved_m = 0.0;
    std::int64_t epoch = 0;
  };

  // One SetLength application. The achieved length is the target snapped
  // to the motor resolution; out-of-bounds targets are rejected whole.
  ApplyResult apply_roll(const std::string& roll_id, double target_m) {
    Roll* roll = scene_.find_roll(roll_id);
    if (roll == nullptr) throw std::out_of_range("unknown roll: " + roll_id);
    const double achieved =
        models_.motor.min_step *
        std::round(target_m / models_.motor.min_step);
    if (achieved < roll->min_length - 1e-9 || achieved > roll->max_length + 1e-9)
      throw std::out_of_range("target " + std::to_string(target_m) +
                              " outside bounds of roll " + roll_id);
    roll->exposed_length = achieved;
    current_.lengths[roll_id] = achieved;
    current_.epoch = ++scene_.applied_epoch;
    push_reports();
    return {achieved, current_.epoch};
  }

  const Scene& scene() const { return scene_; }
  const SurfaceConfig& config() const { return current_; }
  std::int64_t epoch() const { return current_.epoch; }
  const SimModels& models() const { return models_; }

  double true_rssi(const Link& link) const {
    return true_rssi_dbm(link, scene_, current_, models_.policy,
                         models_.resonance, models_.multipath);
  }

 private:
  struct FeedbackState {
    std::string link_id;
    SeededRng rng;
    std::int64_t seq;
  };

  void push_reports() {
    if (!sink_) return;
    for (auto& fb : feedback_) {
      const Link& link = scene_.link(fb.link_id);
      RssiReport report;
      report.link_id = fb.link_id;
      report.value_dbm = measure_rssi(link, scene_, current_, models_.policy,
                                      fb.rng, models_.resonance, models_.multipath);
      report.epoch = current_.epoch;
      report.seq = fb.seq++;
      sink_(report);
    }
  }

  Scene scene_;
  SimModels models_;
  SurfaceConfig current_;
  std::vector<FeedbackState> feedback_;
  ReportSink sink_;
};

}  // namespace rollsurf
