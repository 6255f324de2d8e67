#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace rollsurf {

// Stepper motor driving one roll's rod.
struct MotorSpec {
  double rpm = 20.0;
  double rod_radius = 0.003;  // m
  double min_step = 0.001;    // m, actuation resolution
};

// Time to roll a length delta at constant angular velocity. Surface speed
// at the rod circumference is 2*pi*r*(rpm/60).
inline double move_time(double delta_length_m, const MotorSpec& motor = {}) {
  const double speed =
      2.0 * std::numbers::pi * motor.rod_radius * motor.rpm / 60.0;
  return std::abs(delta_length_m) / speed;
}

// Travel and elapsed-time accounting for one control run. Motion and
// measurement dwell are tracked separately so speed-scaling comparisons
// can isolate the motor contribution.
class ActuationLog {
 public:
  // One roll moved on its own.
  void record_move(const std::string& roll_id, double from_length,
                   double to_length, const MotorSpec& motor = {}) {
    const double d = std::abs(to_length - from_length);
    travel_[roll_id] += d;
    motion_seconds_ += move_time(d, motor);
    ++move_count_;
  }

  // Several rolls moved simultaneously (one motor per roll), so the group
  // costs the slowest member's time while travel accrues per roll.
  void record_group_move(
      const std::vector<std::tuple<std::string, double, double>>& moves,
      const MotorSpec& motor = {}) {
    double worst = 0.0;
    for (const auto& [roll_id, from, to] : moves) {
      const double d = std::abs(to - from);
      travel_[roll_id] += d;
      worst = std::max(worst, move_time(d, motor));
      ++move_count_;
    }
    motion_seconds_ += worst;
  }

  void record_dwell(double seconds) {
    if (seconds < 0.0) throw std::invalid_argument("negative dwell");
    dwell_seconds_ += seconds;
    ++stop_count_;
  }

  double motion_seconds() const { return motion_seconds_; }
  double dwell_seconds() const { return dwell_seconds_; }
  double elapsed_seconds() const { return motion_seconds_ + dwell_seconds_; }
  std::int64_t move_count() const { return move_count_; }
  std::int64_t stop_count() const { return stop_count_; }
  double total_travel() const {
    double t = 0.0;
    for (const auto& [id, d] : travel_) t += d;
    return t;
  }
  const std::map<std::string, double>& travel_by_roll() const { return travel_; }

 private:
  std::map<std::string, double> travel_;
  double motion_seconds_ = 0.0;
  double dwell_seconds_ = 0.0;
  std::int64_t move_count_ = 0;
  std::int64_t stop_count_ = 0;
};

// Time for one roll to sweep a length range with measurement stops.
inline double sweep_time(double from_m, double to_m, int n_stops,
                         double dwell_per_stop_s, const MotorSpec& motor = {}) {
  if (n_stops < 1) throw std::invalid_argument("sweep_time: n_stops < 1");
  return move_time(to_m - from_m, motor) + n_stops * dwell_per_stop_s;
}

}  // namespace rollsurf
