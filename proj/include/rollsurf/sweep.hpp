#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsurf/plant.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/rssi.hpp"
#include "rollsurf/state_space.hpp"

namespace rollsurf {

// One candidate state of one roll and the per-link RSSI deltas it showed.
struct CandidateOutcome {
  double length = 0.0;
  std::vector<double> deltas_db;  // link order
};

// Multi-link state selection: a state is discarded outright if any link
// lost margin_db or more; among the rest, a state is selectable only if
// some link gained strictly more than margin_db, and the winner maximizes
// the summed delta. Ties go to the shortest length (least travel).
// Returns the index of the winner, or nullopt to leave the roll off.
inline std::optional<std::size_t> select_state(
    const std::vector<CandidateOutcome>& candidates, double margin_db) {
  std::optional<std::size_t> best;
  double best_sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    bool no_loss = true;
    bool real_gain = false;
    double sum = 0.0;
    for (double delta : cand.deltas_db) {
      no_loss &= !(delta <= -margin_db);
      real_gain |= (delta > margin_db);
      sum += delta;
    }
    if (!no_loss || !real_gain) continue;
    if (!best || sum > best_sum ||
        (sum == best_sum && cand.length < candidates[*best].length)) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

enum class RollStatus { untested, tested_off, tested_set };

// Which rolls the search has settled; the run ends when nothing is left
// untested.
class TestLedger {
 public:
  explicit TestLedger(const std::vector<RollRef>& rolls) {
    for (const auto& r : rolls) status_[r.id] = RollStatus::untested;
  }

  RollStatus status(const std::string& roll_id) const {
    return status_.at(roll_id);
  }
  void mark(const std::string& roll_id, RollStatus s) { status_.at(roll_id) = s; }

  bool any_untested() const {
    for (const auto& [id, s] : status_)
      if (s == RollStatus::untested) return true;
    return false;
  }
  std::size_t untested_count() const {
    std::size_t n = 0;
    for (const auto& [id, s] : status_)
      if (s == RollStatus::untested) ++n;
    return n;
  }

 private:
  std::map<std::string, RollStatus> status_;
};

struct SweepParams {
  double dwell_per_stop_s = 0.5;
  std::uint64_t seed = 0;  // drives the group-sampling order only
};

struct RollDecision {
  std::string roll_id;
  bool extended = false;
  double chosen_length = 0.0;
  std::vector<double> chosen_deltas_db;  // link order; empty when left off
};

struct RunReport {
  SurfaceConfig final_config;
  ActuationLog log;
  std::vector<std::string> link_ids;
  std::vector<double> baseline_dbm;  // all-off, link order
  std::vector<double> achieved_dbm;  // final state, link order
  std::vector<RollDecision> decisions;
  int fallback_events = 0;      // group sweeps that fell back to one-by-one
  int group_effect_events = 0;  // gains with no single responsible roll
};

namespace detail {

inline std::vector<double> values_of(const std::vector<RssiReport>& reports) {
  std::vector<double> v;
  v.reserve(reports.size());
  for (const auto& r : reports) v.push_back(r.value_dbm);
  return v;
}

inline std::vector<double> deltas(const std::vector<double>& now,
                                  const std::vector<double>& base) {
  std::vector<double> d(now.size());
  for (std::size_t i = 0; i < now.size(); ++i) d[i] = now[i] - base[i];
  return d;
}

// Sweep state space for the run: union of every link's band space, with
// lengths clamped to the given roll bounds.
inline std::vector<double> run_state_space(const Scene& scene,
                                           const MotorSpec& motor,
                                           const RollRef& roll) {
  std::vector<Frequency> freqs;
  for (const auto& l : scene.links) freqs.push_back(l.frequency);
  return merged_state_space(freqs, motor, roll.min_length, roll.max_length)
      .lengths;
}

struct SweepContext {
  Plant& plant;
  const Scene& scene;
  const MeasurementPolicy& policy;
  const MotorSpec& motor;
  const SweepParams& params;
  RunReport& report;
  std::vector<double> last_stop;  // most recent settle measurement, link order

  std::vector<double> stop() {
    return values_of(plant.measure_stop(params.dwell_per_stop_s));
  }

  // Reset every roll to its off length as one simultaneous action, then
  // settle; the settle measurement doubles as the all-off baseline.
  void reset_all() {
    std::vector<std::pair<std::string, double>> moves;
    for (const auto& r : plant.rolls()) moves.emplace_back(r.id, r.min_length);
    plant.set_lengths(moves);
    last_stop = stop();
  }

  // Full individual test of one roll against the current state. Leaves the
  // roll at its selected length (or off), refreshes last_stop, and returns
  // every candidate outcome for the caller to inspect.
  std::vector<CandidateOutcome> test_roll(const RollRef& roll, bool& extended) {
    const std::vector<double> base = last_stop;
    const std::vector<double> states = run_state_space(scene, motor, roll);
    std::vector<CandidateOutcome> outcomes;
    for (double s : states) {
      plant.set_length(roll.id, s);
      outcomes.push_back({s, deltas(stop(), base)});
    }
    const auto pick = select_state(outcomes, policy.noise_floor_margin_db);
    RollDecision decision;
    decision.roll_id = roll.id;
    if (pick) {
      decision.extended = true;
      decision.chosen_length = outcomes[*pick].length;
      decision.chosen_deltas_db = outcomes[*pick].deltas_db;
      plant.set_length(roll.id, decision.chosen_length);
    } else {
      decision.extended = false;
      decision.chosen_length = roll.min_length;
      plant.set_length(roll.id, roll.min_length);
    }
    last_stop = stop();  // settle; next test's baseline
    extended = decision.extended;
    report.decisions.push_back(std::move(decision));
    return outcomes;
  }
};

inline RunReport make_report_shell(Plant& plant) {
  RunReport report;
  report.link_ids = plant.link_ids();
  return report;
}

inline void finalize_report(SweepContext& ctx, Plant& plant) {
  ctx.report.achieved_dbm = ctx.last_stop;
  ctx.report.final_config = plant.config_snapshot();
  ctx.report.log = plant.log();
}

}  // namespace detail

// Basic control: enumerate all rolls panel-major, sweeping each through
// its candidate lengths and keeping the best no-loss state.
inline RunReport enumerate_sweep(Plant& plant, const Scene& scene,
                                 const MeasurementPolicy& policy,
                                 const MotorSpec& motor,
                                 const SweepParams& params = {}) {
  RunReport report = detail::make_report_shell(plant);
  detail::SweepContext ctx{plant, scene, policy, motor, params, report, {}};
  ctx.reset_all();
  report.baseline_dbm = ctx.last_stop;
  for (const auto& roll : plant.rolls()) {
    bool extended = false;
    ctx.test_roll(roll, extended);
  }
  detail::finalize_report(ctx, plant);
  return report;
}

// Group sweeping: test one untested roll per panel simultaneously; only a
// group that shows a gain is taken apart one by one, everything else is
// cleared at the cost of a single sweep.
inline RunReport group_sweep(Plant& plant, const Scene& scene,
                             const MeasurementPolicy& policy,
                             const MotorSpec& motor,
                             const SweepParams& params = {}) {
  RunReport report = detail::make_report_shell(plant);
  detail::SweepContext ctx{plant, scene, policy, motor, params, report, {}};
  ctx.reset_all();
  report.baseline_dbm = ctx.last_stop;

  TestLedger ledger(plant.rolls());
  SeededRng group_rng(mix_seed(params.seed, "group-sampling"));

  // Panel-major index of untested rolls, rebuilt per iteration.
  const auto sample_group = [&]() {
    std::vector<RollRef> group;
    std::vector<std::string> panel_order;
    std::map<std::string, std::vector<RollRef>> pools;
    for (const auto& r : plant.rolls()) {
      if (ledger.status(r.id) != RollStatus::untested) continue;
      if (pools.find(r.panel_id) == pools.end()) panel_order.push_back(r.panel_id);
      pools[r.panel_id].push_back(r);
    }
    std::sort(panel_order.begin(), panel_order.end());
    for (const auto& pid : panel_order) {
      const auto& pool = pools[pid];
      group.push_back(pool[group_rng.uniform_index(pool.size())]);
    }
    return group;
  };

  while (ledger.any_untested()) {
    const std::size_t untested_before = ledger.untested_count();
    const std::vector<RollRef> group = sample_group();

    if (group.size() == 1) {
      // A lone roll gets a plain individual test; the group machinery
      // would just re-measure the same states.
      bool extended = false;
      ctx.test_roll(group[0], extended);
      ledger.mark(group[0].id,
                  extended ? RollStatus::tested_set : RollStatus::tested_off);
      continue;
    }

    const std::vector<double> rssi_base = ctx.last_stop;
    const std::vector<double> states =
        detail::run_state_space(scene, motor, group[0]);

    bool gain_seen = false;
    for (double s : states) {
      std::vector<std::pair<std::string, double>> moves;
      for (const auto& r : group)
        moves.emplace_back(r.id, std::clamp(s, r.min_length, r.max_length));
      plant.set_lengths(moves);
      const std::vector<double> d = detail::deltas(ctx.stop(), rssi_base);
      if (std::any_of(d.begin(), d.end(), [&](double x) {
            return x > policy.noise_floor_margin_db;
          })) {
        gain_seen = true;
        break;
      }
    }

    if (!gain_seen) {
      std::vector<std::pair<std::string, double>> moves;
      for (const auto& r : group) moves.emplace_back(r.id, r.min_length);
      plant.set_lengths(moves);
      ctx.last_stop = ctx.stop();
      for (const auto& r : group) ledger.mark(r.id, RollStatus::tested_off);
      continue;
    }

    // Somebody in the group helped: clear the group, then test its members
    // one by one (ascending panel id) until the gain is found. Rolls after
    // the responsible one return to the pool untested.
    ++report.fallback_events;
    {
      std::vector<std::pair<std::string, double>> moves;
      for (const auto& r : group) moves.emplace_back(r.id, r.min_length);
      plant.set_lengths(moves);
      ctx.last_stop = ctx.stop();
    }

    bool found = false;
    struct TestedCandidate {
      RollRef roll;
      CandidateOutcome outcome;
    };
    std::vector<TestedCandidate> tested;
    for (const auto& roll : group) {
      bool extended = false;
      const auto outcomes = ctx.test_roll(roll, extended);
      if (extended) {
        ledger.mark(roll.id, RollStatus::tested_set);
        found = true;
        break;
      }
      ledger.mark(roll.id, RollStatus::tested_off);
      for (const auto& o : outcomes) tested.push_back({roll, o});
    }

    if (!found) {
      // The gain had no single responsible roll (a constructive group
      // effect). Settle for the best no-loss single-roll state seen, if
      // any improved the sum at all, and flag the event.
      ++report.group_effect_events;
      const TestedCandidate* best = nullptr;
      double best_sum = 0.0;
      for (const auto& cand : tested) {
        bool no_loss = true;
        double sum = 0.0;
        for (double delta : cand.outcome.deltas_db) {
          no_loss &= !(delta <= -policy.noise_floor_margin_db);
          sum += delta;
        }
        if (!no_loss || sum <= 0.0) continue;
        if (best == nullptr || sum > best_sum) {
          best = &cand;
          best_sum = sum;
        }
      }
      if (best != nullptr) {
        plant.set_length(best->roll.id, best->outcome.length);
        ctx.last_stop = ctx.stop();
        ledger.mark(best->roll.id, RollStatus::tested_set);
        for (auto& d : report.decisions) {
          if (d.roll_id == best->roll.id) {
            d.extended = true;
            d.chosen_length = best->outcome.length;
            d.chosen_deltas_db = best->outcome.deltas_db;
          }
        }
      }
    }

    if (ledger.untested_count() >= untested_before)
      throw std::logic_error("group sweep made no progress");
  }

  detail::finalize_report(ctx, plant);
  return report;
}

}  // namespace rollsurf
