#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsurf/environment.hpp"
#include "rollsurf/plant.hpp"
#include "rollsurf/protocol.hpp"
#include "rollsurf/sweep.hpp"
#include "rollsurf/transport.hpp"

namespace rollsurf {

// Panel firmware: accepts roll commands, simulates the motor motion, and
// acknowledges with the achieved length. The per-panel epoch guard makes
// duplicate deliveries harmless and rejects stale commands.
class PanelNode {
 public:
  PanelNode(std::string id, RfEnvironment& env)
      : id_(std::move(id)), env_(env) {}

  const std::string& id() const { return id_; }
  Hello hello() const { return {id_, NodeRole::panel}; }
  void mark_handshaken() { handshaken_ = true; }
  const ActuationLog& local_log() const { return local_log_; }

  Message handle(const SetLength& cmd) {
    if (!handshaken_)
      return ErrorMsg{"no-handshake", "panel " + id_ + " has not said hello"};
    if (cmd.epoch == last_epoch_ && last_ack_ && last_ack_->roll_id == cmd.roll_id)
      return *last_ack_;  // duplicate delivery, re-ack without moving
    if (cmd.epoch <= last_epoch_)
      return ErrorMsg{"stale", "panel " + id_ + " already at epoch " +
                                   std::to_string(last_epoch_)};
    const Roll* roll = env_.scene().find_roll(cmd.roll_id);
    if (roll == nullptr || roll->panel_id != id_)
      return ErrorMsg{"bounds", "panel " + id_ + " has no roll " + cmd.roll_id};
    const double target_m = cmd.target_mm / 1000.0;
    if (target_m < roll->min_length - 1e-9 || target_m > roll->max_length + 1e-9)
      return ErrorMsg{"bounds", "target " + std::to_string(cmd.target_mm) +
                                    " mm outside bounds of " + cmd.roll_id};
    const double from = env_.config().length_of(cmd.roll_id);
    const auto applied = env_.apply_roll(cmd.roll_id, target_m);
    local_log_.record_move(cmd.roll_id, from, applied.achieved_m,
                           env_.models().motor);
    last_epoch_ = cmd.epoch;
    last_ack_ = Ack{id_, cmd.roll_id, cmd.epoch,
                    static_cast<int>(std::llround(applied.achieved_m * 1000.0))};
    return *last_ack_;
  }

 private:
  std::string id_;
  RfEnvironment& env_;
  bool handshaken_ = false;
  std::int64_t last_epoch_ = 0;
  std::optional<Ack> last_ack_;
  ActuationLog local_log_;
};

// Everything on the far side of the control link: a controller that routes
// commands to its panels, and the feedback endpoints that push RSSI after
// every configuration change. Single-threaded; messages are handled
// strictly in arrival order.
class RemoteCluster {
 public:
  explicit RemoteCluster(RfEnvironment& env, std::string controller_id = "ctrl0")
      : env_(env), controller_id_(std::move(controller_id)) {
    for (const auto& p : env_.scene().panels) panels_.emplace_back(p.id, env_);
    env_.set_report_sink([this](const RssiReport& r) {
      RssiFeedback fb{r.link_id, r.value_dbm, r.epoch, r.seq};
      feedback_outbox_.push_back(encode_message(fb));
    });
  }

  // The handshake burst every node opens with.
  std::vector<std::string> hello_lines() {
    std::vector<std::string> out;
    out.push_back(encode_message(Hello{controller_id_, NodeRole::controller}));
    for (auto& p : panels_) {
      out.push_back(encode_message(p.hello()));
      p.mark_handshaken();
    }
    for (const auto& link : env_.scene().links) {
      out.push_back(encode_message(
          Hello{"feedback/" + link.id, NodeRole::endpoint}));
    }
    return out;
  }

  std::vector<std::string> handle_line(const std::string& line) {
    std::vector<std::string> out;
    Message msg = ErrorMsg{};
    try {
      msg = decode_message(line);
    } catch (const RecordError& e) {
      out.push_back(encode_message(ErrorMsg{"malformed", e.what()}));
      return out;
    }
    if (const auto* cmd = std::get_if<SetLength>(&msg)) {
      PanelNode* panel = find_panel(cmd->panel_id);
      Message reply =
          panel ? panel->handle(*cmd)
                : Message(ErrorMsg{"route", "controller " + controller_id_ +
                                                " has no panel " + cmd->panel_id});
      // Feedback generated while the panel applied the command goes out
      // first, then the ack, matching the order events happened.
      for (auto& fb : feedback_outbox_) out.push_back(std::move(fb));
      feedback_outbox_.clear();
      out.push_back(encode_message(reply));
      return out;
    }
    out.push_back(encode_message(
        ErrorMsg{"route", "controller cannot handle this message type"}));
    return out;
  }

  const PanelNode* find_panel(const std::string& id) const {
    return const_cast<RemoteCluster*>(this)->find_panel(id);
  }

 private:
  PanelNode* find_panel(const std::string& id) {
    for (auto& p : panels_)
      if (p.id() == id) return &p;
    return nullptr;
  }

  RfEnvironment& env_;
  std::string controller_id_;
  std::vector<PanelNode> panels_;
  std::vector<std::string> feedback_outbox_;
};

struct DistributedConfig {
  int max_retries = 5;
  double feedback_timeout_s = 5.0;
  double ack_base_timeout_ms = 50.0;  // grown by the transport latency model
};

// Plant that drives the surface across the control link. Accounting is
// identical to the in-process plant, so a lossless transport yields
// bit-identical runs.
class DistributedPlant : public Plant {
 public:
  DistributedPlant(const Scene& scene, const SimModels& models,
                   ServerLink& link, const TransportOptions& transport,
                   DistributedConfig cfg = {})
      : scene_(scene), models_(models), link_(link), cfg_(cfg) {
    // The wire carries integer millimeters, so achieved lengths are exact
    // only at millimeter actuation resolution.
    if (std::abs(models.motor.min_step - 0.001) > 1e-12)
      throw std::invalid_argument(
          "distributed control requires millimeter actuation resolution");
    rolls_ = detail::collect_rolls(scene);
    link_ids_ = detail::collect_link_ids(scene);
    for (const auto& r : rolls_) {
      const Roll* roll = scene.find_roll(r.id);
      lengths_[r.id] = roll->exposed_length;
    }
    ack_wait_ms_ = std::max(
        cfg.ack_base_timeout_ms,
        2.0 * (transport.latency_ms + transport.jitter_ms) + 1.0);
    await_handshake();
  }

  const std::vector<RollRef>& rolls() const override { return rolls_; }
  const std::vector<std::string>& link_ids() const override { return link_ids_; }

  double current_length(const std::string& roll_id) const override {
    return lengths_.at(roll_id);
  }

  std::int64_t epoch() const override { return global_epoch_; }

  void set_length(const std::string& roll_id, double target_m) override {
    const double from = lengths_.at(roll_id);
    const double achieved = apply_command(roll_id, target_m);
    log_.record_move(roll_id, from, achieved, models_.motor);
  }

  void set_lengths(
      const std::vector<std::pair<std::string, double>>& moves) override {
    std::vector<std::tuple<std::string, double, double>> done;
    done.reserve(moves.size());
    for (const auto& [roll_id, target] : moves) {
      const double from = lengths_.at(roll_id);
      const double achieved = apply_command(roll_id, target);
      done.emplace_back(roll_id, from, achieved);
    }
    log_.record_group_move(done, models_.motor);
  }

  std::vector<RssiReport> measure_stop(double dwell_s) override {
    log_.record_dwell(dwell_s);
    const auto deadline =
        std::chrono::steady_clock::now() +
        std::chrono::milliseconds(
            static_cast<int>(cfg_.feedback_timeout_s * 1000.0));
    while (!collector_.has_current(link_ids_, global_epoch_)) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) break;
      const auto line = link_.receive_line(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
      if (!line) break;
      file_inbound(*line);
    }
    if (!collector_.has_current(link_ids_, global_epoch_)) {
      for (const auto& id : link_ids_) {
        // name the silent node precisely
        try {
          collector_.take_current({id}, global_epoch_);
        } catch (const std::exception&) {
          throw std::runtime_error("feedback timeout: no report from link " + id +
                                   " for epoch " + std::to_string(global_epoch_));
        }
      }
    }
    return collector_.take_current(link_ids_, global_epoch_);
  }

  ActuationLog& log() override { return log_; }

  SurfaceConfig config_snapshot() const override {
    SurfaceConfig cfg;
    cfg.lengths = lengths_;
    cfg.epoch = global_epoch_;
    return cfg;
  }

 private:
  void await_handshake() {
    std::set<std::string> expected;
    for (const auto& p : scene_.panels) expected.insert(p.id);
    for (const auto& l : scene_.links) expected.insert("feedback/" + l.id);
    bool controller_seen = false;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (!expected.empty() || !controller_seen) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline)
        throw std::runtime_error("handshake timeout; missing " +
                                 std::to_string(expected.size()) + " nodes");
      const auto line = link_.receive_line(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
      if (!line) continue;
      const Message msg = decode_message(*line);
      if (const auto* hello = std::get_if<Hello>(&msg)) {
        if (hello->role == NodeRole::controller)
          controller_seen = true;
        else
          expected.erase(hello->node_id);
      }
    }
  }

  void file_inbound(const std::string& line) {
    const Message msg = decode_message(line);
    if (const auto* fb = std::get_if<RssiFeedback>(&msg)) {
      RssiReport report{fb->link_id, fb->value_dbm, fb->epoch, fb->seq};
      collector_.offer(report);
    } else if (const auto* ack = std::get_if<Ack>(&msg)) {
      pending_acks_.push_back(*ack);
    } else if (const auto* err = std::get_if<ErrorMsg>(&msg)) {
      throw std::runtime_error("control error (" + err->code + "): " + err->detail);
    }
  }

  double apply_command(const std::string& roll_id, double target_m) {
    const Roll* roll = scene_.find_roll(roll_id);
    if (roll == nullptr) throw std::out_of_range("unknown roll: " + roll_id);
    const std::string& panel_id = roll->panel_id;
    const std::int64_t epoch = ++panel_seq_[panel_id];
    SetLength cmd{panel_id, roll_id,
                  static_cast<int>(std::llround(target_m * 1000.0)), epoch};
    const std::string wire = encode_message(cmd);

    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      link_.send_line(wire);
      const auto deadline =
          std::chrono::steady_clock::now() +
          std::chrono::duration<double, std::milli>(ack_wait_ms_);
      for (;;) {
        // a retried command may have been acked already
        if (const auto ack = take_ack(panel_id, roll_id, epoch)) {
          ++global_epoch_;
          const double achieved = ack->actual_mm * models_.motor.min_step;
          lengths_[roll_id] = achieved;
          return achieved;
        }
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) break;
        const auto line = link_.receive_line(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
        if (!line) break;
        file_inbound(*line);
      }
    }
    throw std::runtime_error("no ack from panel " + panel_id + " for roll " +
                             roll_id + " after " +
                             std::to_string(cfg_.max_retries + 1) + " attempts");
  }

  std::optional<Ack> take_ack(const std::string& panel_id,
                              const std::string& roll_id, std::int64_t epoch) {
    for (auto it = pending_acks_.begin(); it != pending_acks_.end(); ++it) {
      if (it->panel_id == panel_id && it->roll_id == roll_id &&
          it->epoch == epoch) {
        Ack ack = *it;
        pending_acks_.erase(it);
        return ack;
      }
    }
    return std::nullopt;
  }

  const Scene& scene_;
  SimModels models_;
  ServerLink& link_;
  DistributedConfig cfg_;
  double ack_wait_ms_ = 50.0;
  std::vector<RollRef> rolls_;
  std::vector<std::string> link_ids_;
  std::map<std::string, double> lengths_;
  std::map<std::string, std::int64_t> panel_seq_;
  std::int64_t global_epoch_ = 0;
  detail::ReportCollector collector_;
  ActuationLog log_;
  std::vector<Ack> pending_acks_;
};

enum class Algorithm { enumerate, group };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "enumerate") return Algorithm::enumerate;
  if (s == "group") return Algorithm::group;
  throw std::invalid_argument("unknown algorithm: " + s);
}

inline RunReport run_sweep(Plant& plant, const Scene& scene, Algorithm algo,
                           const SimModels& models, const SweepParams& params) {
  return algo == Algorithm::enumerate
             ? enumerate_sweep(plant, scene, models.policy, models.motor, params)
             : group_sweep(plant, scene, models.policy, models.motor, params);
}

// Runs a sweep entirely in process against the simulated environment; the
// reference every transport must reproduce bit for bit.
inline RunReport run_inproc(const Scene& scene, Algorithm algo,
                            const SimModels& models, std::uint64_t run_seed,
                            SweepParams params = {}) {
  RfEnvironment env(scene, models, run_seed);
  InprocPlant plant(env);
  params.seed = run_seed;
  return run_sweep(plant, scene, algo, models, params);
}

enum class TransportKind { inproc, socket };

// Runs the same sweep with every command and report crossing the selected
// transport: server <-> controller <-> panels plus endpoint feedback.
inline RunReport run_distributed(const Scene& scene, Algorithm algo,
                                 const SimModels& models, std::uint64_t run_seed,
                                 TransportKind kind,
                                 TransportOptions transport = {},
                                 SweepParams params = {},
                                 DistributedConfig cfg = {}) {
  RfEnvironment env(scene, models, run_seed);
  RemoteCluster cluster(env);
  params.seed = run_seed;

  if (kind == TransportKind::inproc) {
    InprocLink link([&cluster](const std::string& line) {
                      return cluster.handle_line(line);
                    },
                    transport);
    link.seed_inbox(cluster.hello_lines());
    DistributedPlant plant(scene, models, link, transport, cfg);
    return run_sweep(plant, scene, algo, models, params);
  }

  SocketHost host([&cluster](const std::string& line) {
                    return cluster.handle_line(line);
                  },
                  cluster.hello_lines(), transport.port);
  SocketLink link(host.port(), transport);
  DistributedPlant plant(scene, models, link, transport, cfg);
  RunReport report = run_sweep(plant, scene, algo, models, params);
  host.stop();
  return report;
}

}  // namespace rollsurf
