#include <catch2/catch_amalgamated.hpp>

#include <variant>

#include "rollsurf/nodes.hpp"
#include "helpers.hpp"

using namespace rollsurf;
using Catch::Approx;

namespace {

SimModels quiet_models() {
  SimModels m;
  m.policy.noise_sigma_db = 0.0;
  m.policy.samples_per_point = 1;
  return m;
}

Scene small_scene(std::uint64_t seed) {
  SeededRng rng(seed);
  return test::random_scene(rng, 1, 1);
}

}  // namespace

TEST_CASE("panel node epoch guard", "[ctrlnet]") {
  const Scene scene = small_scene(1);
  RfEnvironment env(scene, quiet_models(), 5);
  PanelNode panel("p0", env);

  SECTION("rejects commands before the handshake") {
    const Message reply = panel.handle(SetLength{"p0", "p0/r0", 50, 1});
    REQUIRE(std::holds_alternative<ErrorMsg>(reply));
    CHECK(std::get<ErrorMsg>(reply).code == "no-handshake");
  }

  panel.mark_handshaken();

  SECTION("applies, acks, and re-acks duplicates without double-moving") {
    const Message first = panel.handle(SetLength{"p0", "p0/r0", 70, 1});
    REQUIRE(std::holds_alternative<Ack>(first));
    CHECK(std::get<Ack>(first).actual_mm == 70);
    const std::int64_t epoch_after = env.epoch();
    const double travel_after = panel.local_log().total_travel();

    const Message dup = panel.handle(SetLength{"p0", "p0/r0", 70, 1});
    REQUIRE(std::holds_alternative<Ack>(dup));
    CHECK(std::get<Ack>(dup) == std::get<Ack>(first));
    CHECK(env.epoch() == epoch_after);                          // not re-applied
    CHECK(panel.local_log().total_travel() == travel_after);    // no extra motion
  }

  SECTION("stale epochs are errors") {
    panel.handle(SetLength{"p0", "p0/r0", 70, 5});
    const Message reply = panel.handle(SetLength{"p0", "p0/r1", 60, 4});
    REQUIRE(std::holds_alternative<ErrorMsg>(reply));
    CHECK(std::get<ErrorMsg>(reply).code == "stale");
  }

  SECTION("out-of-bounds targets are errors") {
    const Message reply = panel.handle(SetLength{"p0", "p0/r0", 900, 1});
    REQUIRE(std::holds_alternative<ErrorMsg>(reply));
    CHECK(std::get<ErrorMsg>(reply).code == "bounds");
  }
}

TEST_CASE("remote cluster routes and reports", "[ctrlnet]") {
  const Scene scene = small_scene(2);
  RfEnvironment env(scene, quiet_models(), 6);
  RemoteCluster cluster(env);
  const auto hello = cluster.hello_lines();
  // controller + 1 panel + 1 feedback endpoint
  CHECK(hello.size() == 3);

  SECTION("a set-length produces feedback for every link, then the ack") {
    const auto replies = cluster.handle_line(
        encode_message(SetLength{"p0", "p0/r0", 50, 1}));
    REQUIRE(replies.size() == scene.links.size() + 1);
    const Message last = decode_message(replies.back());
    CHECK(std::holds_alternative<Ack>(last));
    const Message first = decode_message(replies.front());
    CHECK(std::holds_alternative<RssiFeedback>(first));
    CHECK(std::get<RssiFeedback>(first).epoch == 1);
  }

  SECTION("malformed lines come back as decode errors with the offset") {
    const auto replies = cluster.handle_line("set-length panel=p0 roll\n");
    REQUIRE(replies.size() == 1);
    const Message m = decode_message(replies[0]);
    REQUIRE(std::holds_alternative<ErrorMsg>(m));
    CHECK(std::get<ErrorMsg>(m).code == "malformed");
    CHECK(std::get<ErrorMsg>(m).detail.find("byte") != std::string::npos);
  }

  SECTION("unknown panels are routing errors") {
    const auto replies =
        cluster.handle_line(encode_message(SetLength{"p9", "p9/r0", 50, 1}));
    const Message m = decode_message(replies.back());
    REQUIRE(std::holds_alternative<ErrorMsg>(m));
    CHECK(std::get<ErrorMsg>(m).code == "route");
  }
}

TEST_CASE("transport transparency", "[ctrlnet][transparency]") {
  const SimModels models = quiet_models();

  for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
    const Scene scene = small_scene(seed);
    const RunReport direct = run_inproc(scene, Algorithm::group, models, seed);
    const RunReport viaproto = run_distributed(scene, Algorithm::group, models,
                                               seed, TransportKind::inproc);
    const RunReport socketed = run_distributed(scene, Algorithm::group, models,
                                               seed, TransportKind::socket);

    CHECK(direct.final_config.lengths == viaproto.final_config.lengths);
    CHECK(direct.final_config.lengths == socketed.final_config.lengths);
    CHECK(direct.baseline_dbm == socketed.baseline_dbm);
    CHECK(direct.achieved_dbm == socketed.achieved_dbm);
    CHECK(direct.log.elapsed_seconds() == socketed.log.elapsed_seconds());
    CHECK(direct.log.move_count() == socketed.log.move_count());
  }
}

TEST_CASE("lossy transport still converges to the lossless result",
          "[ctrlnet][loss]") {
  const SimModels models = quiet_models();
  const Scene scene = small_scene(44);
  const RunReport clean = run_inproc(scene, Algorithm::group, models, 44);

  TransportOptions lossy;
  lossy.command_loss_probability = 0.2;
  lossy.loss_seed = 7;
  const RunReport result = run_distributed(scene, Algorithm::group, models, 44,
                                           TransportKind::inproc, lossy);
  CHECK(result.final_config.lengths == clean.final_config.lengths);
  CHECK(result.achieved_dbm == clean.achieved_dbm);
}

TEST_CASE("retries stop at the cap", "[ctrlnet][loss]") {
  const SimModels models = quiet_models();
  const Scene scene = small_scene(45);
  TransportOptions black_hole;
  black_hole.command_loss_probability = 1.0;
  black_hole.loss_seed = 1;
  DistributedConfig cfg;
  cfg.ack_base_timeout_ms = 1.0;
  CHECK_THROWS_WITH(run_distributed(scene, Algorithm::group, models, 45,
                                    TransportKind::inproc, black_hole, {}, cfg),
                    Catch::Matchers::ContainsSubstring("no ack"));
}

TEST_CASE("a silent endpoint is named in the timeout error", "[ctrlnet]") {
  const SimModels models = quiet_models();
  const Scene scene = small_scene(47);
  RfEnvironment env(scene, models, 47);
  RemoteCluster cluster(env);
  const std::string muted = "l0";
  // drop every feedback line from the muted link
  InprocLink link(
      [&](const std::string& line) {
        std::vector<std::string> out;
        for (auto& reply : cluster.handle_line(line)) {
          const Message m = decode_message(reply);
          if (const auto* fb = std::get_if<RssiFeedback>(&m);
              fb != nullptr && fb->link_id == muted)
            continue;
          out.push_back(std::move(reply));
        }
        return out;
      },
      {});
  link.seed_inbox(cluster.hello_lines());
  DistributedConfig cfg;
  cfg.feedback_timeout_s = 0.05;
  DistributedPlant plant(scene, models, link, {}, cfg);
  SweepParams params;
  params.seed = 47;
  CHECK_THROWS_WITH(
      group_sweep(plant, scene, models.policy, models.motor, params),
      Catch::Matchers::ContainsSubstring("l0") &&
          Catch::Matchers::ContainsSubstring("timeout"));
}

TEST_CASE("capture log holds the full wire conversation", "[ctrlnet]") {
  const SimModels models = quiet_models();
  const Scene scene = small_scene(46);
  const std::string path = "/tmp/rollsurf_capture_test.log";
  std::remove(path.c_str());
  TransportOptions opts;
  opts.capture_path = path;
  run_distributed(scene, Algorithm::group, models, 46, TransportKind::inproc, opts);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int commands = 0, feedback = 0;
  while (std::getline(in, line)) {
    REQUIRE(line.size() > 2);
    REQUIRE((line[0] == '>' || line[0] == '<'));
    const Message m = decode_message(line.substr(2));
    commands += std::holds_alternative<SetLength>(m);
    feedback += std::holds_alternative<RssiFeedback>(m);
  }
  CHECK(commands > 0);
  CHECK(feedback > 0);
}
