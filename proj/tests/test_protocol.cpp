#include <catch2/catch_amalgamated.hpp>

#include "rollsurf/protocol.hpp"
#include "rollsurf/record.hpp"
#include "rollsurf/rng.hpp"

using namespace rollsurf;

TEST_CASE("record codec", "[record]") {
  SECTION("escapes values with spaces and separators") {
    Record rec{"note", {}};
    rec.add("text", "a b=c%d\nend");
    const std::string line = encode_record(rec);
    const Record back = parse_record(line.substr(0, line.size() - 1));
    CHECK(back.at("text") == "a b=c%d\nend");
  }

  SECTION("reports the byte offset of malformed input") {
    try {
      parse_record("ack panel=p0 epoch", 100);
      FAIL("expected RecordError");
    } catch (const RecordError& e) {
      CHECK(e.offset >= 100);
      CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
  }

  SECTION("skips comments and blank lines in streams") {
    const auto records = parse_records("# header\n\nfoo a=1\n  \nbar b=2\n");
    REQUIRE(records.size() == 2);
    CHECK(records[0].name == "foo");
    CHECK(records[1].name == "bar");
  }

  SECTION("binary junk throws instead of crashing") {
    SeededRng rng(99);
    for (int i = 0; i < 200; ++i) {
      std::string junk;
      const int len = 1 + static_cast<int>(rng.uniform_index(40));
      for (int k = 0; k < len; ++k)
        junk += static_cast<char>(rng.uniform_index(256));
      try {
        (void)parse_records(junk);
      } catch (const RecordError&) {
        // rejection is fine; crashing is not
      }
    }
    SUCCEED();
  }

  SECTION("round trips arbitrary printable values") {
    SeededRng rng(7);
    for (int i = 0; i < 200; ++i) {
      std::string value;
      const int len = static_cast<int>(rng.uniform_index(24));
      for (int k = 0; k < len; ++k)
        value += static_cast<char>(32 + rng.uniform_index(95));
      Record rec{"blob", {}};
      rec.add("v", value);
      const std::string line = encode_record(rec);
      CHECK(parse_record(line.substr(0, line.size() - 1)).at("v") == value);
    }
  }
}

TEST_CASE("message codec", "[protocol]") {
  SECTION("set-length round trips bit-exactly") {
    const Message msg = SetLength{"p1", "p1/r3", 65, 42};
    const Message back = decode_message(encode_message(msg));
    CHECK(std::get<SetLength>(back) == std::get<SetLength>(msg));
  }

  SECTION("every variant round trips") {
    const Message msgs[] = {
        SetLength{"p0", "p0/r0", 10, 1},
        Ack{"p0", "p0/r0", 1, 10},
        RssiFeedback{"l0", -41.5, 7, 99},
        Hello{"panel-3", NodeRole::panel},
        ErrorMsg{"bounds", "target 200 mm outside bounds"},
    };
    for (const auto& msg : msgs) {
      const Message back = decode_message(encode_message(msg));
      CHECK(back == msg);
    }
  }

  SECTION("truncated records error out without crashing") {
    CHECK_THROWS_AS(decode_message("set-length panel=p0 roll"), RecordError);
    CHECK_THROWS_AS(decode_message(""), RecordError);
  }

  SECTION("unknown message types are rejected") {
    CHECK_THROWS_AS(decode_message("reboot all=now"), RecordError);
  }

  SECTION("unknown fields are ignored for forward compatibility") {
    const Message m =
        decode_message("ack panel=p0 roll=p0/r1 epoch=3 actual_mm=70 hue=blue");
    CHECK(std::get<Ack>(m) == Ack{"p0", "p0/r1", 3, 70});
  }

  SECTION("feedback values survive the wire losslessly") {
    const RssiFeedback fb{"l0", -41.0 + 1.0 / 3.0, 12, 5};
    const Message back = decode_message(encode_message(fb));
    CHECK(std::get<RssiFeedback>(back).value_dbm == fb.value_dbm);
  }
}
