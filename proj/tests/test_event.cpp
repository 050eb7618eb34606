#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "rvbus/event.hpp"

using namespace rvbus;

TEST_CASE("serialize_event emits the golden battery_status line") {
    Event e;
    e.channel = topic_channel("/battery_status");
    e.pub_time = Timestamp{0};
    e.seq = 0;
    e.fields["id"] = std::int64_t{0};
    e.fields["status"] = std::string("1");
    e.fields["status_change"] = true;
    CHECK(serialize_event(e) ==
          R"({"channel":"/battery_status","id":0,"kind":"topic","seq":0,"status":"1","status_change":true,"time":0})");
}

TEST_CASE("serialize_event with empty fields carries only the reserved keys") {
    Event e;
    e.channel = request_channel("/SetLED");
    e.pub_time = Timestamp{42};
    e.seq = 7;
    CHECK(serialize_event(e) ==
          R"({"channel":"/SetLED","kind":"service_request","seq":7,"time":42})");
}

TEST_CASE("serialize_event rejects reserved field keys") {
    Event e;
    e.channel = topic_channel("/x");
    e.fields["time"] = std::int64_t{3};
    CHECK_THROWS_WITH_AS(serialize_event(e), doctest::Contains("time"), SerializeError);
}

TEST_CASE("deserialize_event reports missing reserved keys") {
    CHECK_THROWS_WITH_AS(deserialize_event(R"({"channel":"/x"})"), doctest::Contains("kind"),
                         ParseError);
    CHECK_THROWS_WITH_AS(
        deserialize_event(R"({"channel":"/x","kind":"topic","seq":0})"),
        doctest::Contains("time"), ParseError);
}

TEST_CASE("deserialize_event reports a byte offset on truncated input") {
    try {
        deserialize_event(R"({"channel":"/x","kind":"topic","seq":0,"ti)");
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(ex.byte_offset > 0);
    }
}

TEST_CASE("deserialize_event rejects nested values") {
    CHECK_THROWS_AS(
        deserialize_event(
            R"({"channel":"/x","kind":"topic","seq":0,"time":1,"nested":{"a":1}})"),
        ParseError);
}

TEST_CASE("event round-trip over random events") {
    std::mt19937_64 rng(12345);
    for (int i = 0; i < 1000; ++i) {
        Event e = testing::random_event(rng);
        Event back = deserialize_event(serialize_event(e));
        CHECK(back == e);
    }
}

TEST_CASE("serialization is injective on distinct events") {
    std::mt19937_64 rng(99);
    Event a = testing::random_event(rng);
    Event b = a;
    b.seq += 1;
    CHECK(serialize_event(a) != serialize_event(b));
}

TEST_CASE("negative verdicts are exactly the currently-false/false pair") {
    CHECK_FALSE(is_negative(Verdict::True));
    CHECK_FALSE(is_negative(Verdict::CurrentlyTrue));
    CHECK(is_negative(Verdict::CurrentlyFalse));
    CHECK(is_negative(Verdict::False));
}

TEST_CASE("verdict strings round-trip") {
    for (Verdict v : {Verdict::True, Verdict::CurrentlyTrue, Verdict::CurrentlyFalse,
                      Verdict::False})
        CHECK(verdict_from_string(to_string(v)) == v);
    CHECK_FALSE(verdict_from_string("unknown").has_value());
}

TEST_CASE("verdict log line shape") {
    CHECK(serialize_verdict("1a", Timestamp{5}, Verdict::CurrentlyFalse) ==
          R"({"property_id":"1a","time":5,"verdict":"currently_false"})");
}
