#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conflictlens/core.hpp"

using namespace conflictlens;

namespace {

MinuteWindow mw(double s, double e) { return MinuteWindow(s, e); }

}  // namespace

TEST_CASE("timestamps round-trip through civil conversion") {
    const std::int64_t t = parse_timestamp("2011-06-15 08:00:00");
    CHECK(format_timestamp(t) == "2011-06-15 08:00:00");
    CHECK(parse_timestamp("2011-06-15 09:30:15") - t == 5415);
    CHECK(day_start(t) == parse_timestamp("2011-06-15 00:00:00"));
    CHECK_THROWS_AS(parse_timestamp("2011-13-01 00:00:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("not a date"), std::invalid_argument);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const std::int64_t x = static_cast<std::int64_t>(rng() % 4'000'000'000ULL);
        CHECK(parse_timestamp(format_timestamp(x)) == x);
    }
}

TEST_CASE("minute-of-day parsing") {
    CHECK(parse_minute_of_day("08:00") == 480.0);
    CHECK(parse_minute_of_day("24:00") == 1440.0);
    CHECK(parse_minute_of_day("19:45") == 1185.0);
    CHECK(parse_minute_of_day("19:45:30") == 1185.5);
    CHECK_THROWS_AS(parse_minute_of_day("24:01"), std::invalid_argument);
    CHECK_THROWS_AS(parse_minute_of_day("9"), std::invalid_argument);
    CHECK_THROWS_AS(parse_minute_of_day("20:00x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("2011-06-15 08:00:00x"), std::invalid_argument);
}

TEST_CASE("interval construction enforces invariants") {
    CHECK_THROWS_AS(MinuteWindow(120.0, 120.0), std::invalid_argument);
    CHECK_THROWS_AS(MinuteWindow(130.0, 120.0), std::invalid_argument);
    CHECK_THROWS_AS(MinuteWindow(-1.0, 120.0), std::invalid_argument);
    CHECK_THROWS_AS(MinuteWindow(100.0, 1441.0), std::invalid_argument);

    const std::int64_t midnight = parse_timestamp("2024-01-02 00:00:00");
    CHECK_NOTHROW(TimeInterval(midnight - 600, midnight));  // ends exactly at midnight
    CHECK_THROWS_AS(TimeInterval(midnight - 600, midnight + 1), std::invalid_argument);
}

TEST_CASE("allen relation matches the worked overlap example") {
    // Habit of one resident 8:10-9:10 against another's 8:00-9:00.
    CHECK(allen_relation(mw(490, 550), mw(480, 540)) == AllenRelation::OverlappedBy);
    CHECK(allen_relation(mw(1, 2), mw(1, 2)) == AllenRelation::Equals);
    CHECK(allen_relation(mw(1, 2), mw(2, 3)) == AllenRelation::Meets);
    CHECK(allen_relation(mw(1, 2), mw(3, 4)) == AllenRelation::Before);
    CHECK(allen_relation(mw(1, 5), mw(2, 3)) == AllenRelation::Contains);
    CHECK(allen_relation(mw(2, 3), mw(1, 5)) == AllenRelation::During);
    CHECK(allen_relation(mw(1, 3), mw(1, 5)) == AllenRelation::Starts);
    CHECK(allen_relation(mw(3, 5), mw(1, 5)) == AllenRelation::Finishes);
}

TEST_CASE("temporal intersection reproduces the worked durations") {
    // 20:00-21:00 with 20:45-21:45 -> 15 minutes.
    const auto a = temporal_intersection(mw(1200, 1260), mw(1245, 1305));
    REQUIRE(a.has_value());
    CHECK(a->start() == 1245.0);
    CHECK(a->end() == 1260.0);
    CHECK(a->duration() == 15.0);

    // 18:00-19:00 with 18:10-19:10 -> 50 minutes.
    const auto b = temporal_intersection(mw(1080, 1140), mw(1090, 1150));
    REQUIRE(b.has_value());
    CHECK(b->duration() == 50.0);

    CHECK_FALSE(temporal_intersection(mw(1, 2), mw(3, 4)).has_value());
    CHECK_FALSE(temporal_intersection(mw(1, 2), mw(2, 3)).has_value());  // meets is empty
}

TEST_CASE("allen relations: exactly one holds, inverse symmetry, overlap iff intersection") {
    std::mt19937_64 rng(42);
    auto draw = [&]() {
        const double s = static_cast<double>(rng() % 1430);
        const double e = s + 1.0 + static_cast<double>(rng() % (1439 - static_cast<int>(s)));
        return mw(s, std::min(e, 1440.0));
    };
    for (int i = 0; i < 2000; ++i) {
        const MinuteWindow a = draw();
        const MinuteWindow b = draw();
        const AllenRelation ab = allen_relation(a, b);
        const AllenRelation ba = allen_relation(b, a);
        CHECK(inverse(ab) == ba);
        CHECK(inverse(inverse(ab)) == ab);

        const auto inter = temporal_intersection(a, b);
        CHECK(inter.has_value() == is_overlapping(ab));
        CHECK(temporal_intersection(b, a) == inter);  // commutative
        if (inter) {
            CHECK(inter->duration() <= a.duration());
            CHECK(inter->duration() <= b.duration());
        }
    }
}

TEST_CASE("service catalog enforces descriptor and event invariants") {
    ServiceCatalog catalog;
    catalog.add({"tv5", "TV", {"channel"}, {"volume"}});
    CHECK_THROWS_AS(catalog.add({"tv5", "TV again", {"channel"}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(catalog.add({"lamp", "Lamp", {}, {"brightness"}}), std::invalid_argument);
    CHECK_THROWS_AS(catalog.add({"", "anon", {"state"}, {}}), std::invalid_argument);

    const std::int64_t t = parse_timestamp("2024-03-01 20:00:00");
    ServiceEvent ok{"tv5", {{"channel", "Fox"}}, TimeInterval(t, t + 3600), "living", "R1"};
    CHECK_NOTHROW(catalog.validate_event(ok));

    ServiceEvent unknown_attr{
        "tv5", {{"color", "red"}}, TimeInterval(t, t + 3600), "living", "R1"};
    CHECK_THROWS_AS(catalog.validate_event(unknown_attr), std::invalid_argument);

    ServiceEvent unknown_service{
        "fan", {{"state", "on"}}, TimeInterval(t, t + 3600), "living", "R1"};
    CHECK_THROWS_AS(catalog.validate_event(unknown_service), std::invalid_argument);
}

TEST_CASE("event minute-of-day helpers") {
    const std::int64_t t = parse_timestamp("2024-03-01 08:10:00");
    ServiceEvent e{"tv", {}, TimeInterval(t, t + 3600), "living", "R1"};
    CHECK(e.start_minute() == 490.0);
    CHECK(e.end_minute() == 550.0);

    const std::int64_t late = parse_timestamp("2024-03-01 23:50:00");
    ServiceEvent until_midnight{"tv", {}, TimeInterval(late, late + 600), "living", "R1"};
    CHECK(until_midnight.end_minute() == 1440.0);
}
