#include <catch2/catch_amalgamated.hpp>

#include "conflictlens/habits.hpp"

using namespace conflictlens;

namespace {

const std::int64_t kDay0 = parse_timestamp("2024-03-01 00:00:00");

ServiceEvent daily(const std::string& service, const std::string& user,
                   const std::string& location, int day, double start_min, double end_min,
                   std::map<std::string, std::string> attrs) {
    const std::int64_t base = kDay0 + day * kSecondsPerDay;
    return ServiceEvent{service, std::move(attrs),
                        TimeInterval(base + static_cast<std::int64_t>(start_min * 60),
                                     base + static_cast<std::int64_t>(end_min * 60)),
                        location, user};
}

}  // namespace

TEST_CASE("mine_fsa computes relative frequencies") {
    std::vector<ServiceEvent> events;
    for (int i = 0; i < 6; ++i)
        events.push_back(daily("tv", "3", "living", i, 1185, 1245, {{"channel", "Fox"}}));
    for (int i = 6; i < 10; ++i)
        events.push_back(daily("tv", "3", "living", i, 1185, 1245, {{"channel", "Discovery"}}));

    const FuzzyServiceAttribute fsa = mine_fsa(events, "channel");
    REQUIRE(fsa.values.size() == 2);
    CHECK_THAT(fsa.values.at("Fox"), Catch::Matchers::WithinAbs(0.6, 1e-12));
    CHECK_THAT(fsa.values.at("Discovery"), Catch::Matchers::WithinAbs(0.4, 1e-12));
    CHECK_NOTHROW(validate(fsa));
}

TEST_CASE("mine_fsa single-valued and singleton cases") {
    std::vector<ServiceEvent> events;
    for (int i = 0; i < 10; ++i)
        events.push_back(daily("tv", "1", "living", i, 600, 660, {{"channel", "star sports"}}));
    const FuzzyServiceAttribute always = mine_fsa(events, "channel");
    REQUIRE(always.values.size() == 1);
    CHECK(always.values.at("star sports") == 1.0);

    const FuzzyServiceAttribute one = mine_fsa({events[0]}, "channel");
    CHECK(one.values.at("star sports") == 1.0);

    CHECK_THROWS_AS(mine_fsa({}, "channel"), std::invalid_argument);
    CHECK_THROWS_AS(mine_fsa(events, "volume"), std::invalid_argument);
}

TEST_CASE("FSA validation rejects bad score sets") {
    FuzzyServiceAttribute fsa{"x", "channel", "tv", {{"Fox", 0.5}, {"MTV", 0.48}}};
    CHECK_THROWS_AS(validate(fsa), std::invalid_argument);
    fsa.values = {{"Fox", 1.0}, {"MTV", 0.0}};
    CHECK_THROWS_AS(validate(fsa), std::invalid_argument);  // zero scores must be omitted
    fsa.values = {{"Fox", 0.6}, {"MTV", 0.4}};
    CHECK_NOTHROW(validate(fsa));
}

TEST_CASE("mine_habits reproduces the worked TV habit") {
    // Ten days around 19:45 +-10 / 20:45 +-20, Fox 60% and Discovery 40%.
    const std::vector<double> starts = {1175, 1185, 1195, 1185, 1185,
                                        1185, 1185, 1185, 1185, 1185};
    const std::vector<double> ends = {1225, 1245, 1265, 1245, 1245,
                                      1245, 1245, 1245, 1245, 1245};
    std::vector<ServiceEvent> events;
    for (int day = 0; day < 10; ++day) {
        const std::string channel = day < 6 ? "Fox" : "Discovery";
        events.push_back(
            daily("tv", "3", "living room", day, starts[day], ends[day], {{"channel", channel}}));
    }

    const auto habits = mine_habits(events);
    REQUIRE(habits.size() == 1);
    const ServiceUsageHabit& h = habits[0];
    CHECK(h.user_id == "3");
    CHECK(h.location == "living room");
    CHECK_THAT(h.window_start, Catch::Matchers::WithinAbs(1185.0, 1e-9));  // 19:45
    CHECK_THAT(h.window_end, Catch::Matchers::WithinAbs(1245.0, 1e-9));    // 20:45
    CHECK_THAT(h.start_tolerance, Catch::Matchers::WithinAbs(10.0, 1e-9));
    CHECK_THAT(h.end_tolerance, Catch::Matchers::WithinAbs(20.0, 1e-9));
    CHECK(h.support == 10);
    REQUIRE(h.fsas.size() == 1);
    CHECK_THAT(h.fsas[0].values.at("Fox"), Catch::Matchers::WithinAbs(0.6, 1e-12));
    CHECK_THAT(h.fsas[0].values.at("Discovery"), Catch::Matchers::WithinAbs(0.4, 1e-12));
    CHECK_NOTHROW(validate(h));
}

TEST_CASE("mine_habits enforces minimum support") {
    CHECK(mine_habits({}).empty());

    std::vector<ServiceEvent> sparse;
    for (int day = 0; day < 4; ++day)
        sparse.push_back(daily("tv", "1", "living", day, 600, 660, {{"channel", "Fox"}}));
    CHECK(mine_habits(sparse).empty());  // below default min_support of 5

    MiningParams relaxed;
    relaxed.min_support = 4;
    CHECK(mine_habits(sparse, relaxed).size() == 1);
}

TEST_CASE("mine_habits splits disjoint daily sessions into two habits") {
    std::vector<ServiceEvent> events;
    for (int day = 0; day < 7; ++day) {
        events.push_back(daily("radio", "2", "kitchen", day, 478 + day % 3, 520,
                               {{"channel", "news"}}));
        events.push_back(daily("radio", "2", "kitchen", day, 1198 + day % 3, 1260,
                               {{"channel", "jazz"}}));
    }
    std::sort(events.begin(), events.end(), event_order);

    const auto habits = mine_habits(events);
    REQUIRE(habits.size() == 2);  // manual clustering: one morning mode, one evening mode
    CHECK(habits[0].window_start < 540);
    CHECK(habits[1].window_start > 1140);
    CHECK(habits[0].support == 7);
    CHECK(habits[1].support == 7);

    std::size_t support_sum = habits[0].support + habits[1].support;
    CHECK(support_sum <= events.size());
}

TEST_CASE("complex habits merge strongly overlapping same-user windows") {
    std::vector<ServiceEvent> events;
    for (int day = 0; day < 6; ++day) {
        events.push_back(daily("tv", "1", "living", day, 1200, 1290, {{"channel", "Fox"}}));
        events.push_back(daily("lamp", "1", "living", day, 1202, 1288, {{"power", "off"}}));
    }
    std::sort(events.begin(), events.end(), event_order);

    const auto merged = mine_habits(events);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].fsas.size() == 2);
    CHECK(merged[0].find_attribute("channel") != nullptr);
    CHECK(merged[0].find_attribute("power") != nullptr);
    CHECK(merged[0].support == 6);
    CHECK_NOTHROW(validate(merged[0]));

    MiningParams no_merge;
    no_merge.complex_merge_overlap = 2.0;  // disables merging
    CHECK(mine_habits(events, no_merge).size() == 2);
}

TEST_CASE("complex merge keeps distinct users and attribute clashes apart") {
    std::vector<ServiceEvent> events;
    for (int day = 0; day < 6; ++day) {
        events.push_back(daily("tv", "1", "living", day, 1200, 1290, {{"volume", "30"}}));
        events.push_back(daily("radio", "1", "living", day, 1200, 1290, {{"volume", "15"}}));
        events.push_back(daily("tv", "2", "living", day, 1200, 1290, {{"channel", "Fox"}}));
    }
    std::sort(events.begin(), events.end(), event_order);

    const auto habits = mine_habits(events);
    // Same attribute name on two services of one user cannot merge; the other
    // resident's habit never merges across users.
    CHECK(habits.size() == 3);
}

TEST_CASE("mining is deterministic") {
    std::vector<ServiceEvent> events;
    for (int day = 0; day < 8; ++day) {
        events.push_back(daily("tv", "1", "living", day, 1200 + day % 5, 1260,
                               {{"channel", day % 2 ? "Fox" : "MTV"}}));
        events.push_back(daily("ac", "2", "living", day, 1190 + day % 7, 1250,
                               {{"value", "21"}}));
    }
    std::sort(events.begin(), events.end(), event_order);
    const auto a = mine_habits(events);
    const auto b = mine_habits(events);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].user_id == b[i].user_id);
        CHECK(a[i].window_start == b[i].window_start);
        CHECK(a[i].window_end == b[i].window_end);
    }
}
