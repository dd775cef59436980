#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conflictlens/preprocess.hpp"
#include "oracle.hpp"

using namespace conflictlens;

namespace {

ServiceEvent make_event(const std::string& service, const std::string& user,
                        const std::string& location, std::int64_t start, std::int64_t end,
                        std::map<std::string, std::string> attrs = {}) {
    return ServiceEvent{service, std::move(attrs), TimeInterval(start, end), location, user};
}

const std::int64_t kBase = parse_timestamp("2024-03-01 12:00:00");

}  // namespace

TEST_CASE("fit_bins separates the two temperature preference bands") {
    const BinScheme scheme = fit_bins({20, 21, 22, 25, 26, 27}, 2, "temperature");
    REQUIRE(scheme.edges.size() == 1);
    CHECK_THAT(scheme.edges[0], Catch::Matchers::WithinAbs(23.5, 1e-12));
    REQUIRE(scheme.labels.size() == 2);
    CHECK(scheme.labels[0] == "20..22");
    CHECK(scheme.labels[1] == "25..27");
    CHECK(scheme.label_for(21.0) == "20..22");
    CHECK(scheme.label_for(26.9) == "25..27");
    CHECK(scheme.label_for(-100.0) == "20..22");  // outer bins unbounded
    CHECK(scheme.label_for(99.0) == "25..27");
}

TEST_CASE("fit_bins handles constant input and clean gaps") {
    const BinScheme constant = fit_bins({5, 5, 5}, 1);
    CHECK(constant.edges.empty());
    REQUIRE(constant.labels.size() == 1);
    CHECK(constant.labels[0] == "5");
    CHECK(oracle::scheme_cost(constant, {5, 5, 5}) == 0.0);

    const BinScheme gap = fit_bins({1, 2, 10, 11}, 2);
    REQUIRE(gap.edges.size() == 1);
    CHECK_THAT(gap.edges[0], Catch::Matchers::WithinAbs(6.0, 1e-12));
}

TEST_CASE("fit_bins rejects infeasible bin counts") {
    CHECK_THROWS_AS(fit_bins({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_bins({1, 2, 3}, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_bins({5, 5, 5}, 2), std::invalid_argument);  // one distinct value
    CHECK_THROWS_AS(fit_bins({1, 2}, 3), std::invalid_argument);
}

TEST_CASE("fit_bins matches exhaustive enumeration for n <= 12, k <= 4") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 11;  // up to 12 values
        std::vector<double> values;
        for (std::size_t i = 0; i < n; ++i)
            values.push_back(static_cast<double>(rng() % 50) / 2.0);
        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        const std::size_t k = 1 + rng() % std::min<std::size_t>(4, distinct.size());

        const BinScheme scheme = fit_bins(values, k);
        const double dp_cost = oracle::scheme_cost(scheme, values);
        const double brute = oracle::best_binning_cost(values, k);
        INFO("n=" << n << " k=" << k);
        CHECK_THAT(dp_cost, Catch::Matchers::WithinAbs(brute, 1e-9));
    }
}

TEST_CASE("stabilize collapses channel surfing to the settled value") {
    std::vector<ServiceEvent> events = {
        make_event("tv", "R1", "living", kBase + 0, kBase + 5, {{"channel", "ch1"}}),
        make_event("tv", "R1", "living", kBase + 10, kBase + 20, {{"channel", "ch2"}}),
        make_event("tv", "R1", "living", kBase + 25, kBase + 3600, {{"channel", "ch9"}}),
    };
    const auto settled = stabilize(events, 60);
    REQUIRE(settled.size() == 1);
    CHECK(settled[0].attribute_values.at("channel") == "ch9");  // final value wins
    CHECK(settled[0].interval.start() == kBase + 0);            // earliest start
    CHECK(settled[0].interval.end() == kBase + 3600);           // last end
}

TEST_CASE("stabilize keeps events outside the settle window") {
    std::vector<ServiceEvent> events = {
        make_event("tv", "R1", "living", kBase, kBase + 30),
        make_event("tv", "R1", "living", kBase + 120, kBase + 150),
    };
    CHECK(stabilize(events, 60).size() == 2);

    const auto single = stabilize({events[0]}, 60);
    REQUIRE(single.size() == 1);
    CHECK(single[0].interval == events[0].interval);
}

TEST_CASE("stabilize separates streams and rejects unsorted input") {
    std::vector<ServiceEvent> events = {
        make_event("tv", "R1", "living", kBase, kBase + 5),
        make_event("tv", "R2", "living", kBase + 10, kBase + 15),
        make_event("tv", "R1", "living", kBase + 20, kBase + 3000),
    };
    const auto settled = stabilize(events, 60);
    REQUIRE(settled.size() == 2);  // R2's event untouched, R1's pair collapsed

    std::swap(events[0], events[2]);
    CHECK_THROWS_AS(stabilize(events, 60), std::invalid_argument);
    CHECK_THROWS_AS(stabilize(events, 0), std::invalid_argument);
}

TEST_CASE("stabilize is idempotent and never grows") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ServiceEvent> events;
        std::int64_t t = kBase;
        const std::size_t count = 1 + rng() % 20;
        for (std::size_t i = 0; i < count; ++i) {
            t += static_cast<std::int64_t>(rng() % 180);
            const std::int64_t duration = 1 + static_cast<std::int64_t>(rng() % 120);
            const std::string user = rng() % 2 ? "R1" : "R2";
            events.push_back(make_event("tv", user, "living", t,
                                        std::min(t + duration, day_start(t) + kSecondsPerDay)));
        }
        std::sort(events.begin(), events.end(), event_order);
        const auto once = stabilize(events, 60);
        const auto twice = stabilize(once, 60);
        CHECK(once.size() <= events.size());
        REQUIRE(twice.size() == once.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(twice[i].interval == once[i].interval);
            CHECK(twice[i].user_id == once[i].user_id);
        }
    }
}

TEST_CASE("bin_numeric_attributes rewrites only fully numeric attributes") {
    std::vector<ServiceEvent> events = {
        make_event("ac", "R1", "living", kBase, kBase + 60, {{"temp", "20"}}),
        make_event("ac", "R1", "living", kBase + 7200, kBase + 7260, {{"temp", "21"}}),
        make_event("ac", "R2", "living", kBase + 9000, kBase + 9060, {{"temp", "26"}}),
        make_event("tv", "R1", "living", kBase, kBase + 60, {{"channel", "Fox"}}),
    };
    const auto schemes = bin_numeric_attributes(events, 2);
    REQUIRE(schemes.size() == 1);
    CHECK(schemes[0].attribute == "temp");
    CHECK(events[0].attribute_values.at("temp") == events[1].attribute_values.at("temp"));
    CHECK(events[0].attribute_values.at("temp") != events[2].attribute_values.at("temp"));
    CHECK(events[3].attribute_values.at("channel") == "Fox");
}
