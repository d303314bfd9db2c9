#include <doctest.h>

#include "crowdval/error.hpp"
#include "crowdval/pacap.hpp"
#include "test_support.hpp"

#include <numeric>
#include <set>
#include <unordered_set>

using namespace crowdval;

namespace {

// ceil((m - M_Y)(1 + M_N / M_Y)) with the ratio kept as a reduced fraction.
std::size_t outreach_oracle(std::size_t m, std::size_t my, std::size_t mn) {
    unsigned long long num = my + mn;
    unsigned long long den = my;
    auto g = std::gcd(num, den);
    num /= g;
    den /= g;
    num *= (m - my);
    g = std::gcd(num, den);
    num /= g;
    den /= g;
    return static_cast<std::size_t>(num / den + (num % den != 0 ? 1 : 0));
}

WorkerRegistry plain_registry(std::size_t n, std::size_t contributors = 0) {
    WorkerRegistry reg;
    for (std::size_t i = 0; i < n; ++i) reg.register_worker("w" + std::to_string(i), -100.0, i < contributors);
    return reg;
}

Profile two_bin_profile() {
    Profile p;
    p.bin_width = 5.0;
    p.bins.push_back({0, 12.0, 0.25, 1});
    p.bins.push_back({1, 17.0, 0.75, 3});
    return p;
}

CampaignConfig small_config(std::size_t m) {
    CampaignConfig c;
    c.target = m;
    c.shortfall_tolerance = 0.1;
    c.deadline = 60.0;
    c.cycle_length = 10.0;
    c.seed = 42;
    return c;
}

}  // namespace

TEST_CASE("next outreach: worked examples") {
    CHECK(next_outreach(1000, 400, 200, 49000, 1000) == 900);
    CHECK(next_outreach(1000, 300, 0, 49000, 1000) == 700);
    CHECK(next_outreach(1000, 0, 0, 49000, 100) == 200);
    CHECK(next_outreach(1000, 0, 5, 49000, 0) == 1);
    CHECK(next_outreach(1000, 400, 200, 500, 1000) == 500);
    CHECK(next_outreach(1000, 0, 0, 150, 100) == 150);
    CHECK(next_outreach(1000, 400, 200, 0, 1000) == 0);
    CHECK(next_outreach(3, 2, 1, 100, 10) == 2);  // 1 * 3/2 rounds up
}

TEST_CASE("next outreach matches exact rational oracle") {
    for (std::size_t m = 2; m <= 50; ++m)
        for (std::size_t my = 1; my < m; ++my)
            for (std::size_t mn = 0; mn <= 50; ++mn)
                REQUIRE(next_outreach(m, my, mn, 1'000'000, 7) == outreach_oracle(m, my, mn));
}

TEST_CASE("campaign config") {
    CampaignConfig c;
    CHECK(c.cycle_count() == 6);
    c.target = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.shortfall_tolerance = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.cycle_length = 61.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    auto j = nlohmann::json::parse(R"({"m": 50, "T0": 120, "strategy": "inverse", "rating_scale": [-2,-1,0,1,2]})");
    const auto parsed = campaign_from_json(j);
    CHECK(parsed.target == 50);
    CHECK(parsed.cycle_length == 20.0);
    CHECK(parsed.strategy == SamplingStrategy::Inverse);
    CHECK(parsed.scale.max_score() == 2);
    const auto again = campaign_from_json(campaign_to_json(parsed));
    CHECK(campaign_to_json(again) == campaign_to_json(parsed));
    CHECK_THROWS_AS(campaign_from_json(nlohmann::json::parse(R"({"m": "many"})")), ConfigError);
}

TEST_CASE("campaign: all-accept world succeeds in the first cycle") {
    auto reg = plain_registry(100);
    const Responder instant = [](const RatingTask&, const Worker&, double now, Rng&) {
        return Response::effective(1, now);
    };
    const auto result = run_campaign(small_config(10), reg, two_bin_profile(), instant);
    CHECK(result.status == CampaignStatus::Success);
    CHECK(result.early_exit);
    CHECK(result.ratings.size() == 10);
    REQUIRE(result.cycles.size() == 1);
    CHECK(result.cycles[0].offers == 10);
    CHECK(result.end_time == 10.0);
}

TEST_CASE("campaign: silent world fails") {
    auto reg = plain_registry(100);
    const Responder silent = [](const RatingTask&, const Worker&, double, Rng&) { return Response::silent(); };
    const auto result = run_campaign(small_config(10), reg, two_bin_profile(), silent);
    CHECK(result.status == CampaignStatus::Fail);
    CHECK_FALSE(result.early_exit);
    CHECK(result.ratings.empty());
    CHECK(result.cycles.size() == 6);
    CHECK(result.end_time == 60.0);
    // Doubling fallback: 10, 20, 40, then the remaining 30.
    CHECK(result.cycles[1].offers == 20);
    CHECK(result.cycles[2].offers == 40);
    CHECK(result.cycles[3].offers == 30);
    CHECK(result.cycles[4].offers == 0);
}

TEST_CASE("campaign: empty profile is rejected before dispatch") {
    auto reg = plain_registry(10);
    int calls = 0;
    const Responder r = [&calls](const RatingTask&, const Worker&, double now, Rng&) {
        ++calls;
        return Response::effective(1, now);
    };
    CHECK_THROWS_AS(run_campaign(small_config(5), reg, Profile{}, r), Error);
    CHECK(calls == 0);
}

TEST_CASE("campaign: late responses count in their arrival cycle") {
    auto reg = plain_registry(5);
    const Responder slow = [](const RatingTask&, const Worker&, double now, Rng&) {
        return Response::effective(-1, now + 25.0);
    };
    const auto result = run_campaign(small_config(5), reg, two_bin_profile(), slow);
    CHECK(result.status == CampaignStatus::Success);
    REQUIRE(result.cycles.size() == 3);
    CHECK(result.cycles[0].effective == 0);
    CHECK(result.cycles[2].effective == 5);
    CHECK(result.ratings.front().received_time == 25.0);

    // Past the deadline: dropped.
    auto reg2 = plain_registry(5);
    const Responder too_slow = [](const RatingTask&, const Worker&, double now, Rng&) {
        return Response::effective(1, now + 61.0);
    };
    CHECK(run_campaign(small_config(5), reg2, two_bin_profile(), too_slow).ratings.empty());
}

TEST_CASE("campaign: responder failures and bad scores are non-responses") {
    auto reg = plain_registry(10);
    const Responder flaky = [](const RatingTask& task, const Worker&, double now, Rng&) -> Response {
        if (task.task_id % 2 == 0) throw std::runtime_error("device offline");
        if (task.task_id % 3 == 0) return Response::effective(7, now);
        return Response::effective(1, now);
    };
    const auto result = run_campaign(small_config(10), reg, two_bin_profile(), flaky);
    // Odd ids 1..9 minus 3 and 9.
    CHECK(result.ratings.size() == 3);
    CHECK(result.status == CampaignStatus::Fail);
    CHECK(result.approached.size() == 10);
}

TEST_CASE("campaign: neutral answers feed the outreach estimate") {
    auto reg = plain_registry(1000);
    // First cycle: 10 offers, half neutral.
    const Responder half = [](const RatingTask& task, const Worker&, double now, Rng&) {
        return task.task_id % 2 == 0 ? Response::neutral(now + 1.0) : Response::effective(1, now + 1.0);
    };
    const auto result = run_campaign(small_config(10), reg, two_bin_profile(), half);
    REQUIRE(result.cycles.size() >= 2);
    CHECK(result.cycles[0].effective == 5);
    CHECK(result.cycles[0].neutral == 5);
    CHECK(result.cycles[1].offers == 10);  // (10 - 5)(1 + 5/5)
    CHECK(result.status == CampaignStatus::Success);
}

TEST_CASE("campaign: privacy actions reach the registry") {
    auto reg = plain_registry(4);
    const Responder stop = [](const RatingTask&, const Worker&, double now, Rng&) {
        auto r = Response::neutral(now + 1.0);
        r.privacy_action = PrivacyAction::Stop;
        return r;
    };
    run_campaign(small_config(2), reg, two_bin_profile(), stop);
    std::size_t stopped = 0;
    for (const auto& w : reg.workers()) stopped += w.elasticity == 0.0 ? 1 : 0;
    CHECK(stopped == 4);
    CHECK(reg.candidate_pool().empty());
}

TEST_CASE("campaign: determinism") {
    const Responder noisy = [](const RatingTask& task, const Worker&, double now, Rng& rng) {
        const double u = uniform01(rng);
        if (u < 0.3) return Response::silent();
        if (u < 0.5) return Response::neutral(now + 20.0 * uniform01(rng));
        return Response::effective(task.value_index == 0 ? 1 : -1, now + 20.0 * uniform01(rng));
    };
    auto a = plain_registry(500, 50);
    auto b = plain_registry(500, 50);
    const auto ra = run_campaign(small_config(100), a, two_bin_profile(), noisy);
    const auto rb = run_campaign(small_config(100), b, two_bin_profile(), noisy);
    CHECK(ratings_to_csv(ra.ratings) == ratings_to_csv(rb.ratings));
    CHECK(cycles_to_csv(ra.cycles) == cycles_to_csv(rb.cycles));
    CHECK(ra.approached == rb.approached);
    CHECK(registry_to_json(a) == registry_to_json(b));
}

TEST_CASE("campaign invariants over random worlds") {
    auto gen = make_rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = testing::uniform_int(gen, 1, 120);
        const auto contributors = testing::uniform_int(gen, 0, n);
        auto reg = plain_registry(n, contributors);
        for (std::size_t i = contributors; i < n; ++i) {
            if (uniform01(gen) < 0.1) reg.apply_privacy_action(static_cast<WorkerIndex>(i), PrivacyAction::Stop);
            reg.set_reputation(static_cast<WorkerIndex>(i), testing::uniform(gen, 0.0, 3.0));
        }
        const auto eligible = reg.candidate_pool().size();

        auto config = small_config(testing::uniform_int(gen, 1, 60));
        config.seed = gen();
        config.strategy = kAllStrategies[testing::uniform_int(gen, 0, 3)];
        config.cycle_length = static_cast<double>(testing::uniform_int(gen, 1, 6)) * 5.0;
        config.deadline = config.cycle_length * static_cast<double>(testing::uniform_int(gen, 1, 8));
        const double accept = uniform01(gen);
        const double delay = testing::uniform(gen, 0.1, 30.0);
        const Responder world = [accept, delay](const RatingTask&, const Worker&, double now, Rng& rng) {
            const double u = uniform01(rng);
            const double at = now + delay * uniform01(rng);
            if (u < accept) return Response::effective(uniform01(rng) < 0.5 ? 1 : -1, at);
            if (u < accept + (1.0 - accept) / 2.0) return Response::neutral(at);
            return Response::silent();
        };
        const auto profile = testing::random_profile(gen, testing::uniform_int(gen, 1, 12));
        const auto result = run_campaign(config, reg, profile, world);

        std::unordered_set<WorkerIndex> approached(result.approached.begin(), result.approached.end());
        REQUIRE(approached.size() == result.approached.size());  // never re-offered
        REQUIRE(approached.size() <= eligible);
        std::size_t offers = 0;
        for (const auto& c : result.cycles) offers += c.offers;
        REQUIRE(offers == result.approached.size());
        for (auto idx : approached) {
            REQUIRE_FALSE(reg.at(idx).is_contributor);
        }

        std::set<std::string> raters;
        for (const auto& r : result.ratings) {
            REQUIRE(r.effective());
            REQUIRE(r.value_index < profile.size());
            REQUIRE(r.received_time <= config.deadline);
            REQUIRE(raters.insert(r.rater_id).second);
            const auto idx = reg.find(r.rater_id);
            REQUIRE(idx.has_value());
            REQUIRE(approached.count(*idx) == 1);
        }

        std::size_t cum_y = 0, cum_n = 0;
        for (const auto& c : result.cycles) {
            cum_y += c.effective;
            cum_n += c.neutral;
            REQUIRE(c.cum_effective == cum_y);
            REQUIRE(c.cum_neutral == cum_n);
        }
        REQUIRE(cum_y == result.ratings.size());
        REQUIRE(result.cycles.size() <= config.cycle_count());

        if (result.early_exit) {
            REQUIRE(result.status == CampaignStatus::Success);
            REQUIRE(result.ratings.size() >= config.target);
        } else {
            REQUIRE(result.cycles.size() == config.cycle_count());
            const bool enough = static_cast<double>(result.ratings.size()) >=
                                static_cast<double>(config.target) * (1.0 - config.shortfall_tolerance);
            REQUIRE((result.status == CampaignStatus::Success) == enough);
        }
    }
}

TEST_CASE("cycle csv") {
    std::vector<CycleStats> cycles{{1, 10, 4, 3, 4, 3}, {2, 9, 5, 1, 9, 4}};
    CHECK(cycles_to_csv(cycles) == "k,offers,effective,neutral,cum_effective,cum_neutral\n1,10,4,3,4,3\n2,9,5,1,9,4\n");
}
