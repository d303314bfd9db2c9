#include "crowdval/pacap.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

namespace crowdval {

void CampaignConfig::validate() const {
    if (target < 1) throw ConfigError("campaign target m must be at least 1");
    if (!(shortfall_tolerance > 0.0 && shortfall_tolerance < 1.0))
        throw ConfigError("shortfall tolerance alpha must lie in (0, 1)");
    if (!(deadline > 0.0) || !std::isfinite(deadline)) throw ConfigError("deadline T0 must be positive");
    if (!(cycle_length > 0.0) || cycle_length > deadline) throw ConfigError("cycle length tau must lie in (0, T0]");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("rescaling factor eta must be nonnegative");
}

std::size_t CampaignConfig::cycle_count() const {
    // Tolerate T0/tau landing a hair below an integer.
    return static_cast<std::size_t>(std::floor(deadline / cycle_length + 1e-9));
}

nlohmann::json campaign_to_json(const CampaignConfig& c) {
    return {{"m", c.target},
            {"alpha", c.shortfall_tolerance},
            {"T0", c.deadline},
            {"tau", c.cycle_length},
            {"strategy", std::string(to_string(c.strategy))},
            {"rating_scale", scale_to_json(c.scale)},
            {"eta", c.eta},
            {"seed", c.seed},
            {"task_description", c.task_description}};
}

CampaignConfig campaign_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("campaign config must be a JSON object");
    CampaignConfig c;
    try {
        c.target = j.value("m", c.target);
        c.shortfall_tolerance = j.value("alpha", c.shortfall_tolerance);
        c.deadline = j.value("T0", c.deadline);
        // tau defaults to T0 / 6 when only T0 is given.
        c.cycle_length = j.contains("tau") ? j.at("tau").get<double>() : c.deadline / 6.0;
        if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
        if (j.contains("rating_scale")) c.scale = scale_from_json(j.at("rating_scale"));
        c.eta = j.value("eta", c.eta);
        c.seed = j.value("seed", c.seed);
        c.task_description = j.value("task_description", c.task_description);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed campaign config: ") + e.what());
    }
    return c;
}

std::string_view to_string(CampaignStatus s) noexcept {
    return s == CampaignStatus::Success ? "SUCCESS" : "FAIL";
}

void VirtualClock::advance_to(double t) {
    if (t < now_) throw Error("virtual clock cannot move backwards");
    now_ = t;
}

std::size_t next_outreach(std::size_t target, std::size_t cum_effective, std::size_t cum_neutral,
                          std::size_t pool_size, std::size_t prev_offers) {
    if (pool_size == 0) return 0;
    if (cum_effective >= target) return 0;
    std::size_t want = 0;
    if (cum_effective > 0) {
        // (m - M_Y)(M_Y + M_N) / M_Y, rounded up.
        const unsigned long long remaining = target - cum_effective;
        const unsigned long long num = remaining * (cum_effective + cum_neutral);
        want = static_cast<std::size_t>((num + cum_effective - 1) / cum_effective);
    } else {
        want = std::max<std::size_t>(1, 2 * prev_offers);
    }
    return std::min(want, pool_size);
}

namespace {

struct PendingResponse {
    double arrival;
    std::uint64_t task_id;
    WorkerIndex rater;
    std::size_t value_index;
    Response::Kind kind;
    int score;
    std::optional<PrivacyAction> action;
};

struct LaterFirst {
    bool operator()(const PendingResponse& a, const PendingResponse& b) const {
        if (a.arrival != b.arrival) return a.arrival > b.arrival;
        return a.task_id > b.task_id;
    }
};

using ResponseQueue = std::priority_queue<PendingResponse, std::vector<PendingResponse>, LaterFirst>;

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config, WorkerRegistry& registry, const Profile& profile,
                            const Responder& responder, VirtualClock& clock, Rng& rng) {
    config.validate();
    if (profile.empty()) throw Error("cannot run a campaign on an empty profile");

    const ValueSampler sampler(profile, config.strategy);
    const double start = clock.now();
    const double deadline = start + config.deadline;
    const std::size_t cycles = config.cycle_count();
    const double need = static_cast<double>(config.target) * (1.0 - config.shortfall_tolerance);

    CampaignResult result;
    auto pool = registry.candidate_pool();
    ResponseQueue queue;
    std::uint64_t next_task_id = 0;
    std::size_t offers = config.target;
    std::size_t cum_effective = 0;
    std::size_t cum_neutral = 0;

    auto drain_until = [&](double until, CycleStats& stats) {
        while (!queue.empty() && queue.top().arrival <= until) {
            auto ev = queue.top();
            queue.pop();
            if (ev.action) registry.apply_privacy_action(ev.rater, *ev.action);
            if (ev.kind == Response::Kind::Effective) {
                result.ratings.push_back({registry.at(ev.rater).id, ev.value_index, ev.score, ev.arrival});
                ++stats.effective;
            } else {
                ++stats.neutral;
            }
        }
    };

    for (std::size_t k = 1; k <= cycles; ++k) {
        const double now = clock.now();
        CycleStats stats;
        stats.k = k;

        const auto selected = offers > 0 ? registry.select_raters(pool, now, offers, rng) : std::vector<WorkerIndex>{};
        stats.offers = selected.size();
        for (WorkerIndex rater : selected) {
            RatingTask task;
            task.task_id = next_task_id++;
            task.value_index = sampler.draw(rng);
            task.value = profile.bins[task.value_index].representative;
            task.description = config.task_description;
            task.options = &config.scale;
            task.rater = rater;
            result.approached.push_back(rater);

            Response response;
            try {
                response = responder(task, registry.at(rater), now, rng);
            } catch (...) {
                continue;  // responder failure: non-response
            }
            if (response.kind == Response::Kind::Silent) continue;
            if (response.kind == Response::Kind::Effective && (response.score == 0 || !config.scale.contains(response.score)))
                continue;
            if (!(response.arrival_time >= now) || response.arrival_time > deadline) continue;
            queue.push({response.arrival_time, task.task_id, rater, task.value_index, response.kind,
                        response.kind == Response::Kind::Effective ? response.score : 0, response.privacy_action});
        }

        // One offer per worker per campaign.
        if (!selected.empty()) {
            std::unordered_set<WorkerIndex> taken(selected.begin(), selected.end());
            std::erase_if(pool, [&taken](WorkerIndex w) { return taken.count(w) != 0; });
        }

        const double window_end = std::min(now + config.cycle_length, deadline);
        drain_until(window_end, stats);
        clock.advance_to(window_end);

        cum_effective += stats.effective;
        cum_neutral += stats.neutral;
        stats.cum_effective = cum_effective;
        stats.cum_neutral = cum_neutral;
        result.cycles.push_back(stats);

        if (result.ratings.size() >= config.target) {
            result.status = CampaignStatus::Success;
            result.early_exit = true;
            result.end_time = clock.now();
            return result;
        }
        offers = next_outreach(config.target, cum_effective, cum_neutral, pool.size(), stats.offers);
    }

    // Responses landing between the last full cycle and T0 still count.
    if (clock.now() < deadline && !queue.empty()) {
        CycleStats tail;
        drain_until(deadline, tail);
        clock.advance_to(deadline);
        if (!result.cycles.empty()) {
            auto& last = result.cycles.back();
            last.effective += tail.effective;
            last.neutral += tail.neutral;
            last.cum_effective += tail.effective;
            last.cum_neutral += tail.neutral;
        }
    }

    result.end_time = clock.now();
    result.status = static_cast<double>(result.ratings.size()) < need ? CampaignStatus::Fail : CampaignStatus::Success;
    return result;
}

CampaignResult run_campaign(const CampaignConfig& config, WorkerRegistry& registry, const Profile& profile,
                            const Responder& responder) {
    VirtualClock clock;
    auto rng = make_rng(config.seed);
    return run_campaign(config, registry, profile, responder, clock, rng);
}

std::string cycles_to_csv(std::span<const CycleStats> cycles) {
    std::string out = "k,offers,effective,neutral,cum_effective,cum_neutral\n";
    for (const auto& c : cycles) {
        out += std::to_string(c.k) + "," + std::to_string(c.offers) + "," + std::to_string(c.effective) + "," +
               std::to_string(c.neutral) + "," + std::to_string(c.cum_effective) + "," +
               std::to_string(c.cum_neutral) + "\n";
    }
    return out;
}

}  // namespace crowdval
