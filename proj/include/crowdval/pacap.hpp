#pragma once

// Progressive privacy-aware competency-adaptive push.
//
// The campaign runs floor(T0 / tau) cycles on a virtual clock. Each cycle
// selects raters from the remaining pool, sends each one a single rating task
// for a sampled representative, then advances the clock by tau while draining
// responses whose arrival time falls inside the window. Responses are ordered
// by (arrival time, task id), so a replay of the same queue is deterministic.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdval/profiling.hpp"
#include "crowdval/random.hpp"
#include "crowdval/rating.hpp"
#include "crowdval/sampling.hpp"
#include "crowdval/worker_registry.hpp"

namespace crowdval {

struct CampaignConfig {
    std::size_t target = 1000;          // m, effective ratings wanted
    double shortfall_tolerance = 0.1;   // alpha
    double deadline = 60.0;             // T0, minutes
    double cycle_length = 10.0;         // tau
    SamplingStrategy strategy = SamplingStrategy::Reverse;
    RatingScale scale = RatingScale::three_level();
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::string task_description = "Is the following value representative of the sensed quantity?";

    void validate() const;
    std::size_t cycle_count() const;
};

nlohmann::json campaign_to_json(const CampaignConfig& config);
// Missing keys keep their defaults.
CampaignConfig campaign_from_json(const nlohmann::json& j);

struct RatingTask {
    std::uint64_t task_id = 0;
    std::size_t value_index = 0;
    double value = 0.0;
    std::string description;
    const RatingScale* options = nullptr;
    WorkerIndex rater = 0;
};

struct Response {
    enum class Kind { Effective, Neutral, Silent };
    Kind kind = Kind::Silent;
    int score = 0;
    double arrival_time = 0.0;
    std::optional<PrivacyAction> privacy_action;

    static Response effective(int score, double arrival) { return {Kind::Effective, score, arrival, std::nullopt}; }
    static Response neutral(double arrival) { return {Kind::Neutral, 0, arrival, std::nullopt}; }
    static Response silent() { return {}; }
};

// Rating source. Receives the task, the rater's record, the dispatch time and
// the campaign stream. An exception counts as a non-response.
using Responder = std::function<Response(const RatingTask&, const Worker&, double now, Rng&)>;

struct CycleStats {
    std::size_t k = 0;
    std::size_t offers = 0;         // m(k)
    std::size_t effective = 0;      // m_Y(k)
    std::size_t neutral = 0;        // m_N(k)
    std::size_t cum_effective = 0;  // M_Y(k)
    std::size_t cum_neutral = 0;    // M_N(k)
};

enum class CampaignStatus { Success, Fail };

std::string_view to_string(CampaignStatus s) noexcept;

struct CampaignResult {
    CampaignStatus status = CampaignStatus::Fail;
    bool early_exit = false;                 // target met before the deadline
    std::vector<Rating> ratings;             // effective ratings only
    std::vector<CycleStats> cycles;
    std::vector<WorkerIndex> approached;     // every worker offered a task, in dispatch order
    double end_time = 0.0;
};

// Virtual campaign clock, in the same unit as the config times.
class VirtualClock {
public:
    explicit VirtualClock(double start = 0.0) : now_(start) {}
    double now() const noexcept { return now_; }
    void advance_to(double t);

private:
    double now_;
};

// Size of the next outreach. With M_Y > 0: ceil((m - M_Y)(1 + M_N / M_Y)),
// evaluated in exact integer arithmetic; with M_Y = 0: 2 * prev (at least 1).
// Both are capped at the pool size.
std::size_t next_outreach(std::size_t target, std::size_t cum_effective, std::size_t cum_neutral,
                          std::size_t pool_size, std::size_t prev_offers);

CampaignResult run_campaign(const CampaignConfig& config, WorkerRegistry& registry, const Profile& profile,
                            const Responder& responder, VirtualClock& clock, Rng& rng);

// Convenience overload: clock at 0 and a fresh stream seeded from config.seed.
CampaignResult run_campaign(const CampaignConfig& config, WorkerRegistry& registry, const Profile& profile,
                            const Responder& responder);

std::string cycles_to_csv(std::span<const CycleStats> cycles);

}  // namespace crowdval
