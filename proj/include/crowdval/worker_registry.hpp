#pragma once

// Worker population, contributor set, reputations, privacy elasticities, and
// the push-probability used to pick raters.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crowdval/random.hpp"

namespace crowdval {

using WorkerIndex = std::uint32_t;

struct Worker {
    std::string id;
    double reputation = 0.0;       // R_j >= 0
    double elasticity = 1.0;       // lambda_j; 0 means opted out
    double last_offer_time = 0.0;  // t_j^-, signup time until the first offer
    bool is_contributor = false;
    double signup_time = 0.0;
};

struct RegistryParams {
    double epsilon = 0.1;             // keeps zero-reputation workers reachable
    double elasticity_step = 0.2;     // delta
    double elasticity_max = 1.6;      // cap against elasticity abuse
    double elasticity_initial = 1.0;

    void validate() const;
};

enum class PrivacyAction { More, Less, Stop };

std::string_view to_string(PrivacyAction a) noexcept;
PrivacyAction parse_privacy_action(std::string_view name);

// Unnormalized push weight 1 - exp(-lambda (t - t^-) (R + eps)).
// Throws on clock regression (t < t^-).
double selection_weight(const Worker& worker, double t, const RegistryParams& params);

// Returns the worker with lambda updated: More -> min(lambda + delta, max),
// Less -> max(lambda - delta, eps), Stop -> 0.
Worker apply_privacy_action(Worker worker, PrivacyAction action, const RegistryParams& params);

class WorkerRegistry {
public:
    explicit WorkerRegistry(RegistryParams params = {});

    // New worker: t^- = signup time, lambda = initial elasticity, R = 0.
    WorkerIndex register_worker(std::string id, double signup_time, bool is_contributor = false);
    // Inserts a full record (snapshot import).
    WorkerIndex add(Worker worker);

    std::size_t size() const noexcept { return workers_.size(); }
    const Worker& at(WorkerIndex idx) const { return workers_.at(idx); }
    std::optional<WorkerIndex> find(std::string_view id) const;
    const RegistryParams& params() const noexcept { return params_; }
    std::span<const Worker> workers() const noexcept { return workers_; }

    void mark_contributor(WorkerIndex idx);
    void set_reputation(WorkerIndex idx, double reputation);
    void apply_privacy_action(WorkerIndex idx, PrivacyAction action);

    // U \ C, minus workers who asked to stop receiving offers. Ascending index order.
    std::vector<WorkerIndex> candidate_pool() const;

    // Picks min(count, #eligible) distinct workers from `pool`, each draw
    // proportional to selection_weight over the workers not yet picked.
    // Workers with zero weight are never picked. Sets t^- = t for every
    // selected worker. Result is in draw order.
    std::vector<WorkerIndex> select_raters(std::span<const WorkerIndex> pool, double t, std::size_t count,
                                           Rng& rng);

private:
    RegistryParams params_;
    std::vector<Worker> workers_;
    std::unordered_map<std::string, WorkerIndex> by_id_;
};

nlohmann::json registry_to_json(const WorkerRegistry& registry);
WorkerRegistry registry_from_json(const nlohmann::json& j, RegistryParams params = {});

}  // namespace crowdval
