#include "crowdval/worker_registry.hpp"

#include "crowdval/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdval {

void RegistryParams::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("registry epsilon must be positive");
    if (!(elasticity_step > 0.0)) throw ConfigError("registry elasticity step must be positive");
    if (!(elasticity_initial > 0.0)) throw ConfigError("registry initial elasticity must be positive");
    if (!(elasticity_max > elasticity_initial)) throw ConfigError("registry elasticity cap must exceed the initial elasticity");
}

std::string_view to_string(PrivacyAction a) noexcept {
    switch (a) {
        case PrivacyAction::More: return "more";
        case PrivacyAction::Less: return "less";
        case PrivacyAction::Stop: return "stop";
    }
    return "unknown";
}

PrivacyAction parse_privacy_action(std::string_view name) {
    for (auto a : {PrivacyAction::More, PrivacyAction::Less, PrivacyAction::Stop})
        if (to_string(a) == name) return a;
    throw ConfigError("unknown privacy action '" + std::string(name) + "'");
}

double selection_weight(const Worker& worker, double t, const RegistryParams& params) {
    const double elapsed = t - worker.last_offer_time;
    if (elapsed < 0.0) throw Error("clock regression for worker '" + worker.id + "'");
    if (worker.elasticity == 0.0 || elapsed == 0.0) return 0.0;
    return -std::expm1(-worker.elasticity * elapsed * (worker.reputation + params.epsilon));
}

Worker apply_privacy_action(Worker worker, PrivacyAction action, const RegistryParams& params) {
    switch (action) {
        case PrivacyAction::More:
            worker.elasticity = std::min(worker.elasticity + params.elasticity_step, params.elasticity_max);
            break;
        case PrivacyAction::Less:
            worker.elasticity = std::max(worker.elasticity - params.elasticity_step, params.epsilon);
            break;
        case PrivacyAction::Stop:
            worker.elasticity = 0.0;
            break;
    }
    return worker;
}

WorkerRegistry::WorkerRegistry(RegistryParams params) : params_(params) { params_.validate(); }

WorkerIndex WorkerRegistry::register_worker(std::string id, double signup_time, bool is_contributor) {
    Worker w;
    w.id = std::move(id);
    w.elasticity = params_.elasticity_initial;
    w.signup_time = signup_time;
    w.last_offer_time = signup_time;
    w.is_contributor = is_contributor;
    return add(std::move(w));
}

WorkerIndex WorkerRegistry::add(Worker worker) {
    if (!(worker.reputation >= 0.0)) throw Error("worker '" + worker.id + "' has negative reputation");
    if (!(worker.elasticity >= 0.0) || worker.elasticity > params_.elasticity_max)
        throw Error("worker '" + worker.id + "' has elasticity outside [0, cap]");
    if (workers_.size() >= std::numeric_limits<WorkerIndex>::max()) throw Error("registry is full");
    auto idx = static_cast<WorkerIndex>(workers_.size());
    if (!by_id_.emplace(worker.id, idx).second) throw Error("duplicate worker id '" + worker.id + "'");
    workers_.push_back(std::move(worker));
    return idx;
}

std::optional<WorkerIndex> WorkerRegistry::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

void WorkerRegistry::mark_contributor(WorkerIndex idx) { workers_.at(idx).is_contributor = true; }

void WorkerRegistry::set_reputation(WorkerIndex idx, double reputation) {
    if (!(reputation >= 0.0)) throw Error("reputation must be nonnegative");
    workers_.at(idx).reputation = reputation;
}

void WorkerRegistry::apply_privacy_action(WorkerIndex idx, PrivacyAction action) {
    auto& w = workers_.at(idx);
    w = crowdval::apply_privacy_action(std::move(w), action, params_);
}

std::vector<WorkerIndex> WorkerRegistry::candidate_pool() const {
    std::vector<WorkerIndex> pool;
    pool.reserve(workers_.size());
    for (WorkerIndex i = 0; i < workers_.size(); ++i) {
        const auto& w = workers_[i];
        if (!w.is_contributor && w.elasticity > 0.0) pool.push_back(i);
    }
    return pool;
}

std::vector<WorkerIndex> WorkerRegistry::select_raters(std::span<const WorkerIndex> pool, double t,
                                                       std::size_t count, Rng& rng) {
    // Sequential draw-remove-renormalize via exponential keys: with
    // key_j = ln(u_j) / w_j, the order of decreasing keys has the same law as
    // drawing proportionally to w without replacement.
    struct Keyed {
        double key;
        WorkerIndex idx;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(pool.size());
    for (WorkerIndex idx : pool) {
        const auto& w = workers_.at(idx);
        if (w.is_contributor) continue;
        const double weight = selection_weight(w, t, params_);
        if (!(weight > 0.0)) continue;
        const double u = 1.0 - uniform01(rng);  // (0, 1]
        keyed.push_back({std::log(u) / weight, idx});
    }
    const std::size_t take = std::min(count, keyed.size());
    auto by_key = [](const Keyed& a, const Keyed& b) {
        return a.key != b.key ? a.key > b.key : a.idx < b.idx;
    };
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(take), keyed.end(), by_key);

    std::vector<WorkerIndex> selected;
    selected.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        selected.push_back(keyed[i].idx);
        workers_[keyed[i].idx].last_offer_time = t;
    }
    return selected;
}

nlohmann::json registry_to_json(const WorkerRegistry& registry) {
    auto arr = nlohmann::json::array();
    for (const auto& w : registry.workers()) {
        arr.push_back({{"id", w.id},
                       {"reputation", w.reputation},
                       {"elasticity", w.elasticity},
                       {"last_offer_time", w.last_offer_time},
                       {"is_contributor", w.is_contributor},
                       {"signup_time", w.signup_time}});
    }
    return arr;
}

WorkerRegistry registry_from_json(const nlohmann::json& j, RegistryParams params) {
    if (!j.is_array()) throw ConfigError("registry snapshot must be a JSON array");
    WorkerRegistry registry(params);
    try {
        for (const auto& jw : j) {
            Worker w;
            w.id = jw.at("id").get<std::string>();
            w.reputation = jw.value("reputation", 0.0);
            w.elasticity = jw.value("elasticity", params.elasticity_initial);
            w.signup_time = jw.value("signup_time", 0.0);
            w.last_offer_time = jw.value("last_offer_time", w.signup_time);
            w.is_contributor = jw.value("is_contributor", false);
            registry.add(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed registry snapshot: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid registry snapshot: ") + e.what());
    }
    return registry;
}

}  // namespace crowdval
