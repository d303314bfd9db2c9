#pragma once

// Post-campaign incentives: rater reputation updates and contributor payment
// revision under the reshaped belief.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdval/rating.hpp"
#include "crowdval/reshaping.hpp"
#include "crowdval/worker_registry.hpp"

namespace crowdval {

struct ReputationChange {
    double delta = 0.0;
    double updated = 0.0;
};

// Delta = ((p' - p) / (1 - p)) (r / w_l) when p' > p,
//         ((p' - p) / p)       (r / w_l) when p' < p,
//         0                               when p' = p.
// R' = max(0, R + Delta).
ReputationChange reputation_update(double reputation, double interim, double posterior, int score, int max_score);

// Maps every contributor's quality to a payment. The vector form lets a
// scheme depend on the other contributors' qualities.
using PaymentFunction = std::function<std::vector<double>(std::span<const double> qualities)>;

// pi_c = u_c.
PaymentFunction linear_payment();
// Built-in schemes by config key ("linear").
PaymentFunction payment_function_by_name(std::string_view name);

struct Contribution {
    std::string contributor_id;
    std::size_t bin = 0;
    double quality = 1.0;
};

struct RaterReputation {
    std::string rater_id;
    double before = 0.0;
    double delta = 0.0;
    double after = 0.0;
};

struct ContributorPayment {
    std::string contributor_id;
    double original = 0.0;  // pi_c
    double revised = 0.0;   // pi'_c
    double budget = 0.0;    // pi''_c, equals revised unless budget mode is on
};

struct IncentiveReport {
    std::vector<RaterReputation> raters;
    std::vector<ContributorPayment> contributors;
    bool budget_mode = false;
};

// pi'_c = pi(u_c p'/p, rectified others); in budget mode additionally
// pi''_c = pi'_c * sum(pi) / sum(pi').
std::vector<ContributorPayment> revise_payments(const PaymentFunction& payment,
                                                std::span<const Contribution> contributions,
                                                std::span<const double> interim, std::span<const double> posterior,
                                                bool budget_mode);

// Reputation changes for every effective rating, computed against the
// current registry values. Does not modify the registry.
std::vector<RaterReputation> rater_reputation_updates(const WorkerRegistry& registry,
                                                      std::span<const Rating> ratings,
                                                      const ReshapedProfile& reshaped, int max_score);

// Same computation from explicit starting reputations (0 for unknown raters).
std::vector<RaterReputation> rater_reputation_updates(std::span<const Rating> ratings,
                                                      const ReshapedProfile& reshaped, int max_score,
                                                      const std::function<double(std::string_view)>& reputation_of);

// Writes all updates to the registry in one step.
void commit_reputations(WorkerRegistry& registry, std::span<const RaterReputation> updates);

std::string raters_to_csv(std::span<const RaterReputation> raters);
std::string contributors_to_csv(std::span<const ContributorPayment> contributors);
std::vector<Contribution> parse_contributions_csv(std::string_view text, std::string_view source_name = "contributions");

}  // namespace crowdval
