#pragma once

// Consolidates effective ratings with the interim profile into the posterior.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdval/profiling.hpp"
#include "crowdval/rating.hpp"

namespace crowdval {

// Per-bin normalized positive (g) and negative (b) rating mass, plus the raw
// number of effective ratings landing on each bin.
struct BinTally {
    std::vector<double> positive;
    std::vector<double> negative;
    std::vector<std::size_t> counts;

    std::size_t size() const noexcept { return positive.size(); }
    std::size_t total_count() const noexcept;
    bool all_zero() const noexcept;
};

// g_i = (1/w_l) sum r 1[r>0],  b_i = -(1/w_l) sum r 1[r<0].
// Throws if a neutral score leaked into the set, a score is off-scale, or a
// rating points past the last bin.
BinTally tally_ratings(std::span<const Rating> ratings, const RatingScale& scale, std::size_t bin_count);

struct ReshapedBin {
    double representative = 0.0;
    double interim = 0.0;
    double posterior = 0.0;
    double positive = 0.0;
    double negative = 0.0;
};

struct ReshapedProfile {
    std::vector<ReshapedBin> bins;
    double eta = 1.0;
    std::size_t rating_count = 0;

    std::vector<double> interim() const;
    std::vector<double> posterior() const;
};

// p_hat_i = (p_i + eta g_i / |R|) / (1 + eta (g_i + b_i) / |R|), then
// normalized. |R| is the number of effective ratings. Identity when |R| = 0
// or eta = 0.
ReshapedProfile reshape(const Profile& profile, const BinTally& tally, std::size_t rating_count, double eta);

std::string reshaped_to_csv(const ReshapedProfile& reshaped);
nlohmann::json reshaped_to_json(const ReshapedProfile& reshaped);
ReshapedProfile parse_reshaped_csv(std::string_view text, std::string_view source_name = "reshaped");

}  // namespace crowdval
