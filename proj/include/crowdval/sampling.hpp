#pragma once

// Value sampling: which representative each rater is asked about.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "crowdval/profiling.hpp"
#include "crowdval/random.hpp"

namespace crowdval {

enum class SamplingStrategy { Random, Proportional, Reverse, Inverse };

inline constexpr SamplingStrategy kAllStrategies[] = {
    SamplingStrategy::Random, SamplingStrategy::Proportional, SamplingStrategy::Reverse,
    SamplingStrategy::Inverse};

std::string_view to_string(SamplingStrategy s) noexcept;
// Accepts "random", "proportional", "reverse", "inverse".
SamplingStrategy parse_strategy(std::string_view name);

// Sampling weights over the bins of a profile, given the interim masses.
//   Random:       1/n
//   Proportional: p_i
//   Reverse:      (d - p_i) / (n d - 1), d = p_min + p_max  ({1} when n = 1)
//   Inverse:      p_i^-1 / sum_j p_j^-1
std::vector<double> strategy_weights(std::span<const double> masses, SamplingStrategy strategy);
std::vector<double> strategy_weights(const Profile& profile, SamplingStrategy strategy);

// Inverse-CDF sampler over a fixed weight vector. Weights are computed once
// per campaign; each draw consumes one uniform from the stream.
class ValueSampler {
public:
    explicit ValueSampler(std::vector<double> weights);
    ValueSampler(const Profile& profile, SamplingStrategy strategy);

    std::size_t draw(Rng& rng) const;
    std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

std::size_t draw_value(const Profile& profile, SamplingStrategy strategy, Rng& rng);

}  // namespace crowdval
