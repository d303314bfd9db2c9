#include "crowdval/sampling.hpp"

#include "crowdval/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace crowdval {

std::string_view to_string(SamplingStrategy s) noexcept {
    switch (s) {
        case SamplingStrategy::Random: return "random";
        case SamplingStrategy::Proportional: return "proportional";
        case SamplingStrategy::Reverse: return "reverse";
        case SamplingStrategy::Inverse: return "inverse";
    }
    return "unknown";
}

SamplingStrategy parse_strategy(std::string_view name) {
    for (auto s : kAllStrategies)
        if (to_string(s) == name) return s;
    throw ConfigError("unknown sampling strategy '" + std::string(name) +
                      "' (expected random | proportional | reverse | inverse)");
}

std::vector<double> strategy_weights(std::span<const double> masses, SamplingStrategy strategy) {
    const std::size_t n = masses.size();
    if (n == 0) throw Error("cannot sample from an empty profile");
    for (double p : masses)
        if (!(p > 0.0) || !std::isfinite(p)) throw Error("profile masses must be positive");

    std::vector<double> s(n);
    switch (strategy) {
        case SamplingStrategy::Random:
            std::fill(s.begin(), s.end(), 1.0 / static_cast<double>(n));
            break;
        case SamplingStrategy::Proportional:
            std::copy(masses.begin(), masses.end(), s.begin());
            break;
        case SamplingStrategy::Reverse: {
            if (n == 1) {
                s[0] = 1.0;  // (d - p)/(nd - 1) is 0/0 with a single candidate
                break;
            }
            auto [lo, hi] = std::minmax_element(masses.begin(), masses.end());
            const double d = *lo + *hi;
            const double denom = static_cast<double>(n) * d - 1.0;
            for (std::size_t i = 0; i < n; ++i) s[i] = (d - masses[i]) / denom;
            break;
        }
        case SamplingStrategy::Inverse: {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = 1.0 / masses[i];
                total += s[i];
            }
            for (auto& x : s) x /= total;
            break;
        }
    }
    return s;
}

std::vector<double> strategy_weights(const Profile& profile, SamplingStrategy strategy) {
    return strategy_weights(profile.masses(), strategy);
}

ValueSampler::ValueSampler(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw Error("sampler needs at least one weight");
    cumulative_.resize(weights_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0)) throw Error("sampling weights must be nonnegative");
        acc += weights_[i];
        cumulative_[i] = acc;
    }
    if (!(acc > 0.0)) throw Error("sampling weights sum to zero");
}

ValueSampler::ValueSampler(const Profile& profile, SamplingStrategy strategy)
    : ValueSampler(strategy_weights(profile, strategy)) {}

std::size_t ValueSampler::draw(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                 static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    // Rounding can land on a trailing zero-weight entry; step back to the last positive one.
    while (weights_[idx] == 0.0 && idx > 0) --idx;
    return idx;
}

std::size_t draw_value(const Profile& profile, SamplingStrategy strategy, Rng& rng) {
    return ValueSampler(profile, strategy).draw(rng);
}

}  // namespace crowdval
