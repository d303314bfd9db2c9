#include "crowdval/incentives.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crowdval {

ReputationChange reputation_update(double reputation, double interim, double posterior, int score, int max_score) {
    if (!(interim > 0.0 && interim < 1.0)) throw Error("degenerate interim belief");
    if (score == 0) throw Error("reputation update requires an effective rating");
    if (max_score <= 0 || std::abs(score) > max_score) throw Error("rating score exceeds the scale maximum");

    const double weight = static_cast<double>(score) / static_cast<double>(max_score);
    double delta = 0.0;
    if (posterior > interim) delta = (posterior - interim) / (1.0 - interim) * weight;
    else if (posterior < interim) delta = (posterior - interim) / interim * weight;
    return {delta, std::max(0.0, reputation + delta)};
}

PaymentFunction linear_payment() {
    return [](std::span<const double> qualities) { return std::vector<double>(qualities.begin(), qualities.end()); };
}

PaymentFunction payment_function_by_name(std::string_view name) {
    if (name == "linear") return linear_payment();
    throw ConfigError("unknown payment function '" + std::string(name) + "' (built in: linear)");
}

namespace {

std::vector<double> checked_payments(const PaymentFunction& payment, std::span<const double> qualities) {
    auto out = payment(qualities);
    if (out.size() != qualities.size()) throw Error("payment function returned the wrong number of payments");
    for (double x : out)
        if (!(x >= 0.0) || !std::isfinite(x)) throw Error("payment function returned a negative or non-finite payment");
    return out;
}

}  // namespace

std::vector<ContributorPayment> revise_payments(const PaymentFunction& payment,
                                                std::span<const Contribution> contributions,
                                                std::span<const double> interim, std::span<const double> posterior,
                                                bool budget_mode) {
    if (interim.size() != posterior.size()) throw Error("interim and posterior have different bin counts");
    std::vector<double> quality;
    std::vector<double> rectified;
    quality.reserve(contributions.size());
    rectified.reserve(contributions.size());
    for (const auto& c : contributions) {
        if (c.bin >= interim.size()) throw Error("contributor '" + c.contributor_id + "' references a missing bin");
        if (!(interim[c.bin] > 0.0)) throw Error("contributor '" + c.contributor_id + "' sits in a zero-mass bin");
        if (!(c.quality >= 0.0)) throw Error("contributor '" + c.contributor_id + "' has negative quality");
        quality.push_back(c.quality);
        rectified.push_back(c.quality * posterior[c.bin] / interim[c.bin]);
    }

    const auto original = checked_payments(payment, quality);
    const auto revised = checked_payments(payment, rectified);

    std::vector<ContributorPayment> out(contributions.size());
    for (std::size_t i = 0; i < contributions.size(); ++i) {
        out[i].contributor_id = contributions[i].contributor_id;
        out[i].original = original[i];
        out[i].revised = revised[i];
        out[i].budget = revised[i];
    }
    if (budget_mode) {
        const double total = std::accumulate(original.begin(), original.end(), 0.0);
        const double revised_total = std::accumulate(revised.begin(), revised.end(), 0.0);
        if (revised_total == 0.0) {
            if (total > 0.0) throw Error("budget renormalization undefined");
        } else {
            for (auto& p : out) p.budget = p.revised / revised_total * total;
        }
    }
    return out;
}

std::vector<RaterReputation> rater_reputation_updates(std::span<const Rating> ratings,
                                                      const ReshapedProfile& reshaped, int max_score,
                                                      const std::function<double(std::string_view)>& reputation_of) {
    std::vector<RaterReputation> out;
    out.reserve(ratings.size());
    for (const auto& r : ratings) {
        if (!r.effective()) continue;  // neutral raters are not penalized
        if (r.value_index >= reshaped.bins.size()) throw Error("rating references a missing bin");
        const auto& bin = reshaped.bins[r.value_index];
        const double before = reputation_of(r.rater_id);
        const auto change = reputation_update(before, bin.interim, bin.posterior, r.score, max_score);
        out.push_back({r.rater_id, before, change.delta, change.updated});
    }
    return out;
}

std::vector<RaterReputation> rater_reputation_updates(const WorkerRegistry& registry,
                                                      std::span<const Rating> ratings,
                                                      const ReshapedProfile& reshaped, int max_score) {
    return rater_reputation_updates(ratings, reshaped, max_score, [&registry](std::string_view id) {
        auto idx = registry.find(id);
        if (!idx) throw Error("rater '" + std::string(id) + "' is not registered");
        return registry.at(*idx).reputation;
    });
}

void commit_reputations(WorkerRegistry& registry, std::span<const RaterReputation> updates) {
    std::vector<std::pair<WorkerIndex, double>> resolved;
    resolved.reserve(updates.size());
    for (const auto& u : updates) {
        auto idx = registry.find(u.rater_id);
        if (!idx) throw Error("rater '" + u.rater_id + "' is not registered");
        resolved.emplace_back(*idx, u.after);
    }
    for (auto [idx, value] : resolved) registry.set_reputation(idx, value);
}

std::string raters_to_csv(std::span<const RaterReputation> raters) {
    std::string out = "rater_id,R_before,delta,R_after\n";
    for (const auto& r : raters) {
        out += r.rater_id + "," + io::format_number(r.before) + "," + io::format_number(r.delta) + "," +
               io::format_number(r.after) + "\n";
    }
    return out;
}

std::string contributors_to_csv(std::span<const ContributorPayment> contributors) {
    std::string out = "contributor_id,pi,pi_prime,pi_budget\n";
    for (const auto& c : contributors) {
        out += c.contributor_id + "," + io::format_number(c.original) + "," + io::format_number(c.revised) + "," +
               io::format_number(c.budget) + "\n";
    }
    return out;
}

std::vector<Contribution> parse_contributions_csv(std::string_view text, std::string_view source_name) {
    const auto table = io::parse_csv(text, source_name);
    const auto id = table.column("contributor_id");
    const auto bin = table.column("bin");
    const bool has_quality = table.has_column("quality");
    std::vector<Contribution> out;
    for (const auto& row : table.rows) {
        Contribution c;
        c.contributor_id = row[id];
        const auto b = io::parse_integer(row[bin], "bin");
        if (b < 0) throw ConfigError("negative bin index in " + std::string(source_name));
        c.bin = static_cast<std::size_t>(b);
        c.quality = has_quality ? io::parse_double(row[table.column("quality")], "quality") : 1.0;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace crowdval
