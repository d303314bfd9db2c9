#include "crowdval/reshaping.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <cmath>
#include <numeric>

namespace crowdval {

std::size_t BinTally::total_count() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

bool BinTally::all_zero() const noexcept {
    for (std::size_t i = 0; i < positive.size(); ++i)
        if (positive[i] != 0.0 || negative[i] != 0.0 || counts[i] != 0) return false;
    return true;
}

BinTally tally_ratings(std::span<const Rating> ratings, const RatingScale& scale, std::size_t bin_count) {
    BinTally tally;
    tally.positive.assign(bin_count, 0.0);
    tally.negative.assign(bin_count, 0.0);
    tally.counts.assign(bin_count, 0);
    const double w_l = scale.max_score();
    for (const auto& r : ratings) {
        if (r.score == 0) throw Error("neutral rating leaked into effective set");
        if (!scale.contains(r.score)) throw Error("rating score " + std::to_string(r.score) + " is not on the scale");
        if (r.value_index >= bin_count)
            throw Error("rating from '" + r.rater_id + "' references bin " + std::to_string(r.value_index) +
                        " of " + std::to_string(bin_count));
        if (r.score > 0) tally.positive[r.value_index] += r.score / w_l;
        else tally.negative[r.value_index] -= r.score / w_l;
        ++tally.counts[r.value_index];
    }
    return tally;
}

std::vector<double> ReshapedProfile::interim() const {
    std::vector<double> out;
    for (const auto& b : bins) out.push_back(b.interim);
    return out;
}

std::vector<double> ReshapedProfile::posterior() const {
    std::vector<double> out;
    for (const auto& b : bins) out.push_back(b.posterior);
    return out;
}

ReshapedProfile reshape(const Profile& profile, const BinTally& tally, std::size_t rating_count, double eta) {
    if (profile.empty()) throw Error("cannot reshape an empty profile");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error("rescaling factor eta must be nonnegative");
    if (tally.size() != profile.size()) throw Error("tally and profile have different bin counts");
    if (rating_count == 0 && !tally.all_zero()) throw Error("inconsistent rating count");
    if (rating_count != tally.total_count()) throw Error("inconsistent rating count");

    ReshapedProfile out;
    out.eta = eta;
    out.rating_count = rating_count;
    out.bins.resize(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        auto& b = out.bins[i];
        b.representative = profile.bins[i].representative;
        b.interim = profile.bins[i].mass;
        b.positive = tally.positive[i];
        b.negative = tally.negative[i];
    }

    if (rating_count == 0 || eta == 0.0) {
        for (auto& b : out.bins) b.posterior = b.interim;
        return out;
    }

    const double r = static_cast<double>(rating_count);
    double total = 0.0;
    for (auto& b : out.bins) {
        b.posterior = (b.interim + eta * b.positive / r) / (1.0 + eta * (b.positive + b.negative) / r);
        total += b.posterior;
    }
    for (auto& b : out.bins) b.posterior /= total;
    return out;
}

std::string reshaped_to_csv(const ReshapedProfile& reshaped) {
    std::string out = "v,p_interim,p_posterior,g,b\n";
    for (const auto& b : reshaped.bins) {
        out += io::format_number(b.representative) + "," + io::format_number(b.interim) + "," +
               io::format_number(b.posterior) + "," + io::format_number(b.positive) + "," +
               io::format_number(b.negative) + "\n";
    }
    return out;
}

nlohmann::json reshaped_to_json(const ReshapedProfile& reshaped) {
    auto bins = nlohmann::json::array();
    for (const auto& b : reshaped.bins) {
        bins.push_back({{"v", b.representative},
                        {"p_interim", b.interim},
                        {"p_posterior", b.posterior},
                        {"g", b.positive},
                        {"b", b.negative}});
    }
    return {{"eta", reshaped.eta}, {"rating_count", reshaped.rating_count}, {"bins", std::move(bins)}};
}

ReshapedProfile parse_reshaped_csv(std::string_view text, std::string_view source_name) {
    const auto table = io::parse_csv(text, source_name);
    const auto v = table.column("v");
    const auto pi = table.column("p_interim");
    const auto pp = table.column("p_posterior");
    const bool has_tally = table.has_column("g") && table.has_column("b");
    ReshapedProfile out;
    for (const auto& row : table.rows) {
        ReshapedBin b;
        b.representative = io::parse_double(row[v], "v");
        b.interim = io::parse_double(row[pi], "p_interim");
        b.posterior = io::parse_double(row[pp], "p_posterior");
        if (has_tally) {
            b.positive = io::parse_double(row[table.column("g")], "g");
            b.negative = io::parse_double(row[table.column("b")], "b");
        }
        out.bins.push_back(b);
    }
    if (out.bins.empty()) throw ConfigError(std::string(source_name) + ": reshaped profile has no bins");
    return out;
}

}  // namespace crowdval
