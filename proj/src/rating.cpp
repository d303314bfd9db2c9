#include "crowdval/rating.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <algorithm>

namespace crowdval {

RatingScale RatingScale::three_level() { return from_scores({-1, 0, 1}, {"Disagree", "Neutral", "Agree"}); }

RatingScale RatingScale::five_level() {
    return from_scores({-2, -1, 0, 1, 2}, {"Very unlikely", "Unlikely", "Not Sure", "Likely", "Very likely"});
}

RatingScale RatingScale::from_scores(std::vector<int> scores, std::vector<std::string> labels) {
    if (scores.size() < 3 || scores.size() % 2 == 0) throw ConfigError("rating scale needs 2l+1 scores with l >= 1");
    if (!std::is_sorted(scores.begin(), scores.end()) ||
        std::adjacent_find(scores.begin(), scores.end()) != scores.end())
        throw ConfigError("rating scale scores must be strictly increasing");
    const std::size_t n = scores.size();
    for (std::size_t i = 0; i < n; ++i)
        if (scores[i] != -scores[n - 1 - i]) throw ConfigError("rating scale must be symmetric about 0");
    if (scores[n / 2] != 0) throw ConfigError("rating scale must contain a neutral 0 score");
    if (!labels.empty() && labels.size() != n) throw ConfigError("rating scale needs one label per score");

    std::vector<Option> options;
    options.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string label;
        if (!labels.empty()) label = labels[i];
        else if (scores[i] == 0) label = "Neutral";
        else label = std::to_string(scores[i]);
        options.push_back({scores[i], std::move(label)});
    }
    return RatingScale(std::move(options));
}

std::vector<int> RatingScale::scores() const {
    std::vector<int> out;
    for (const auto& o : options_) out.push_back(o.score);
    return out;
}

bool RatingScale::contains(int score) const noexcept {
    return std::any_of(options_.begin(), options_.end(), [score](const Option& o) { return o.score == score; });
}

nlohmann::json scale_to_json(const RatingScale& scale) {
    auto arr = nlohmann::json::array();
    for (const auto& o : scale.options()) arr.push_back({{"score", o.score}, {"label", o.label}});
    return arr;
}

RatingScale scale_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("rating_scale must be an array");
    std::vector<int> scores;
    std::vector<std::string> labels;
    try {
        for (const auto& e : j) {
            if (e.is_number_integer()) {
                scores.push_back(e.get<int>());
            } else {
                scores.push_back(e.at("score").get<int>());
                labels.push_back(e.value("label", std::string{}));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed rating_scale: ") + e.what());
    }
    if (!labels.empty() && labels.size() != scores.size()) throw ConfigError("rating_scale mixes labelled and bare scores");
    if (scores == std::vector<int>{-1, 0, 1} && labels.empty()) return RatingScale::three_level();
    if (scores == std::vector<int>{-2, -1, 0, 1, 2} && labels.empty()) return RatingScale::five_level();
    return RatingScale::from_scores(std::move(scores), std::move(labels));
}

std::string ratings_to_csv(std::span<const Rating> ratings) {
    std::string out = "rater_id,value_index,score,received_time\n";
    for (const auto& r : ratings) {
        out += r.rater_id + "," + std::to_string(r.value_index) + "," + std::to_string(r.score) + "," +
               io::format_number(r.received_time) + "\n";
    }
    return out;
}

std::vector<Rating> parse_ratings_csv(std::string_view text, std::string_view source_name) {
    const auto table = io::parse_csv(text, source_name);
    const auto rater = table.column("rater_id");
    const auto index = table.column("value_index");
    const auto score = table.column("score");
    const bool has_time = table.has_column("received_time");
    const auto time = has_time ? table.column("received_time") : 0;
    std::vector<Rating> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Rating r;
        r.rater_id = row[rater];
        const auto idx = io::parse_integer(row[index], "value_index");
        if (idx < 0) throw ConfigError("negative value_index in " + std::string(source_name));
        r.value_index = static_cast<std::size_t>(idx);
        r.score = static_cast<int>(io::parse_integer(row[score], "score"));
        r.received_time = has_time ? io::parse_double(row[time], "received_time") : 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Rating> read_ratings_csv(const std::filesystem::path& path) {
    return parse_ratings_csv(io::read_file(path), path.string());
}

}  // namespace crowdval
