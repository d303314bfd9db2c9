#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace crowdval {

// Symmetric integer rating scale {-w_l, ..., -w_1, 0, w_1, ..., w_l} with
// 0 < w_1 < ... < w_l and one label per score. 0 is the neutral option.
class RatingScale {
public:
    struct Option {
        int score;
        std::string label;
    };

    // {-1, 0, 1}: Disagree / Neutral / Agree.
    static RatingScale three_level();
    // {-2, -1, 0, 1, 2}: Very unlikely ... Very likely.
    static RatingScale five_level();
    // Scores must be symmetric, strictly increasing and contain 0. Labels are
    // generated when not given.
    static RatingScale from_scores(std::vector<int> scores, std::vector<std::string> labels = {});

    std::span<const Option> options() const noexcept { return options_; }
    std::vector<int> scores() const;
    int max_score() const noexcept { return options_.back().score; }  // w_l
    bool contains(int score) const noexcept;

private:
    explicit RatingScale(std::vector<Option> options) : options_(std::move(options)) {}
    std::vector<Option> options_;
};

nlohmann::json scale_to_json(const RatingScale& scale);
RatingScale scale_from_json(const nlohmann::json& j);

// One collected rating r_j(v_i).
struct Rating {
    std::string rater_id;
    std::size_t value_index = 0;
    int score = 0;
    double received_time = 0.0;

    bool effective() const noexcept { return score != 0; }
};

std::string ratings_to_csv(std::span<const Rating> ratings);
std::vector<Rating> parse_ratings_csv(std::string_view text, std::string_view source_name = "ratings");
std::vector<Rating> read_ratings_csv(const std::filesystem::path& path);

}  // namespace crowdval
