#pragma once

// Histogram profiling of crowd-sensed readings.
//
// A profile is the list of non-empty histogram bins, each summarized by a
// representative value (the bin median) and its normalized volume, which
// serves as the interim belief that the representative is the ground truth.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace crowdval {

struct Reading {
    std::string contributor_id;
    double value = 0.0;
};

struct ProfileBin {
    long long grid_index = 0;   // offset from the origin, in bin widths
    double representative = 0.0;
    double mass = 0.0;          // p_i = volume / total volume
    std::size_t volume = 0;     // kappa_i
};

struct Profile {
    double bin_width = 0.0;
    double origin = 0.0;        // lower edge of the first bin (data minimum)
    std::vector<ProfileBin> bins;

    std::size_t size() const noexcept { return bins.size(); }
    bool empty() const noexcept { return bins.empty(); }
    std::size_t total_volume() const noexcept;

    double lower_edge(std::size_t i) const noexcept {
        return origin + static_cast<double>(bins[i].grid_index) * bin_width;
    }
    std::vector<double> masses() const;
    std::vector<double> representatives() const;

    // Index of the bin whose half-open interval holds `value`, if that bin is
    // non-empty.
    std::optional<std::size_t> find_bin(double value) const;
};

// Builds the profile with bins [origin + k*w, origin + (k+1)*w) anchored at
// the data minimum. Representatives are lower-middle medians.
Profile build_profile(std::span<const Reading> readings, double bin_width);
// Same, on a grid anchored at `origin` (must not exceed the data minimum).
Profile build_profile(std::span<const Reading> readings, double bin_width, double origin);

// Bin index of every reading, parallel to `readings`. Throws if a reading
// falls outside the profile.
std::vector<std::size_t> assign_bins(const Profile& profile, std::span<const Reading> readings);

// File formats.
std::vector<Reading> read_readings_csv(const std::filesystem::path& path);
std::vector<Reading> parse_readings_csv(std::string_view text, std::string_view source_name = "readings");
std::string readings_to_csv(std::span<const Reading> readings);

nlohmann::json profile_to_json(const Profile& profile);
Profile profile_from_json(const nlohmann::json& j);
std::string profile_to_csv(const Profile& profile);

}  // namespace crowdval
