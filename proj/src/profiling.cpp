#include "crowdval/profiling.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace crowdval {

std::size_t Profile::total_volume() const noexcept {
    std::size_t total = 0;
    for (const auto& b : bins) total += b.volume;
    return total;
}

std::vector<double> Profile::masses() const {
    std::vector<double> out;
    out.reserve(bins.size());
    for (const auto& b : bins) out.push_back(b.mass);
    return out;
}

std::vector<double> Profile::representatives() const {
    std::vector<double> out;
    out.reserve(bins.size());
    for (const auto& b : bins) out.push_back(b.representative);
    return out;
}

namespace {

long long grid_index_of(double value, double origin, double width) {
    return static_cast<long long>(std::floor((value - origin) / width));
}

}  // namespace

std::optional<std::size_t> Profile::find_bin(double value) const {
    if (bins.empty() || !std::isfinite(value) || value < origin) return std::nullopt;
    const auto key = grid_index_of(value, origin, bin_width);
    auto it = std::lower_bound(bins.begin(), bins.end(), key,
                               [](const ProfileBin& b, long long k) { return b.grid_index < k; });
    if (it == bins.end() || it->grid_index != key) return std::nullopt;
    return static_cast<std::size_t>(it - bins.begin());
}

namespace {

void check_readings(std::span<const Reading> readings, double bin_width) {
    if (readings.empty()) throw Error("no data to profile");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw Error("bin width must be positive");
    for (std::size_t i = 0; i < readings.size(); ++i) {
        if (!std::isfinite(readings[i].value)) {
            throw Error("non-finite reading at index " + std::to_string(i) + " (contributor '" +
                        readings[i].contributor_id + "')");
        }
    }
}

double data_minimum(std::span<const Reading> readings) {
    return std::min_element(readings.begin(), readings.end(),
                            [](const Reading& a, const Reading& b) { return a.value < b.value; })
        ->value;
}

}  // namespace

Profile build_profile(std::span<const Reading> readings, double bin_width) {
    check_readings(readings, bin_width);
    return build_profile(readings, bin_width, data_minimum(readings));
}

Profile build_profile(std::span<const Reading> readings, double bin_width, double origin) {
    check_readings(readings, bin_width);
    if (!std::isfinite(origin) || origin > data_minimum(readings))
        throw Error("profile origin must not exceed the data minimum");

    std::map<long long, std::vector<double>> grouped;
    for (const auto& r : readings) grouped[grid_index_of(r.value, origin, bin_width)].push_back(r.value);

    Profile profile;
    profile.bin_width = bin_width;
    profile.origin = origin;
    profile.bins.reserve(grouped.size());
    const double total = static_cast<double>(readings.size());
    for (auto& [key, values] : grouped) {
        std::sort(values.begin(), values.end());
        ProfileBin bin;
        bin.grid_index = key;
        bin.volume = values.size();
        bin.representative = values[(values.size() - 1) / 2];
        bin.mass = static_cast<double>(bin.volume) / total;
        profile.bins.push_back(bin);
    }
    return profile;
}

std::vector<std::size_t> assign_bins(const Profile& profile, std::span<const Reading> readings) {
    std::vector<std::size_t> out;
    out.reserve(readings.size());
    for (const auto& r : readings) {
        auto idx = profile.find_bin(r.value);
        if (!idx) throw Error("reading from '" + r.contributor_id + "' falls outside the profile");
        out.push_back(*idx);
    }
    return out;
}

std::vector<Reading> parse_readings_csv(std::string_view text, std::string_view source_name) {
    const auto table = io::parse_csv(text, source_name);
    const auto id_col = table.column("contributor_id");
    const auto value_col = table.column("value");
    std::vector<Reading> readings;
    readings.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        readings.push_back({row[id_col], io::parse_double(row[value_col], "value")});
    }
    return readings;
}

std::vector<Reading> read_readings_csv(const std::filesystem::path& path) {
    return parse_readings_csv(io::read_file(path), path.string());
}

std::string readings_to_csv(std::span<const Reading> readings) {
    std::string out = "contributor_id,value\n";
    for (const auto& r : readings) out += r.contributor_id + "," + io::format_number(r.value) + "\n";
    return out;
}

nlohmann::json profile_to_json(const Profile& profile) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : profile.bins) {
        bins.push_back({{"v", b.representative}, {"p", b.mass}, {"kappa", b.volume}, {"grid_index", b.grid_index}});
    }
    return {{"bin_width", profile.bin_width}, {"origin", profile.origin}, {"bins", std::move(bins)}};
}

Profile profile_from_json(const nlohmann::json& j) {
    try {
        Profile p;
        p.bin_width = j.at("bin_width").get<double>();
        if (!(p.bin_width > 0.0)) throw ConfigError("profile bin_width must be positive");
        p.origin = j.value("origin", 0.0);
        std::size_t total = 0;
        long long next_index = 0;
        for (const auto& jb : j.at("bins")) {
            ProfileBin b;
            b.representative = jb.at("v").get<double>();
            b.volume = jb.at("kappa").get<std::size_t>();
            b.grid_index = jb.value("grid_index", next_index);
            next_index = b.grid_index + 1;
            total += b.volume;
            p.bins.push_back(b);
        }
        if (p.bins.empty() || total == 0) throw ConfigError("profile has no bins");
        // Masses are derived from the integer volumes so p = kappa / sum(kappa) exactly.
        for (auto& b : p.bins) b.mass = static_cast<double>(b.volume) / static_cast<double>(total);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed profile JSON: ") + e.what());
    }
}

std::string profile_to_csv(const Profile& profile) {
    std::string out = "v,p,kappa\n";
    for (const auto& b : profile.bins) {
        out += io::format_number(b.representative) + "," + io::format_number(b.mass) + "," +
               std::to_string(b.volume) + "\n";
    }
    return out;
}

}  // namespace crowdval
