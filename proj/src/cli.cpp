#include "crowdval/cli.hpp"

#include "crowdval/error.hpp"
#include "crowdval/incentives.hpp"
#include "crowdval/profiling.hpp"
#include "crowdval/rating.hpp"
#include "crowdval/reshaping.hpp"
#include "crowdval/simulator.hpp"
#include "crowdval/text_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>

namespace crowdval::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const fs::path& path) {
    const auto text = io::read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

bool has_extension(const fs::path& p, std::string_view ext) { return p.extension() == ext; }

RatingScale parse_scale_flag(const std::string& text) {
    std::vector<int> scores;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        scores.push_back(static_cast<int>(io::parse_integer(field, "--scale")));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return scale_from_json(nlohmann::json(scores));
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError("no such file: " + p.string());
}

struct ProfileArgs {
    std::string in, out, csv_out;
    double bin_width = 0.0;
};

int run_profile(const ProfileArgs& a, std::ostream& out) {
    require_file(a.in);
    const auto readings = read_readings_csv(a.in);
    const auto profile = build_profile(readings, a.bin_width);
    const fs::path dest(a.out);
    if (has_extension(dest, ".csv")) io::write_file(dest, profile_to_csv(profile));
    else io::write_file(dest, profile_to_json(profile).dump(2) + "\n");
    if (!a.csv_out.empty()) io::write_file(a.csv_out, profile_to_csv(profile));
    out << "profiled " << readings.size() << " readings into " << profile.size() << " bins\n";
    return kExitOk;
}

struct SimulateArgs {
    std::string spec, out, strategy;
    std::optional<std::uint64_t> seed;
    std::optional<double> eta;
    bool budget_mode = false;
};

sim::ScenarioSpec load_spec(const std::string& path, std::uint64_t seed, const std::string& strategy,
                            std::optional<double> eta, bool budget_mode) {
    require_file(path);
    auto spec = sim::spec_from_json(load_json(path));
    spec.seed = seed;
    spec.campaign.seed = seed;
    if (!strategy.empty()) spec.campaign.strategy = parse_strategy(strategy);
    if (eta) spec.campaign.eta = *eta;
    if (budget_mode) spec.budget_mode = true;
    spec.validate();
    return spec;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    if (!a.seed) throw ConfigError("simulate requires --seed");
    const auto spec = load_spec(a.spec, *a.seed, a.strategy, a.eta, a.budget_mode);
    const auto report = sim::run_scenario(spec);
    sim::write_report(report, a.out);
    out << "case " << sim::to_string(spec.scenario_case) << ", " << to_string(spec.campaign.strategy) << ": "
        << report.status();
    if (report.truth_bin) out << ", posterior ratio at truth " << io::format_number(report.truth_bin->ratio);
    out << "\n";
    return report.failed() ? kExitCampaignFail : kExitOk;
}

struct ReshapeArgs {
    std::string in, ratings, out, scale = "-1,0,1";
    double eta = 1.0;
};

int run_reshape(const ReshapeArgs& a, std::ostream& out) {
    require_file(a.in);
    require_file(a.ratings);
    const auto profile = profile_from_json(load_json(a.in));
    const auto scale = parse_scale_flag(a.scale);
    auto ratings = read_ratings_csv(a.ratings);
    // Neutral rows may appear in raw exports; only effective ratings are reshaped.
    std::erase_if(ratings, [](const Rating& r) { return !r.effective(); });
    const auto tally = tally_ratings(ratings, scale, profile.size());
    const auto reshaped = reshape(profile, tally, ratings.size(), a.eta);
    const fs::path dest(a.out);
    if (has_extension(dest, ".json")) io::write_file(dest, reshaped_to_json(reshaped).dump(2) + "\n");
    else io::write_file(dest, reshaped_to_csv(reshaped));
    out << "reshaped " << profile.size() << " bins with " << ratings.size() << " effective ratings\n";
    return kExitOk;
}

struct IncentivesArgs {
    std::string in, contributions, out, payment = "linear", ratings, registry, scale = "-1,0,1";
    bool budget_mode = false;
};

int run_incentives(const IncentivesArgs& a, std::ostream& out) {
    require_file(a.in);
    require_file(a.contributions);
    const auto reshaped = parse_reshaped_csv(io::read_file(a.in), a.in);
    const auto contributions = parse_contributions_csv(io::read_file(a.contributions), a.contributions);
    const auto payment = payment_function_by_name(a.payment);
    const auto interim = reshaped.interim();
    const auto posterior = reshaped.posterior();
    const auto payments = revise_payments(payment, contributions, interim, posterior, a.budget_mode);
    const fs::path dir(a.out);
    io::write_file(dir / "contributors.csv", contributors_to_csv(payments));

    if (!a.ratings.empty()) {
        require_file(a.ratings);
        const auto scale = parse_scale_flag(a.scale);
        auto ratings = read_ratings_csv(a.ratings);
        std::erase_if(ratings, [](const Rating& r) { return !r.effective(); });
        std::vector<RaterReputation> raters;
        if (!a.registry.empty()) {
            require_file(a.registry);
            const auto registry = registry_from_json(load_json(a.registry));
            raters = rater_reputation_updates(registry, ratings, reshaped, scale.max_score());
        } else {
            raters = rater_reputation_updates(ratings, reshaped, scale.max_score(), [](std::string_view) { return 0.0; });
        }
        io::write_file(dir / "raters.csv", raters_to_csv(raters));
    }
    out << "revised payments for " << payments.size() << " contributors\n";
    return kExitOk;
}

struct ReportArgs {
    std::string in, out;
    std::optional<std::uint64_t> seed;
};

int run_report(const ReportArgs& a, std::ostream& out) {
    if (!a.seed) throw ConfigError("report requires --seed");
    const fs::path dir(a.in);
    const auto spec = load_spec((dir / "spec.json").string(), *a.seed, "", std::nullopt, false);
    const auto reports = sim::compare_strategies(spec);
    io::write_file(a.out, sim::comparison_to_csv(reports));
    for (const auto& r : reports) {
        out << to_string(r.spec.campaign.strategy) << ": " << r.status();
        if (r.truth_bin) out << ", ratio at truth " << io::format_number(r.truth_bin->ratio);
        out << "\n";
    }
    return kExitOk;
}

}  // namespace

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-validation of crowd-sensed data profiles", "crowdval"};
    app.require_subcommand(1, 1);

    ProfileArgs profile_args;
    auto* profile = app.add_subcommand("profile", "Build a histogram profile from readings CSV");
    profile->add_option("--in", profile_args.in, "Readings CSV (contributor_id,value)")->required();
    profile->add_option("--bin-width", profile_args.bin_width, "Histogram bin width")->required();
    profile->add_option("--out", profile_args.out, "Profile output (.json, or .csv)")->required();
    profile->add_option("--csv", profile_args.csv_out, "Additional CSV output (v,p,kappa)");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic scenario end to end");
    simulate->add_option("--spec", sim_args.spec, "Scenario spec JSON")->required();
    simulate->add_option("--seed", sim_args.seed, "RNG seed");
    simulate->add_option("--out", sim_args.out, "Report directory")->required();
    simulate->add_option("--strategy", sim_args.strategy, "random | proportional | reverse | inverse");
    simulate->add_option("--eta", sim_args.eta, "Rating rescaling factor");
    simulate->add_flag("--budget-mode", sim_args.budget_mode, "Renormalize payments to the original budget");

    ReshapeArgs reshape_args;
    auto* reshape_cmd = app.add_subcommand("reshape", "Reshape a profile with collected ratings");
    reshape_cmd->add_option("--in", reshape_args.in, "Profile JSON")->required();
    reshape_cmd->add_option("--ratings", reshape_args.ratings, "Ratings CSV")->required();
    reshape_cmd->add_option("--out", reshape_args.out, "Reshaped profile (.csv, or .json)")->required();
    reshape_cmd->add_option("--eta", reshape_args.eta, "Rating rescaling factor")->capture_default_str();
    reshape_cmd->add_option("--scale", reshape_args.scale, "Rating scores, e.g. -2,-1,0,1,2")->capture_default_str();

    IncentivesArgs inc_args;
    auto* incentives = app.add_subcommand("incentives", "Reputation and payment revision");
    incentives->add_option("--in", inc_args.in, "Reshaped profile CSV")->required();
    incentives->add_option("--contributions", inc_args.contributions, "CSV contributor_id,bin[,quality]")->required();
    incentives->add_option("--out", inc_args.out, "Output directory")->required();
    incentives->add_option("--payment", inc_args.payment, "Payment function")->capture_default_str();
    incentives->add_option("--ratings", inc_args.ratings, "Ratings CSV for rater reputation updates");
    incentives->add_option("--registry", inc_args.registry, "Registry snapshot JSON (starting reputations)");
    incentives->add_option("--scale", inc_args.scale, "Rating scores")->capture_default_str();
    incentives->add_flag("--budget-mode", inc_args.budget_mode, "Renormalize payments to the original budget");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Per-strategy comparison table for a report directory");
    report->add_option("--in", report_args.in, "Report directory written by simulate")->required();
    report->add_option("--seed", report_args.seed, "RNG seed");
    report->add_option("--out", report_args.out, "Comparison CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*profile) return run_profile(profile_args, out);
        if (*simulate) return run_simulate(sim_args, out);
        if (*reshape_cmd) return run_reshape(reshape_args, out);
        if (*incentives) return run_incentives(inc_args, out);
        if (*report) return run_report(report_args, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitConfig;
}

}  // namespace crowdval::cli
