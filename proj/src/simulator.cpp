#include "crowdval/simulator.hpp"

#include "crowdval/error.hpp"
#include "crowdval/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace crowdval::sim {

std::string_view to_string(ScenarioCase c) noexcept { return c == ScenarioCase::ObscureTruth ? "A" : "B"; }

namespace {

ScenarioCase parse_case(const std::string& s) {
    if (s == "A" || s == "a" || s == "obscure") return ScenarioCase::ObscureTruth;
    if (s == "B" || s == "b" || s == "hidden") return ScenarioCase::HiddenTruth;
    throw ConfigError("unknown scenario case '" + s + "' (expected A or B)");
}

GaussianParam parse_gaussian_param(const std::string& s) {
    if (s == "variance") return GaussianParam::Variance;
    if (s == "stddev") return GaussianParam::StdDev;
    throw ConfigError("gaussian_param must be 'variance' or 'stddev'");
}

double gaussian_sd(double param, GaussianParam kind) {
    if (param <= 0.0) return 0.0;
    return kind == GaussianParam::Variance ? std::sqrt(param) : param;
}

double normal(Rng& rng, double mean, double sd) {
    if (sd <= 0.0) return mean;
    return std::normal_distribution<double>{mean, sd}(rng);
}

// Lower edge of the grid bin holding `x` on a grid anchored at `origin`.
double bin_floor(double x, double origin, double width) {
    return origin + std::floor((x - origin) / width) * width;
}

struct Interval {
    double lo;
    double hi;
};

// [lo, hi) minus the given exclusion intervals.
std::vector<Interval> allowed_intervals(double lo, double hi, std::vector<Interval> excluded) {
    std::sort(excluded.begin(), excluded.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    double cursor = lo;
    for (const auto& ex : excluded) {
        if (ex.hi <= cursor) continue;
        if (ex.lo >= hi) break;
        if (ex.lo > cursor) out.push_back({cursor, std::min(ex.lo, hi)});
        cursor = std::max(cursor, ex.hi);
        if (cursor >= hi) break;
    }
    if (cursor < hi) out.push_back({cursor, hi});
    return out;
}

}  // namespace

void ScenarioSpec::validate() const {
    if (contributors == 0) throw ConfigError("scenario needs at least one contributor");
    if (contributors >= population) throw ConfigError("contributors |C| must be smaller than the population |U|");
    const auto& d = dataset;
    if (!(d.range_high > d.range_low)) throw ConfigError("dataset range must be nonempty");
    if (!(d.bin_width > 0.0)) throw ConfigError("dataset bin width must be positive");
    if (!(d.peak_spread >= 0.0) || !(d.quiet_radius >= 0.0)) throw ConfigError("peak spread and quiet radius must be nonnegative");
    double mass = 0.0;
    for (const auto& p : d.peaks) {
        if (!(p.mass >= 0.0)) throw ConfigError("peak masses must be nonnegative");
        if (p.center < d.range_low || p.center + d.peak_spread > d.range_high)
            throw ConfigError("peak at " + io::format_number(p.center) + " lies outside the dataset range");
        mass += p.mass;
    }
    if (scenario_case == ScenarioCase::HiddenTruth) {
        if (!(d.hidden_fraction > 0.0)) throw ConfigError("Case B needs a positive hidden fraction");
        if (truth < d.range_low || truth + d.peak_spread > d.range_high)
            throw ConfigError("hidden truth lies outside the dataset range");
        mass += d.hidden_fraction;
    }
    if (mass > 1.0 + 1e-12) throw ConfigError("peak masses exceed 1");
    const auto& b = behavior;
    if (!(b.acceptance_low >= 0.0 && b.acceptance_high <= 1.0 && b.acceptance_low <= b.acceptance_high))
        throw ConfigError("acceptance range must lie within [0, 1]");
    if (!(b.truth_spread >= 0.0) || !(b.threshold_scale >= 0.0)) throw ConfigError("behavior spreads must be nonnegative");
    if (!(b.mean_delay > 0.0)) throw ConfigError("mean response delay must be positive");
    if (!(b.neutral_share >= 0.0 && b.neutral_share <= 1.0)) throw ConfigError("neutral share must lie in [0, 1]");
    const auto& pa = b.privacy;
    if (pa.more < 0.0 || pa.less < 0.0 || pa.stop < 0.0 || pa.more + pa.less + pa.stop > 1.0)
        throw ConfigError("privacy action probabilities must be nonnegative and sum to at most 1");
    if (!(signup_horizon >= 0.0)) throw ConfigError("signup horizon must be nonnegative");
    if (!(initial_reputation >= 0.0)) throw ConfigError("initial reputation must be nonnegative");
    registry.validate();
    if (campaign.target > 0) campaign.validate();
    payment_function_by_name(payment);
}

ScenarioSpec default_spec(ScenarioCase c) {
    ScenarioSpec spec;
    spec.scenario_case = c;
    spec.truth = c == ScenarioCase::ObscureTruth ? 45.0 : 20.0;
    return spec;
}

nlohmann::json spec_to_json(const ScenarioSpec& s) {
    auto peaks = nlohmann::json::array();
    for (const auto& p : s.dataset.peaks) peaks.push_back({{"center", p.center}, {"mass", p.mass}});
    return {
        {"population", s.population},
        {"contributors", s.contributors},
        {"case", std::string(to_string(s.scenario_case))},
        {"truth", s.truth},
        {"dataset",
         {{"range_low", s.dataset.range_low},
          {"range_high", s.dataset.range_high},
          {"bin_width", s.dataset.bin_width},
          {"peaks", peaks},
          {"peak_spread", s.dataset.peak_spread},
          {"quiet_radius", s.dataset.quiet_radius},
          {"hidden_fraction", s.dataset.hidden_fraction}}},
        {"behavior",
         {{"acceptance_low", s.behavior.acceptance_low},
          {"acceptance_high", s.behavior.acceptance_high},
          {"truth_spread", s.behavior.truth_spread},
          {"threshold_scale", s.behavior.threshold_scale},
          {"gaussian_param", s.behavior.gaussian_param == GaussianParam::Variance ? "variance" : "stddev"},
          {"mean_delay", s.behavior.mean_delay},
          {"neutral_share", s.behavior.neutral_share},
          {"privacy",
           {{"more", s.behavior.privacy.more}, {"less", s.behavior.privacy.less}, {"stop", s.behavior.privacy.stop}}}}},
        {"registry",
         {{"epsilon", s.registry.epsilon},
          {"elasticity_step", s.registry.elasticity_step},
          {"elasticity_max", s.registry.elasticity_max},
          {"elasticity_initial", s.registry.elasticity_initial}}},
        {"signup_horizon", s.signup_horizon},
        {"initial_reputation", s.initial_reputation},
        {"campaign", campaign_to_json(s.campaign)},
        {"budget_mode", s.budget_mode},
        {"payment", s.payment},
        {"seed", s.seed},
    };
}

ScenarioSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("scenario spec must be a JSON object");
    try {
        const auto scenario_case = parse_case(j.value("case", std::string("A")));
        ScenarioSpec s = default_spec(scenario_case);
        s.population = j.value("population", s.population);
        s.contributors = j.value("contributors", s.contributors);
        s.truth = j.value("truth", s.truth);
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            s.dataset.range_low = d.value("range_low", s.dataset.range_low);
            s.dataset.range_high = d.value("range_high", s.dataset.range_high);
            s.dataset.bin_width = d.value("bin_width", s.dataset.bin_width);
            if (d.contains("peaks")) {
                s.dataset.peaks.clear();
                for (const auto& p : d.at("peaks"))
                    s.dataset.peaks.push_back({p.at("center").get<double>(), p.at("mass").get<double>()});
            }
            s.dataset.peak_spread = d.value("peak_spread", s.dataset.peak_spread);
            s.dataset.quiet_radius = d.value("quiet_radius", s.dataset.quiet_radius);
            s.dataset.hidden_fraction = d.value("hidden_fraction", s.dataset.hidden_fraction);
        }
        if (j.contains("behavior")) {
            const auto& b = j.at("behavior");
            s.behavior.acceptance_low = b.value("acceptance_low", s.behavior.acceptance_low);
            s.behavior.acceptance_high = b.value("acceptance_high", s.behavior.acceptance_high);
            s.behavior.truth_spread = b.value("truth_spread", s.behavior.truth_spread);
            s.behavior.threshold_scale = b.value("threshold_scale", s.behavior.threshold_scale);
            if (b.contains("gaussian_param"))
                s.behavior.gaussian_param = parse_gaussian_param(b.at("gaussian_param").get<std::string>());
            s.behavior.mean_delay = b.value("mean_delay", s.behavior.mean_delay);
            s.behavior.neutral_share = b.value("neutral_share", s.behavior.neutral_share);
            if (b.contains("privacy")) {
                const auto& p = b.at("privacy");
                s.behavior.privacy.more = p.value("more", 0.0);
                s.behavior.privacy.less = p.value("less", 0.0);
                s.behavior.privacy.stop = p.value("stop", 0.0);
            }
        }
        if (j.contains("registry")) {
            const auto& r = j.at("registry");
            s.registry.epsilon = r.value("epsilon", s.registry.epsilon);
            s.registry.elasticity_step = r.value("elasticity_step", s.registry.elasticity_step);
            s.registry.elasticity_max = r.value("elasticity_max", s.registry.elasticity_max);
            s.registry.elasticity_initial = r.value("elasticity_initial", s.registry.elasticity_initial);
        }
        s.signup_horizon = j.value("signup_horizon", s.signup_horizon);
        s.initial_reputation = j.value("initial_reputation", s.initial_reputation);
        if (j.contains("campaign")) s.campaign = campaign_from_json(j.at("campaign"));
        s.budget_mode = j.value("budget_mode", s.budget_mode);
        s.payment = j.value("payment", s.payment);
        s.seed = j.value("seed", s.seed);
        s.campaign.seed = s.seed;
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed scenario spec: ") + e.what());
    }
}

WorkerBehavior draw_behavior(const BehaviorParams& params, double truth, Rng& rng) {
    WorkerBehavior w;
    w.acceptance = std::uniform_real_distribution<double>{params.acceptance_low, params.acceptance_high}(rng);
    w.private_truth = normal(rng, truth, gaussian_sd(params.truth_spread, params.gaussian_param));
    const double th_param = params.threshold_scale * w.private_truth;
    w.threshold = std::max(0.0, normal(rng, th_param, gaussian_sd(th_param, params.gaussian_param)));
    return w;
}

std::vector<Reading> generate_dataset(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    const auto& d = spec.dataset;
    const std::size_t total = spec.contributors;
    const bool hidden = spec.scenario_case == ScenarioCase::HiddenTruth;

    std::vector<double> values;
    values.reserve(total);
    auto place_cluster = [&](double center, double mass) {
        const auto count = static_cast<std::size_t>(std::llround(mass * static_cast<double>(total)));
        for (std::size_t i = 0; i < count && values.size() < total; ++i)
            values.push_back(center + d.peak_spread * uniform01(rng));
    };
    for (const auto& p : d.peaks) place_cluster(p.center, p.mass);
    if (hidden) place_cluster(spec.truth, d.hidden_fraction);

    std::vector<Interval> excluded;
    for (const auto& p : d.peaks)
        if (d.quiet_radius > 0.0) excluded.push_back({p.center - d.quiet_radius, p.center + d.quiet_radius});
    if (hidden) {
        const double lo = bin_floor(spec.truth, d.range_low, d.bin_width);
        excluded.push_back({lo, lo + d.bin_width});
    }
    const auto allowed = allowed_intervals(d.range_low, d.range_high, excluded);
    double allowed_length = 0.0;
    for (const auto& a : allowed) allowed_length += a.hi - a.lo;

    if (values.size() < total) {
        if (allowed_length <= 0.0) throw ConfigError("noise floor has no room outside the quiet zones");
        // The range floor is always observed so bins align to range_low.
        values.push_back(d.range_low);
        while (values.size() < total) {
            double x = uniform01(rng) * allowed_length;
            for (const auto& a : allowed) {
                const double len = a.hi - a.lo;
                if (x < len) {
                    values.push_back(a.lo + x);
                    break;
                }
                x -= len;
            }
        }
    }

    std::vector<Reading> readings;
    readings.reserve(total);
    char id[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(id, sizeof id, "w%06zu", i);
        readings.push_back({id, values[i]});
    }

    if (hidden) {
        // A hidden truth that out-weighs a dominant false peak is mislabeled.
        const auto profile = build_profile(readings, d.bin_width);
        const auto truth_bin = profile.find_bin(spec.truth);
        if (!truth_bin) throw ConfigError("Case B dataset has no readings at the hidden truth");
        for (const auto& p : d.peaks) {
            const auto peak_bin = profile.find_bin(p.center);
            if (peak_bin && *peak_bin != *truth_bin &&
                !(profile.bins[*truth_bin].mass < profile.bins[*peak_bin].mass))
                throw ConfigError("Case B hidden truth is not smaller than the false peak at " +
                                  io::format_number(p.center));
        }
    }
    return readings;
}

Response simulate_response(const WorkerBehavior& behavior, const RatingTask& task, double now, Rng& rng,
                           const BehaviorParams& params) {
    std::exponential_distribution<double> delay{1.0 / params.mean_delay};
    const int full = task.options ? task.options->max_score() : 1;

    Response response;
    if (uniform01(rng) < behavior.acceptance) {
        const bool agrees = std::abs(task.value - behavior.private_truth) <= behavior.threshold;
        response = Response::effective(agrees ? full : -full, now + delay(rng));
    } else if (uniform01(rng) < params.neutral_share) {
        response = Response::neutral(now + delay(rng));
    } else {
        response = Response::silent();
    }

    const auto& pa = params.privacy;
    if (pa.more + pa.less + pa.stop > 0.0 && response.kind != Response::Kind::Silent) {
        const double u = uniform01(rng);
        if (u < pa.more) response.privacy_action = PrivacyAction::More;
        else if (u < pa.more + pa.less) response.privacy_action = PrivacyAction::Less;
        else if (u < pa.more + pa.less + pa.stop) response.privacy_action = PrivacyAction::Stop;
    }
    return response;
}

Population generate_population(const ScenarioSpec& spec, Rng& rng) {
    Population pop{WorkerRegistry(spec.registry), {}};
    pop.behavior.reserve(spec.population);
    char id[32];
    for (std::size_t i = 0; i < spec.population; ++i) {
        std::snprintf(id, sizeof id, "w%06zu", i);
        const double signup = -spec.signup_horizon * uniform01(rng);
        const auto idx = pop.registry.register_worker(id, signup, i < spec.contributors);
        if (spec.initial_reputation > 0.0) pop.registry.set_reputation(idx, spec.initial_reputation);
        pop.behavior.push_back(draw_behavior(spec.behavior, spec.truth, rng));
    }
    return pop;
}

namespace {

BinSummary summarize_bin(const ReshapedProfile& reshaped, std::size_t i) {
    const auto& b = reshaped.bins[i];
    return {b.representative, b.interim, b.posterior, b.posterior / b.interim};
}

}  // namespace

std::string ScenarioReport::status() const {
    if (!campaign) return "SKIPPED";
    return std::string(to_string(campaign->status));
}

nlohmann::json ScenarioReport::summary() const {
    auto bin_json = [](const BinSummary& b) {
        return nlohmann::json{{"v", b.value}, {"p_interim", b.interim}, {"p_posterior", b.posterior}, {"posterior_ratio", b.ratio}};
    };
    nlohmann::json s;
    s["case"] = std::string(to_string(spec.scenario_case));
    s["strategy"] = std::string(to_string(spec.campaign.strategy));
    s["seed"] = spec.seed;
    s["truth"] = spec.truth;
    s["status"] = status();
    s["early_exit"] = campaign ? campaign->early_exit : false;
    s["target"] = spec.campaign.target;
    s["ratings_collected"] = campaign ? campaign->ratings.size() : 0;
    s["offers_sent"] = campaign ? campaign->approached.size() : 0;
    s["cycles_run"] = campaign ? campaign->cycles.size() : 0;
    s["bins"] = profile.size();
    if (truth_bin) {
        s["truth_bin"] = bin_json(*truth_bin);
        s["posterior_ratio_at_truth"] = truth_bin->ratio;
        s["posterior_increment_at_truth"] = truth_bin->ratio - 1.0;
    } else {
        s["truth_bin"] = nullptr;
        s["posterior_ratio_at_truth"] = nullptr;
        s["posterior_increment_at_truth"] = nullptr;
    }
    auto peaks = nlohmann::json::array();
    for (const auto& [center, b] : false_peaks) {
        auto jb = bin_json(b);
        jb["center"] = center;
        peaks.push_back(std::move(jb));
    }
    s["false_peaks"] = std::move(peaks);
    return s;
}

ScenarioReport run_scenario(const ScenarioSpec& input) {
    ScenarioSpec spec = input;
    spec.campaign.seed = spec.seed;
    spec.validate();

    auto rng = make_rng(spec.seed);
    auto population = generate_population(spec, rng);
    auto readings = generate_dataset(spec, rng);
    auto profile = build_profile(readings, spec.dataset.bin_width);

    ScenarioReport report;
    report.spec = spec;

    if (spec.campaign.target > 0) {
        const auto& behavior = population.behavior;
        const auto& params = spec.behavior;
        Responder responder = [&behavior, &params](const RatingTask& task, const Worker&, double now, Rng& r) {
            return simulate_response(behavior.at(task.rater), task, now, r, params);
        };
        VirtualClock clock(0.0);
        report.campaign = run_campaign(spec.campaign, population.registry, profile, responder, clock, rng);
    }

    const std::vector<Rating> no_ratings;
    const auto& ratings = report.campaign ? report.campaign->ratings : no_ratings;
    const auto tally = tally_ratings(ratings, spec.campaign.scale, profile.size());
    report.reshaped = reshape(profile, tally, ratings.size(), spec.campaign.eta);

    // Incentives, applied atomically at campaign end.
    report.incentives.budget_mode = spec.budget_mode;
    report.incentives.raters =
        rater_reputation_updates(population.registry, ratings, report.reshaped, spec.campaign.scale.max_score());
    commit_reputations(population.registry, report.incentives.raters);
    const auto bins = assign_bins(profile, readings);
    std::vector<Contribution> contributions;
    contributions.reserve(readings.size());
    for (std::size_t i = 0; i < readings.size(); ++i) contributions.push_back({readings[i].contributor_id, bins[i], 1.0});
    const auto interim = report.reshaped.interim();
    const auto posterior = report.reshaped.posterior();
    report.incentives.contributors = revise_payments(payment_function_by_name(spec.payment), contributions, interim,
                                                     posterior, spec.budget_mode);

    if (auto t = profile.find_bin(spec.truth)) report.truth_bin = summarize_bin(report.reshaped, *t);
    for (const auto& p : spec.dataset.peaks) {
        auto b = profile.find_bin(p.center);
        if (!b) continue;
        if (report.truth_bin && profile.find_bin(spec.truth) == b) continue;
        report.false_peaks.emplace_back(p.center, summarize_bin(report.reshaped, *b));
    }

    report.readings = std::move(readings);
    report.profile = std::move(profile);
    return report;
}

std::vector<ScenarioReport> compare_strategies(const ScenarioSpec& spec) {
    std::vector<ScenarioReport> out;
    for (auto strategy : kAllStrategies) {
        auto s = spec;
        s.campaign.strategy = strategy;
        out.push_back(run_scenario(s));
    }
    return out;
}

void write_report(const ScenarioReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_file(dir / "spec.json", spec_to_json(report.spec).dump(2) + "\n");
    io::write_file(dir / "readings.csv", readings_to_csv(report.readings));
    io::write_file(dir / "profile.json", profile_to_json(report.profile).dump(2) + "\n");
    io::write_file(dir / "profile.csv", profile_to_csv(report.profile));
    io::write_file(dir / "reshaped.csv", reshaped_to_csv(report.reshaped));
    io::write_file(dir / "reshaped.json", reshaped_to_json(report.reshaped).dump(2) + "\n");
    const std::vector<CycleStats> no_cycles;
    const std::vector<Rating> no_ratings;
    io::write_file(dir / "cycles.csv", cycles_to_csv(report.campaign ? report.campaign->cycles : no_cycles));
    io::write_file(dir / "ratings.csv", ratings_to_csv(report.campaign ? report.campaign->ratings : no_ratings));
    io::write_file(dir / "raters.csv", raters_to_csv(report.incentives.raters));
    io::write_file(dir / "contributors.csv", contributors_to_csv(report.incentives.contributors));
    io::write_file(dir / "summary.json", report.summary().dump(2) + "\n");
}

std::string comparison_to_csv(const std::vector<ScenarioReport>& reports) {
    std::string out = "strategy,bin,v,p_interim,p_posterior,ratio\n";
    for (const auto& r : reports) {
        const auto name = std::string(to_string(r.spec.campaign.strategy));
        for (std::size_t i = 0; i < r.reshaped.bins.size(); ++i) {
            const auto& b = r.reshaped.bins[i];
            out += name + "," + std::to_string(i) + "," + io::format_number(b.representative) + "," +
                   io::format_number(b.interim) + "," + io::format_number(b.posterior) + "," +
                   io::format_number(b.posterior / b.interim) + "\n";
        }
    }
    return out;
}

}  // namespace crowdval::sim
