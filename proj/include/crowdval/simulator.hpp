#pragma once

// Synthetic traffic-speed world: worker population, Case A / Case B
// crowd-sensed datasets, the rater response model, and the end-to-end
// scenario pipeline (profile -> campaign -> reshape -> incentives).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdval/incentives.hpp"
#include "crowdval/pacap.hpp"
#include "crowdval/profiling.hpp"
#include "crowdval/random.hpp"
#include "crowdval/reshaping.hpp"
#include "crowdval/worker_registry.hpp"

namespace crowdval::sim {

enum class ScenarioCase { ObscureTruth, HiddenTruth };  // Case A, Case B

// How the second argument of N(mean, x) in the behavior model is read.
enum class GaussianParam { Variance, StdDev };

struct Peak {
    double center = 0.0;
    double mass = 0.0;
};

struct DatasetShape {
    double range_low = 10.0;
    double range_high = 95.0;
    double bin_width = 5.0;
    std::vector<Peak> peaks{{45.0, 0.15}, {72.0, 0.135}};
    double peak_spread = 1.0;     // peak readings are center + U(0, spread)
    double quiet_radius = 10.0;   // no noise within this distance of a peak center
    double hidden_fraction = 0.03;  // Case B share of readings at the truth
};

struct PrivacyActionRates {
    double more = 0.0;
    double less = 0.0;
    double stop = 0.0;
};

struct BehaviorParams {
    double acceptance_low = 0.0;     // a_j ~ U(low, high)
    double acceptance_high = 1.0;
    double truth_spread = 5.0;       // nu_j ~ N(nu*, truth_spread)
    double threshold_scale = 0.1;    // TH_j ~ N(s nu_j, s nu_j), clamped at 0
    GaussianParam gaussian_param = GaussianParam::Variance;
    double mean_delay = 15.0;        // minutes
    double neutral_share = 0.5;      // of non-accepted offers, fraction answered "neutral"
    PrivacyActionRates privacy;
};

// Per-worker draw of the behavior model.
struct WorkerBehavior {
    double acceptance = 0.0;
    double private_truth = 0.0;
    double threshold = 0.0;
};

struct ScenarioSpec {
    std::size_t population = 50000;
    std::size_t contributors = 1000;
    ScenarioCase scenario_case = ScenarioCase::ObscureTruth;
    double truth = 45.0;
    DatasetShape dataset;
    BehaviorParams behavior;
    RegistryParams registry;
    double signup_horizon = 7.0 * 24.0 * 60.0;  // signups spread over the prior week
    double initial_reputation = 0.0;
    CampaignConfig campaign;
    bool budget_mode = false;
    std::string payment = "linear";
    std::uint64_t seed = 0;

    void validate() const;
};

// Case defaults: Case A truth 45 mph, Case B truth 20 mph.
ScenarioSpec default_spec(ScenarioCase c);

nlohmann::json spec_to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const nlohmann::json& j);

std::string_view to_string(ScenarioCase c) noexcept;

WorkerBehavior draw_behavior(const BehaviorParams& params, double truth, Rng& rng);

// |C| readings with the configured peaks, hidden-truth share and noise floor.
std::vector<Reading> generate_dataset(const ScenarioSpec& spec, Rng& rng);

Response simulate_response(const WorkerBehavior& behavior, const RatingTask& task, double now, Rng& rng,
                           const BehaviorParams& params);

struct Population {
    WorkerRegistry registry;
    std::vector<WorkerBehavior> behavior;  // indexed by WorkerIndex
};

Population generate_population(const ScenarioSpec& spec, Rng& rng);

struct BinSummary {
    double value = 0.0;
    double interim = 0.0;
    double posterior = 0.0;
    double ratio = 1.0;  // posterior / interim
};

struct ScenarioReport {
    ScenarioSpec spec;
    std::vector<Reading> readings;
    Profile profile;
    std::optional<CampaignResult> campaign;  // empty when m = 0
    ReshapedProfile reshaped;
    IncentiveReport incentives;
    std::optional<BinSummary> truth_bin;
    std::vector<std::pair<double, BinSummary>> false_peaks;  // (peak center, bin)

    bool failed() const noexcept { return campaign && campaign->status == CampaignStatus::Fail; }
    std::string status() const;
    nlohmann::json summary() const;
};

// Deterministic per spec.seed; every stochastic draw comes from one stream.
ScenarioReport run_scenario(const ScenarioSpec& spec);

// Runs all four strategies on the same spec and seed (same population and
// dataset, different campaigns).
std::vector<ScenarioReport> compare_strategies(const ScenarioSpec& spec);

// spec.json, readings.csv, profile.{json,csv}, reshaped.{json,csv},
// cycles.csv, ratings.csv, raters.csv, contributors.csv, summary.json.
void write_report(const ScenarioReport& report, const std::filesystem::path& dir);

// Long-format per-strategy table: strategy,bin,v,p_interim,p_posterior,ratio.
std::string comparison_to_csv(const std::vector<ScenarioReport>& reports);

}  // namespace crowdval::sim
