#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftguard/detector.hpp"
#include "driftguard/epredictor.hpp"

namespace driftguard::sim {

using detector::AlarmLog;
using detector::DetectorConfig;
using epredictor::Observation;
using epredictor::ScoreFunction;

// Sampling recipe for one stream segment. Parameters a/b are overloaded per
// kind: Gaussian(mean=a, sd=b), Uniform(lo=a, hi=b), Constant(value=a),
// MeanDrift(start_mean=a, sd=b, mean shifts by `drift` every step). MeanDrift
// deliberately breaks identical distribution, so it is only admitted as a
// post-change segment.
struct DistributionSpec {
    enum class Kind { Gaussian, Uniform, Constant, MeanDrift };

    Kind kind = Kind::Gaussian;
    double a = 0.0;
    double b = 1.0;
    double drift = 0.0;

    static DistributionSpec gaussian(double mean, double sd);
    static DistributionSpec uniform(double lo, double hi);
    static DistributionSpec constant(double value);
    static DistributionSpec mean_drift(double start_mean, double sd, double per_step);

    void validate() const;

    // Round-trips with parse: "gaussian:M:SD", "uniform:LO:HI",
    // "constant:V", "drift:START:SD:PERSTEP".
    std::string describe() const;
    static DistributionSpec parse(const std::string& text);
};

// One simulated stream: IID draws from pre_change, switching to post_change
// at index change_at (1-based; the observation at change_at is the first
// post-change one). No change-point means the whole stream is the IID null.
struct ScenarioSpec {
    DistributionSpec pre_change = DistributionSpec::gaussian(0.0, 1.0);
    std::optional<std::int64_t> change_at;
    std::optional<DistributionSpec> post_change;
    std::int64_t n = 0;
    std::size_t dim = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

// Deterministic in spec.seed: equal specs produce equal streams.
std::vector<Observation> generate_stream(const ScenarioSpec& spec);

struct TrialReport {
    AlarmLog alarm_log;
    double frequency = 0.0;
    // sigma_j - change_at for the first alarm at or after the change-point;
    // absent when the scenario has no change or no such alarm occurred.
    std::optional<std::int64_t> first_alarm_delay;
};

TrialReport run_trial(const ScenarioSpec& spec, const ScoreFunction& score,
                      const DetectorConfig& config);

// Empirical check of the false-alarm frequency bound on the IID null:
// exceed_fraction is the fraction of trials whose alarm frequency A_n/n
// exceeded 1/c + epsilon.
struct ValidityReport {
    std::string procedure;
    std::int64_t n = 0;
    std::int64_t trials = 0;
    double c = 0.0;
    double epsilon = 0.0;
    double bound = 0.0;  // 1/c
    double exceed_fraction = 0.0;
    double mean_frequency = 0.0;
    double max_frequency = 0.0;
    std::vector<double> per_trial_frequency;

    std::string to_json() const;
    void write_frequencies_csv(std::ostream& out) const;
};

// Runs `trials` seeded detector runs on the null scenario (spec must have no
// change-point). Trial seeds derive from (spec.seed, trial index), so results
// do not depend on thread count; threads = 0 picks the hardware default.
ValidityReport validity_experiment(const ScenarioSpec& spec, const ScoreFunction& score,
                                   const DetectorConfig& config, std::int64_t trials,
                                   double epsilon, unsigned threads = 0);

// Same experiment evaluated for several detector configurations at once,
// sharing each trial's e-value stream (the expensive part) across configs.
std::vector<ValidityReport> validity_experiment_multi(const ScenarioSpec& spec,
                                                      const ScoreFunction& score,
                                                      std::span<const DetectorConfig> configs,
                                                      std::int64_t trials, double epsilon,
                                                      unsigned threads = 0);

// Exploratory detection-delay summary; reported, never used as a gate.
struct DelaySummary {
    std::int64_t trials = 0;
    std::int64_t alarmed_trials = 0;  // trials with an alarm at/after the change
    std::int64_t change_at = 0;
    double alarm_fraction = 0.0;
    std::vector<std::int64_t> delays;  // sorted ascending, one per alarmed trial
    std::optional<double> median_delay;
    std::optional<double> p90_delay;
    std::optional<std::int64_t> min_delay;
    std::optional<std::int64_t> max_delay;

    std::string to_json() const;  // carries "exploratory": true
};

DelaySummary delay_experiment(const ScenarioSpec& spec, const ScoreFunction& score,
                              const DetectorConfig& config, std::int64_t trials,
                              unsigned threads = 0);

}  // namespace driftguard::sim
