#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "driftguard/epredictor.hpp"
#include "driftguard/numeric.hpp"

namespace driftguard::detector {

using epredictor::EValue;
using epredictor::Observation;
using epredictor::ScoreFunction;

enum class Procedure {
    RobertsShiryaev,  // alarm when the within-run sum of running products reaches c
    Musuc,            // alarm when the within-run product reaches c
};

struct DetectorConfig {
    double c = 0.0;  // alarm threshold, must exceed 1
    Procedure procedure = Procedure::RobertsShiryaev;
    // Optional floor applied as e <- max(e, e_floor) before each step. Keeps
    // a run's product recoverable after near-zero e-values; 0 disables (the
    // default: zero e-values then pin the product at 0 for the rest of the
    // run, though an accumulated sum can still alarm).
    double e_floor = 0.0;

    void validate() const;
};

// Statistics of the current run (everything since the last alarm).
// `product` is P = e_{s+1} * ... * e_n for run start s; (sum, sum_comp) is a
// compensated accumulator for S = sum of the running products, used by
// Roberts-Shiryaev only (stays 0 under MUSUC). Both reset on alarm.
struct DetectorState {
    double product = 1.0;
    double sum = 0.0;
    double sum_comp = 0.0;
    std::int64_t steps_in_run = 0;

    double sum_value() const { return NeumaierSum{sum, sum_comp}.value(); }
};

struct StepResult {
    DetectorState state;
    bool alarm = false;
};

// One Roberts-Shiryaev transition: P <- P*e, S <- S + P, alarm iff S >= c.
// Alarmed state is reset (next step starts a fresh run).
StepResult rs_step(DetectorState state, EValue e, const DetectorConfig& config);

// One MUSUC transition: P <- P*e, alarm iff P >= c, reset on alarm.
StepResult musuc_step(DetectorState state, EValue e, const DetectorConfig& config);

// Realized alarm times (1-based, strictly increasing) over a processed
// stream of `horizon` observations.
struct AlarmLog {
    std::vector<std::int64_t> alarm_times;
    std::int64_t horizon = 0;

    std::int64_t alarm_count() const {
        return static_cast<std::int64_t>(alarm_times.size());
    }

    // One JSON record per alarm: {"k": index, "sigma": time}, then a summary
    // line {"n": horizon, "A_n": count, "freq": count/horizon}.
    void to_jsonl(std::ostream& out) const;
};

bool operator==(const AlarmLog& a, const AlarmLog& b);

// Alarms per observation, A_n / n; 0 for an empty horizon.
double alarm_frequency(const AlarmLog& log);

// Stateful wrapper feeding e-values through the configured step function and
// recording alarm times. Single-writer: one stream per instance.
class Detector {
public:
    explicit Detector(DetectorConfig config);

    // Feed the next e-value; true when this step raised an alarm.
    bool step(EValue e);

    const DetectorConfig& config() const { return config_; }
    const DetectorState& state() const { return state_; }
    const AlarmLog& log() const { return log_; }

private:
    DetectorConfig config_;
    DetectorState state_;
    AlarmLog log_;
};

// Full pipeline: observations -> online e-values -> alarms.
AlarmLog run_detector(const ScoreFunction& score, std::span<const Observation> stream,
                      const DetectorConfig& config);

}  // namespace driftguard::detector
