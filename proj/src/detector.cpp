#include "driftguard/detector.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "driftguard/numeric.hpp"

namespace driftguard::detector {

void DetectorConfig::validate() const {
    if (!std::isfinite(c) || c <= 1.0) {
        throw std::invalid_argument("detector threshold must be finite and exceed 1");
    }
    if (!std::isfinite(e_floor) || e_floor < 0.0) {
        throw std::invalid_argument("e-value floor must be finite and nonnegative");
    }
}

namespace {

double checked_e(EValue e, const DetectorConfig& config) {
    if (!std::isfinite(e) || e < 0.0) {
        throw std::domain_error("e-value must be finite and nonnegative");
    }
    return e < config.e_floor ? config.e_floor : e;
}

}  // namespace

StepResult rs_step(DetectorState state, EValue e, const DetectorConfig& config) {
    config.validate();
    if (config.procedure != Procedure::RobertsShiryaev) {
        throw std::invalid_argument("rs_step requires a Roberts-Shiryaev config");
    }
    const double v = checked_e(e, config);

    state.product *= v;
    NeumaierSum acc{state.sum, state.sum_comp};
    acc.add(state.product);
    state.sum = acc.sum;
    state.sum_comp = acc.comp;
    ++state.steps_in_run;

    const bool alarm = acc.value() >= config.c;
    if (alarm) state = DetectorState{};
    return {state, alarm};
}

StepResult musuc_step(DetectorState state, EValue e, const DetectorConfig& config) {
    config.validate();
    if (config.procedure != Procedure::Musuc) {
        throw std::invalid_argument("musuc_step requires a MUSUC config");
    }
    const double v = checked_e(e, config);

    state.product *= v;
    ++state.steps_in_run;

    const bool alarm = state.product >= config.c;
    if (alarm) state = DetectorState{};
    return {state, alarm};
}

void AlarmLog::to_jsonl(std::ostream& out) const {
    for (std::size_t i = 0; i < alarm_times.size(); ++i) {
        const nlohmann::json rec{{"k", i + 1}, {"sigma", alarm_times[i]}};
        out << rec.dump() << '\n';
    }
    const nlohmann::json summary{
        {"n", horizon}, {"A_n", alarm_count()}, {"freq", alarm_frequency(*this)}};
    out << summary.dump() << '\n';
}

bool operator==(const AlarmLog& a, const AlarmLog& b) {
    return a.horizon == b.horizon && a.alarm_times == b.alarm_times;
}

double alarm_frequency(const AlarmLog& log) {
    if (log.horizon <= 0) return 0.0;
    return static_cast<double>(log.alarm_count()) / static_cast<double>(log.horizon);
}

Detector::Detector(DetectorConfig config) : config_(config) { config_.validate(); }

bool Detector::step(EValue e) {
    const StepResult r = config_.procedure == Procedure::RobertsShiryaev
                             ? rs_step(state_, e, config_)
                             : musuc_step(state_, e, config_);
    state_ = r.state;
    ++log_.horizon;
    if (r.alarm) log_.alarm_times.push_back(log_.horizon);
    return r.alarm;
}

AlarmLog run_detector(const ScoreFunction& score, std::span<const Observation> stream,
                      const DetectorConfig& config) {
    Detector det(config);
    epredictor::EValueStream evalues(score);
    for (const Observation& z : stream) det.step(evalues.push(z));
    return det.log();
}

}  // namespace driftguard::detector
