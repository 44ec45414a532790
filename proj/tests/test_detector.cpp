#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "driftguard/detector.hpp"
#include "driftguard/random.hpp"
#include "test_support.hpp"

using driftguard::Rng;
using driftguard::detector::AlarmLog;
using driftguard::detector::Detector;
using driftguard::detector::DetectorConfig;
using driftguard::detector::DetectorState;
using driftguard::detector::Procedure;
using driftguard::detector::StepResult;
using driftguard::detector::alarm_frequency;
using driftguard::detector::musuc_step;
using driftguard::detector::rs_step;
using driftguard::detector::run_detector;
namespace ts = driftguard::testsupport;

namespace {

DetectorConfig rs_config(double c, double e_floor = 0.0) {
    return DetectorConfig{.c = c, .procedure = Procedure::RobertsShiryaev, .e_floor = e_floor};
}

DetectorConfig musuc_config(double c, double e_floor = 0.0) {
    return DetectorConfig{.c = c, .procedure = Procedure::Musuc, .e_floor = e_floor};
}

std::vector<std::int64_t> alarms_of(const std::vector<double>& e, const DetectorConfig& cfg) {
    Detector d(cfg);
    for (double v : e) d.step(v);
    return d.log().alarm_times;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("sum-of-products rule on hand-checked sequences") {
    // A single large e-value alarms immediately.
    CHECK(alarms_of({3.0}, rs_config(2.0)) == std::vector<std::int64_t>{1});

    // Unit e-values accumulate one per step: threshold 3 fires every 3 steps.
    CHECK(alarms_of(std::vector<double>(9, 1.0), rs_config(3.0)) ==
          std::vector<std::int64_t>{3, 6, 9});

    // Geometric decay keeps the run sum below 1 forever.
    CHECK(alarms_of(std::vector<double>(200, 0.5), rs_config(2.0)).empty());
}

TEST_CASE("product rule on hand-checked sequences") {
    // Unit e-values never move the product.
    CHECK(alarms_of(std::vector<double>(100, 1.0), musuc_config(1.5)).empty());

    // Doubling reaches 4 in two steps, and the run restarts after each alarm.
    CHECK(alarms_of({2.0, 2.0, 2.0, 2.0}, musuc_config(4.0)) ==
          std::vector<std::int64_t>{2, 4});
}

TEST_CASE("single transitions expose product, sum, and run length") {
    DetectorConfig cfg = rs_config(10.0);
    StepResult r = rs_step(DetectorState{}, 2.0, cfg);
    CHECK(!r.alarm);
    CHECK(r.state.product == 2.0);
    CHECK(r.state.sum_value() == 2.0);
    CHECK(r.state.steps_in_run == 1);

    r = rs_step(r.state, 3.0, cfg);
    CHECK(r.state.product == 6.0);
    CHECK(r.state.sum_value() == 8.0);
    CHECK(r.state.steps_in_run == 2);
}

TEST_CASE("alarm resets the run state") {
    DetectorConfig cfg = rs_config(2.0);
    StepResult r = rs_step(DetectorState{}, 5.0, cfg);
    CHECK(r.alarm);
    CHECK(r.state.product == 1.0);
    CHECK(r.state.sum_value() == 0.0);
    CHECK(r.state.steps_in_run == 0);

    DetectorConfig mc = musuc_config(2.0);
    StepResult m = musuc_step(DetectorState{}, 5.0, mc);
    CHECK(m.alarm);
    CHECK(m.state.product == 1.0);
    CHECK(m.state.steps_in_run == 0);
}

TEST_CASE("a zero e-value pins the run product at zero") {
    DetectorConfig cfg = rs_config(2.0);
    DetectorState s;
    s = rs_step(s, 1.5, cfg).state;   // S = 1.5
    s = rs_step(s, 0.0, cfg).state;   // P = 0, S unchanged
    CHECK(s.product == 0.0);
    CHECK(s.sum_value() == 1.5);
    s = rs_step(s, 100.0, cfg).state;  // 0 * 100 = 0: the run cannot recover
    CHECK(s.product == 0.0);
    CHECK(s.sum_value() == 1.5);
}

TEST_CASE("the e-floor keeps runs recoverable after zero e-values") {
    DetectorConfig cfg = rs_config(10.0, 0.5);
    DetectorState s;
    s = rs_step(s, 0.0, cfg).state;  // floored to 0.5
    CHECK(s.product == 0.5);
    s = rs_step(s, 2.0, cfg).state;  // above the floor: used as-is
    CHECK(s.product == 1.0);
    CHECK(s.sum_value() == 1.5);
}

TEST_CASE("configuration and input validation") {
    CHECK_THROWS_AS(rs_config(1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(rs_config(0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(rs_config(std::nan("")).validate(), std::invalid_argument);
    CHECK_THROWS_AS(rs_config(5.0, -1.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(rs_config(1.0000001).validate());

    DetectorConfig cfg = rs_config(5.0);
    CHECK_THROWS_AS(rs_step(DetectorState{}, -1.0, cfg), std::domain_error);
    CHECK_THROWS_AS(rs_step(DetectorState{}, std::nan(""), cfg), std::domain_error);
    CHECK_THROWS_AS(rs_step(DetectorState{}, 1.0, musuc_config(5.0)), std::invalid_argument);
    CHECK_THROWS_AS(musuc_step(DetectorState{}, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("alarms restart the detector exactly") {
    Rng rng(808);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 20 + ts::random_index(rng, 180);
        std::vector<double> e = ts::random_evalues_with_zeros(rng, n, 0.05);
        const double c = ts::random_threshold(rng);
        const DetectorConfig cfg = (rep % 2 == 0) ? rs_config(c) : musuc_config(c);

        std::vector<std::int64_t> full = alarms_of(e, cfg);
        if (full.empty()) continue;

        // Alarms after the first one equal the alarms of a fresh detector
        // started on the remaining suffix, shifted by the alarm time.
        const auto sigma1 = full.front();
        std::vector<double> suffix(e.begin() + sigma1, e.end());
        std::vector<std::int64_t> restarted = alarms_of(suffix, cfg);
        REQUIRE(restarted.size() == full.size() - 1);
        for (std::size_t j = 0; j < restarted.size(); ++j) {
            CHECK(full[j + 1] == restarted[j] + sigma1);
        }
    }
}

TEST_CASE("the first alarm comes later under a higher threshold") {
    Rng rng(313);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 20 + ts::random_index(rng, 180);
        std::vector<double> e = ts::random_positive_evalues(rng, n);
        const double c1 = ts::random_threshold(rng);
        const double c2 = c1 + rng.uniform(0.5, 10.0);

        for (bool rs : {true, false}) {
            auto lo = alarms_of(e, rs ? rs_config(c1) : musuc_config(c1));
            auto hi = alarms_of(e, rs ? rs_config(c2) : musuc_config(c2));
            if (!hi.empty()) {
                REQUIRE(!lo.empty());
                CHECK(lo.front() <= hi.front());
            }
        }
    }
}

TEST_CASE("alarm frequency is alarms per observation") {
    AlarmLog log{.alarm_times = {5, 10, 15, 20}, .horizon = 20};
    CHECK(alarm_frequency(log) == 0.2);
    CHECK(alarm_frequency(AlarmLog{.alarm_times = {}, .horizon = 100}) == 0.0);
    CHECK(alarm_frequency(AlarmLog{}) == 0.0);
}

TEST_CASE("alarm logs serialize to one JSON record per alarm plus a summary") {
    AlarmLog log{.alarm_times = {5, 10}, .horizon = 20};
    std::ostringstream out;
    log.to_jsonl(out);
    CHECK(out.str() ==
          "{\"k\":1,\"sigma\":5}\n"
          "{\"k\":2,\"sigma\":10}\n"
          "{\"A_n\":2,\"freq\":0.1,\"n\":20}\n");
}

TEST_CASE("full pipeline alarms every c steps under the uninformative score") {
    driftguard::epredictor::ConstantScore cs;
    Rng rng(6);
    std::vector<driftguard::epredictor::Observation> stream = ts::random_batch(rng, 20, 1);

    AlarmLog rs_log = run_detector(cs, stream, rs_config(5.0));
    CHECK(rs_log.alarm_times == std::vector<std::int64_t>{5, 10, 15, 20});
    CHECK(rs_log.horizon == 20);

    AlarmLog musuc_log = run_detector(cs, stream, musuc_config(5.0));
    CHECK(musuc_log.alarm_times.empty());
    CHECK(musuc_log.horizon == 20);
}

TEST_CASE("full pipeline equals the hand-wired stream-plus-detector loop") {
    Rng rng(121);
    driftguard::epredictor::KnnScore nn(2);
    std::vector<driftguard::epredictor::Observation> stream = ts::random_batch(rng, 120, 2, 0.1);
    const DetectorConfig cfg = rs_config(3.0);

    AlarmLog pipeline = run_detector(nn, stream, cfg);

    Detector d(cfg);
    for (double e : driftguard::epredictor::stream_e_values(nn, stream)) d.step(e);
    CHECK(pipeline == d.log());
}

}  // TEST_SUITE
