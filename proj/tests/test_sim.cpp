#include <doctest.h>

#include <json.hpp>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "driftguard/sim.hpp"
#include "test_support.hpp"

using driftguard::detector::DetectorConfig;
using driftguard::detector::Procedure;
using driftguard::epredictor::ConstantScore;
using driftguard::epredictor::KnnScore;
using driftguard::epredictor::Observation;
using driftguard::sim::DelaySummary;
using driftguard::sim::DistributionSpec;
using driftguard::sim::ScenarioSpec;
using driftguard::sim::TrialReport;
using driftguard::sim::ValidityReport;
using driftguard::sim::delay_experiment;
using driftguard::sim::generate_stream;
using driftguard::sim::run_trial;
using driftguard::sim::validity_experiment;
using driftguard::sim::validity_experiment_multi;

namespace {

bool same_spec(const DistributionSpec& x, const DistributionSpec& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b && x.drift == y.drift;
}

DetectorConfig rs_config(double c) {
    return DetectorConfig{.c = c, .procedure = Procedure::RobertsShiryaev};
}

DetectorConfig musuc_config(double c) {
    return DetectorConfig{.c = c, .procedure = Procedure::Musuc};
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("distribution descriptors round-trip through parse and describe") {
    const DistributionSpec specs[] = {
        DistributionSpec::gaussian(0.0, 1.0),
        DistributionSpec::gaussian(-2.5, 0.25),
        DistributionSpec::uniform(0.0, 1.0),
        DistributionSpec::constant(42.0),
        DistributionSpec::mean_drift(0.0, 1.0, 0.125),
    };
    for (const DistributionSpec& s : specs) {
        CHECK(same_spec(DistributionSpec::parse(s.describe()), s));
    }
    CHECK(same_spec(DistributionSpec::parse("gaussian:0:1"), DistributionSpec::gaussian(0, 1)));
    CHECK(same_spec(DistributionSpec::parse("drift:1:2:3"),
                    DistributionSpec::mean_drift(1, 2, 3)));
}

TEST_CASE("malformed distribution descriptors are rejected") {
    for (const char* bad : {"gaussian:0", "nope:1:2", "uniform:2:1", "gaussian:0:0",
                            "constant:xyz", "drift:0:1", "constant:", ""}) {
        CHECK_THROWS_AS(DistributionSpec::parse(bad), std::invalid_argument);
    }
}

TEST_CASE("scenario validation catches inconsistent setups") {
    ScenarioSpec ok;
    ok.n = 10;
    CHECK_NOTHROW(ok.validate());

    ScenarioSpec missing_post = ok;
    missing_post.change_at = 5;
    CHECK_THROWS_AS(missing_post.validate(), std::invalid_argument);

    ScenarioSpec late_change = ok;
    late_change.change_at = 11;
    late_change.post_change = DistributionSpec::constant(1.0);
    CHECK_THROWS_AS(late_change.validate(), std::invalid_argument);

    ScenarioSpec zero_change = late_change;
    zero_change.change_at = 0;
    CHECK_THROWS_AS(zero_change.validate(), std::invalid_argument);

    ScenarioSpec drifting_null = ok;
    drifting_null.pre_change = DistributionSpec::mean_drift(0.0, 1.0, 0.1);
    CHECK_THROWS_AS(drifting_null.validate(), std::invalid_argument);

    ScenarioSpec flat = ok;
    flat.dim = 0;
    CHECK_THROWS_AS(flat.validate(), std::invalid_argument);
}

TEST_CASE("stream generation is deterministic in the seed") {
    ScenarioSpec spec;
    spec.n = 50;
    spec.dim = 3;
    spec.seed = 99;

    std::vector<Observation> a = generate_stream(spec);
    std::vector<Observation> b = generate_stream(spec);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].dim() == 3);
        CHECK(a[i].values == b[i].values);
    }

    spec.seed = 100;
    std::vector<Observation> c = generate_stream(spec);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i) any_diff = a[i].values != c[i].values;
    CHECK(any_diff);
}

TEST_CASE("the change-point is the first post-change observation") {
    ScenarioSpec spec;
    spec.pre_change = DistributionSpec::constant(1.0);
    spec.change_at = 3;
    spec.post_change = DistributionSpec::constant(2.0);
    spec.n = 5;

    std::vector<Observation> stream = generate_stream(spec);
    REQUIRE(stream.size() == 5);
    CHECK(stream[0].values[0] == 1.0);
    CHECK(stream[1].values[0] == 1.0);
    CHECK(stream[2].values[0] == 2.0);
    CHECK(stream[3].values[0] == 2.0);
    CHECK(stream[4].values[0] == 2.0);
}

TEST_CASE("a drifting post-change segment moves its mean every step") {
    ScenarioSpec spec;
    spec.change_at = 2;
    spec.post_change = DistributionSpec::mean_drift(0.0, 1.0, 1000.0);
    spec.n = 4;
    spec.seed = 5;

    std::vector<Observation> stream = generate_stream(spec);
    CHECK(std::abs(stream[1].values[0]) < 100.0);           // drift starts at mean 0
    CHECK(std::abs(stream[2].values[0] - 1000.0) < 100.0);  // one step of drift
    CHECK(std::abs(stream[3].values[0] - 2000.0) < 100.0);  // two steps
}

TEST_CASE("trial reports measure the delay from the change to the next alarm") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 20;
    spec.change_at = 7;
    spec.post_change = DistributionSpec::constant(3.0);

    // Unit e-values alarm at 5, 10, 15, 20; the first at or after 7 is 10.
    TrialReport rep = run_trial(spec, cs, rs_config(5.0));
    REQUIRE(rep.first_alarm_delay.has_value());
    CHECK(*rep.first_alarm_delay == 3);
    CHECK(rep.frequency == 0.2);

    ScenarioSpec null_spec;
    null_spec.n = 20;
    CHECK(!run_trial(null_spec, cs, rs_config(5.0)).first_alarm_delay.has_value());

    // Change on the last step: the only alarm (at 5) precedes it.
    ScenarioSpec tail = spec;
    tail.n = 7;
    CHECK(!run_trial(tail, cs, rs_config(5.0)).first_alarm_delay.has_value());
}

TEST_CASE("validity experiment under the uninformative score is exact") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 100;
    spec.seed = 3;

    ValidityReport rs = validity_experiment(spec, cs, rs_config(5.0), 10, 0.01, 1);
    CHECK(rs.procedure == "rs");
    CHECK(rs.bound == 0.2);
    CHECK(rs.exceed_fraction == 0.0);
    CHECK(rs.mean_frequency == 0.2);
    CHECK(rs.max_frequency == 0.2);
    REQUIRE(rs.per_trial_frequency.size() == 10);
    for (double f : rs.per_trial_frequency) CHECK(f == 0.2);

    ValidityReport mu = validity_experiment(spec, cs, musuc_config(5.0), 10, 0.01, 1);
    CHECK(mu.procedure == "musuc");
    CHECK(mu.mean_frequency == 0.0);
    CHECK(mu.exceed_fraction == 0.0);
}

TEST_CASE("validity experiment rejects bad setups") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 10;

    ScenarioSpec with_change = spec;
    with_change.change_at = 5;
    with_change.post_change = DistributionSpec::constant(1.0);
    CHECK_THROWS_AS(validity_experiment(with_change, cs, rs_config(5.0), 5, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(validity_experiment(spec, cs, rs_config(5.0), 0, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(validity_experiment(spec, cs, rs_config(5.0), 5, -0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(validity_experiment_multi(spec, cs, {}, 5, 0.01), std::invalid_argument);
}

TEST_CASE("shared-stream evaluation equals independent runs, per trial") {
    KnnScore nn(1);
    ScenarioSpec spec;
    spec.n = 60;
    spec.seed = 77;

    const DetectorConfig configs[] = {rs_config(4.0), musuc_config(4.0)};
    std::vector<ValidityReport> multi =
        validity_experiment_multi(spec, nn, configs, 8, 0.02, 1);
    ValidityReport rs = validity_experiment(spec, nn, configs[0], 8, 0.02, 1);
    ValidityReport mu = validity_experiment(spec, nn, configs[1], 8, 0.02, 1);

    REQUIRE(multi.size() == 2);
    CHECK(multi[0].per_trial_frequency == rs.per_trial_frequency);
    CHECK(multi[1].per_trial_frequency == mu.per_trial_frequency);
}

TEST_CASE("experiment results do not depend on the thread count") {
    KnnScore nn(1);
    ScenarioSpec spec;
    spec.n = 40;
    spec.seed = 31;

    ValidityReport one = validity_experiment(spec, nn, rs_config(3.0), 6, 0.02, 1);
    ValidityReport three = validity_experiment(spec, nn, rs_config(3.0), 6, 0.02, 3);
    CHECK(one.per_trial_frequency == three.per_trial_frequency);
}

TEST_CASE("delay experiment with engineered alarms hits exact quantiles") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 20;
    spec.change_at = 7;
    spec.post_change = DistributionSpec::constant(3.0);

    DelaySummary s = delay_experiment(spec, cs, rs_config(5.0), 5, 1);
    CHECK(s.trials == 5);
    CHECK(s.alarmed_trials == 5);
    CHECK(s.alarm_fraction == 1.0);
    CHECK(s.change_at == 7);
    REQUIRE(s.median_delay.has_value());
    CHECK(*s.median_delay == 3.0);
    REQUIRE(s.p90_delay.has_value());
    CHECK(*s.p90_delay == 3.0);
    CHECK(*s.min_delay == 3);
    CHECK(*s.max_delay == 3);
}

TEST_CASE("delay report serializes absent quantiles as null") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 7;
    spec.change_at = 7;
    spec.post_change = DistributionSpec::constant(3.0);

    DelaySummary s = delay_experiment(spec, cs, rs_config(5.0), 3, 1);
    CHECK(s.alarmed_trials == 0);
    nlohmann::json j = nlohmann::json::parse(s.to_json());
    CHECK(j["exploratory"] == true);
    CHECK(j["median_delay"].is_null());
    CHECK(j["p90_delay"].is_null());
}

TEST_CASE("delay experiment requires a change-point") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 10;
    CHECK_THROWS_AS(delay_experiment(spec, cs, rs_config(5.0), 3), std::invalid_argument);
}

TEST_CASE("a drifting mean is caught quickly by the nearest-neighbour detector") {
    KnnScore nn(1);
    ScenarioSpec spec;
    spec.pre_change = DistributionSpec::gaussian(0.0, 1.0);
    spec.change_at = 50;
    spec.post_change = DistributionSpec::mean_drift(0.0, 1.0, 1.0);
    spec.n = 250;
    spec.seed = 11;

    for (const DetectorConfig& cfg : {rs_config(5.0), musuc_config(5.0)}) {
        DelaySummary s = delay_experiment(spec, nn, cfg, 40, 1);
        CHECK(s.alarm_fraction >= 0.9);
        REQUIRE(s.p90_delay.has_value());
        CHECK(*s.p90_delay <= 200.0);
    }
}

TEST_CASE("validity report serialization carries the gate inputs") {
    ConstantScore cs;
    ScenarioSpec spec;
    spec.n = 50;
    ValidityReport rep = validity_experiment(spec, cs, rs_config(5.0), 4, 0.01, 1);

    nlohmann::json j = nlohmann::json::parse(rep.to_json());
    CHECK(j["experiment"] == "validity");
    CHECK(j["procedure"] == "rs");
    CHECK(j["n"] == 50);
    CHECK(j["trials"] == 4);
    CHECK(j["bound"] == 0.2);

    std::ostringstream csv;
    rep.write_frequencies_csv(csv);
    std::istringstream lines(csv.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 5);  // header + one row per trial
}

}  // TEST_SUITE
