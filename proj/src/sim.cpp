#include "driftguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "driftguard/numeric.hpp"
#include "driftguard/random.hpp"

namespace driftguard::sim {

DistributionSpec DistributionSpec::gaussian(double mean, double sd) {
    DistributionSpec d;
    d.kind = Kind::Gaussian;
    d.a = mean;
    d.b = sd;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
    DistributionSpec d;
    d.kind = Kind::Uniform;
    d.a = lo;
    d.b = hi;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::constant(double value) {
    DistributionSpec d;
    d.kind = Kind::Constant;
    d.a = value;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::mean_drift(double start_mean, double sd, double per_step) {
    DistributionSpec d;
    d.kind = Kind::MeanDrift;
    d.a = start_mean;
    d.b = sd;
    d.drift = per_step;
    d.validate();
    return d;
}

void DistributionSpec::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(drift)) {
        throw std::invalid_argument("distribution parameters must be finite");
    }
    switch (kind) {
        case Kind::Gaussian:
        case Kind::MeanDrift:
            if (b <= 0.0) throw std::invalid_argument("gaussian scale must be positive");
            break;
        case Kind::Uniform:
            if (b <= a) throw std::invalid_argument("uniform bounds must satisfy lo < hi");
            break;
        case Kind::Constant:
            break;
    }
}

namespace {

// Shortest representation that parses back to the same double.
std::string format_number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string DistributionSpec::describe() const {
    switch (kind) {
        case Kind::Gaussian:
            return "gaussian:" + format_number(a) + ":" + format_number(b);
        case Kind::Uniform:
            return "uniform:" + format_number(a) + ":" + format_number(b);
        case Kind::Constant:
            return "constant:" + format_number(a);
        case Kind::MeanDrift:
            return "drift:" + format_number(a) + ":" + format_number(b) + ":" +
                   format_number(drift);
    }
    throw std::logic_error("unreachable distribution kind");
}

DistributionSpec DistributionSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);

    const auto num = [&](std::size_t i) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(parts[i], &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad distribution parameter: " + parts[i]);
        }
        if (used != parts[i].size()) {
            throw std::invalid_argument("bad distribution parameter: " + parts[i]);
        }
        return v;
    };

    const std::string& name = parts.front();
    if (name == "gaussian" && parts.size() == 3) return gaussian(num(1), num(2));
    if (name == "uniform" && parts.size() == 3) return uniform(num(1), num(2));
    if (name == "constant" && parts.size() == 2) return constant(num(1));
    if (name == "drift" && parts.size() == 4) return mean_drift(num(1), num(2), num(3));
    throw std::invalid_argument(
        "unrecognized distribution descriptor '" + text +
        "' (expected gaussian:M:SD, uniform:LO:HI, constant:V, or drift:START:SD:PERSTEP)");
}

void ScenarioSpec::validate() const {
    pre_change.validate();
    if (pre_change.kind == DistributionSpec::Kind::MeanDrift) {
        throw std::invalid_argument("pre-change segment must be IID; drift is post-change only");
    }
    if (n < 0) throw std::invalid_argument("scenario horizon must be nonnegative");
    if (dim < 1) throw std::invalid_argument("scenario dimension must be at least 1");
    if (change_at.has_value() != post_change.has_value()) {
        throw std::invalid_argument("change_at and post_change must be given together");
    }
    if (change_at) {
        if (*change_at < 1 || *change_at > n) {
            throw std::invalid_argument("change_at must lie in [1, n]");
        }
        post_change->validate();
    }
}

namespace {

double sample(const DistributionSpec& dist, Rng& rng, std::int64_t steps_since_change) {
    switch (dist.kind) {
        case DistributionSpec::Kind::Gaussian:
            return rng.gaussian(dist.a, dist.b);
        case DistributionSpec::Kind::Uniform:
            return rng.uniform(dist.a, dist.b);
        case DistributionSpec::Kind::Constant:
            return dist.a;
        case DistributionSpec::Kind::MeanDrift:
            return rng.gaussian(dist.a + dist.drift * static_cast<double>(steps_since_change),
                                dist.b);
    }
    throw std::logic_error("unreachable distribution kind");
}

std::uint64_t trial_seed(const ScenarioSpec& spec, std::int64_t trial) {
    return mix_seed(spec.seed, static_cast<std::uint64_t>(trial));
}

// Splits [0, trials) into contiguous chunks and runs `body(trial_index)` on
// each; per-trial seeding keeps results independent of the thread count.
void for_each_trial(std::int64_t trials, unsigned threads,
                    const std::function<void(std::int64_t)>& body) {
    unsigned want = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    if (trials < static_cast<std::int64_t>(want)) want = static_cast<unsigned>(trials);
    if (want <= 1) {
        for (std::int64_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (unsigned w = 0; w < want; ++w) {
        const std::int64_t lo = trials * w / want;
        const std::int64_t hi = trials * (w + 1) / want;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t t = lo; t < hi; ++t) body(t);
        });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace

std::vector<Observation> generate_stream(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(spec.n));
    for (std::int64_t i = 1; i <= spec.n; ++i) {
        const bool post = spec.change_at && i >= *spec.change_at;
        const DistributionSpec& dist = post ? *spec.post_change : spec.pre_change;
        const std::int64_t since = post ? i - *spec.change_at : 0;
        Observation z;
        z.values.resize(spec.dim);
        for (std::size_t j = 0; j < spec.dim; ++j) z.values[j] = sample(dist, rng, since);
        out.push_back(std::move(z));
    }
    return out;
}

TrialReport run_trial(const ScenarioSpec& spec, const ScoreFunction& score,
                      const DetectorConfig& config) {
    const std::vector<Observation> stream = generate_stream(spec);
    TrialReport rep;
    rep.alarm_log = detector::run_detector(score, stream, config);
    rep.frequency = detector::alarm_frequency(rep.alarm_log);
    if (spec.change_at) {
        for (const std::int64_t sigma : rep.alarm_log.alarm_times) {
            if (sigma >= *spec.change_at) {
                rep.first_alarm_delay = sigma - *spec.change_at;
                break;
            }
        }
    }
    return rep;
}

std::string ValidityReport::to_json() const {
    const nlohmann::json j{
        {"experiment", "validity"},
        {"procedure", procedure},
        {"n", n},
        {"trials", trials},
        {"c", c},
        {"epsilon", epsilon},
        {"bound", bound},
        {"exceed_fraction", exceed_fraction},
        {"mean_frequency", mean_frequency},
        {"max_frequency", max_frequency},
    };
    return j.dump(2);
}

void ValidityReport::write_frequencies_csv(std::ostream& out) const {
    out << "trial,frequency\n";
    for (std::size_t t = 0; t < per_trial_frequency.size(); ++t) {
        out << t << ',' << format_number(per_trial_frequency[t]) << '\n';
    }
}

std::vector<ValidityReport> validity_experiment_multi(const ScenarioSpec& spec,
                                                      const ScoreFunction& score,
                                                      std::span<const DetectorConfig> configs,
                                                      std::int64_t trials, double epsilon,
                                                      unsigned threads) {
    spec.validate();
    if (spec.change_at) {
        throw std::invalid_argument("validity experiment runs on the IID null (no change-point)");
    }
    if (trials < 1) throw std::invalid_argument("validity experiment needs at least one trial");
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw std::invalid_argument("epsilon must be finite and nonnegative");
    }
    if (configs.empty()) throw std::invalid_argument("no detector configuration given");
    for (const DetectorConfig& config : configs) config.validate();

    std::vector<std::vector<double>> freq(configs.size(),
                                          std::vector<double>(static_cast<std::size_t>(trials)));

    for_each_trial(trials, threads, [&](std::int64_t t) {
        ScenarioSpec tspec = spec;
        tspec.seed = trial_seed(spec, t);
        const std::vector<Observation> stream = generate_stream(tspec);
        const epredictor::EVector evalues = epredictor::stream_e_values(score, stream);
        for (std::size_t ci = 0; ci < configs.size(); ++ci) {
            detector::Detector det(configs[ci]);
            for (const double e : evalues) det.step(e);
            freq[ci][static_cast<std::size_t>(t)] = detector::alarm_frequency(det.log());
        }
    });

    std::vector<ValidityReport> reports(configs.size());
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        ValidityReport& rep = reports[ci];
        rep.procedure =
            configs[ci].procedure == detector::Procedure::RobertsShiryaev ? "rs" : "musuc";
        rep.n = spec.n;
        rep.trials = trials;
        rep.c = configs[ci].c;
        rep.epsilon = epsilon;
        rep.bound = 1.0 / configs[ci].c;
        rep.per_trial_frequency = std::move(freq[ci]);

        std::int64_t exceed = 0;
        double max_f = 0.0;
        for (const double f : rep.per_trial_frequency) {
            if (f > rep.bound + epsilon) ++exceed;
            max_f = std::max(max_f, f);
        }
        rep.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(trials);
        rep.max_frequency = max_f;
        rep.mean_frequency =
            multiset_sum(rep.per_trial_frequency) / static_cast<double>(trials);
    }
    return reports;
}

ValidityReport validity_experiment(const ScenarioSpec& spec, const ScoreFunction& score,
                                   const DetectorConfig& config, std::int64_t trials,
                                   double epsilon, unsigned threads) {
    const DetectorConfig configs[] = {config};
    std::vector<ValidityReport> reports =
        validity_experiment_multi(spec, score, configs, trials, epsilon, threads);
    return std::move(reports.front());
}

std::string DelaySummary::to_json() const {
    nlohmann::json j{
        {"experiment", "delay"},
        {"exploratory", true},
        {"trials", trials},
        {"alarmed_trials", alarmed_trials},
        {"alarm_fraction", alarm_fraction},
        {"change_at", change_at},
    };
    j["median_delay"] = median_delay ? nlohmann::json(*median_delay) : nlohmann::json();
    j["p90_delay"] = p90_delay ? nlohmann::json(*p90_delay) : nlohmann::json();
    j["min_delay"] = min_delay ? nlohmann::json(*min_delay) : nlohmann::json();
    j["max_delay"] = max_delay ? nlohmann::json(*max_delay) : nlohmann::json();
    return j.dump(2);
}

namespace {

double sorted_quantile_median(const std::vector<std::int64_t>& sorted) {
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
    return (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
}

// Nearest-rank upper quantile.
double sorted_quantile(const std::vector<std::int64_t>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double rank = std::ceil(q * static_cast<double>(n));
    std::size_t idx = rank <= 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    if (idx >= n) idx = n - 1;
    return static_cast<double>(sorted[idx]);
}

}  // namespace

DelaySummary delay_experiment(const ScenarioSpec& spec, const ScoreFunction& score,
                              const DetectorConfig& config, std::int64_t trials,
                              unsigned threads) {
    spec.validate();
    if (!spec.change_at) {
        throw std::invalid_argument("delay experiment requires a change-point scenario");
    }
    if (trials < 1) throw std::invalid_argument("delay experiment needs at least one trial");
    config.validate();

    std::vector<std::optional<std::int64_t>> delay(static_cast<std::size_t>(trials));
    for_each_trial(trials, threads, [&](std::int64_t t) {
        ScenarioSpec tspec = spec;
        tspec.seed = trial_seed(spec, t);
        delay[static_cast<std::size_t>(t)] = run_trial(tspec, score, config).first_alarm_delay;
    });

    DelaySummary summary;
    summary.trials = trials;
    summary.change_at = *spec.change_at;
    for (const auto& d : delay) {
        if (d) summary.delays.push_back(*d);
    }
    std::sort(summary.delays.begin(), summary.delays.end());
    summary.alarmed_trials = static_cast<std::int64_t>(summary.delays.size());
    summary.alarm_fraction =
        static_cast<double>(summary.alarmed_trials) / static_cast<double>(trials);
    if (!summary.delays.empty()) {
        summary.median_delay = sorted_quantile_median(summary.delays);
        summary.p90_delay = sorted_quantile(summary.delays, 0.9);
        summary.min_delay = summary.delays.front();
        summary.max_delay = summary.delays.back();
    }
    return summary;
}

}  // namespace driftguard::sim
