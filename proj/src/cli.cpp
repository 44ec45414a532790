#include "driftguard/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftguard/detector.hpp"
#include "driftguard/epredictor.hpp"
#include "driftguard/sim.hpp"

namespace driftguard::cli {

namespace {

constexpr int kLogOff = 0;
constexpr int kLogError = 1;
constexpr int kLogWarn = 2;
constexpr int kLogInfo = 3;
constexpr int kLogDebug = 4;

int log_level_from_env() {
    const char* raw = std::getenv("DRIFTGUARD_LOG");
    if (raw == nullptr) return kLogWarn;
    std::string v(raw);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (v == "off" || v == "none" || v == "silent") return kLogOff;
    if (v == "error") return kLogError;
    if (v == "warn" || v == "warning") return kLogWarn;
    if (v == "info") return kLogInfo;
    if (v == "debug") return kLogDebug;
    return kLogWarn;
}

std::string trimmed(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Locale-independent double parse of a whole (trimmed) token; a leading '+'
// is tolerated. Accepts inf/nan spellings; the finiteness gate downstream
// rejects those as observations.
std::optional<double> parse_double(std::string_view raw) {
    const std::string token = trimmed(raw);
    std::string_view body = token;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    if (body.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = body.data();
    const char* end = begin + body.size();
    const auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return v;
}

bool is_index_token(const std::string& t) {
    return !t.empty() &&
           std::all_of(t.begin(), t.end(),
                       [](unsigned char ch) { return std::isdigit(ch) != 0; });
}

std::size_t parse_index(const std::string& t) {
    std::size_t idx = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
    if (ec != std::errc{} || p != t.data() + t.size()) {
        throw std::invalid_argument("bad column index '" + t + "'");
    }
    return idx;
}

struct ColumnSelection {
    bool all = true;
    std::vector<std::string> tokens;
};

ColumnSelection parse_columns_flag(const std::string& flag) {
    ColumnSelection sel;
    if (trimmed(flag).empty()) return sel;
    sel.all = false;
    for (const std::string& tok : split(flag, ',')) {
        std::string t = trimmed(tok);
        if (t.empty()) throw std::invalid_argument("empty column selector in --columns");
        sel.tokens.push_back(std::move(t));
    }
    return sel;
}

// Maps the selection onto concrete CSV column indices. `header` is null for
// headerless input, in which case name selectors are unusable and `ncols`
// (width of the first data row) bounds the indices.
std::vector<std::size_t> resolve_csv_columns(const ColumnSelection& sel,
                                             const std::vector<std::string>* header,
                                             std::size_t ncols) {
    std::vector<std::size_t> cols;
    if (sel.all) {
        cols.resize(ncols);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        if (cols.empty()) throw std::invalid_argument("input rows have no columns");
        return cols;
    }
    for (const std::string& tok : sel.tokens) {
        if (is_index_token(tok)) {
            const std::size_t idx = parse_index(tok);
            if (idx >= ncols) {
                throw std::invalid_argument("column index " + tok + " out of range (input has " +
                                            std::to_string(ncols) + " columns)");
            }
            cols.push_back(idx);
        } else {
            if (header == nullptr) {
                throw std::invalid_argument("column name '" + tok +
                                            "' requires a CSV header row");
            }
            const auto it = std::find(header->begin(), header->end(), tok);
            if (it == header->end()) {
                throw std::invalid_argument("unknown column name '" + tok + "'");
            }
            cols.push_back(static_cast<std::size_t>(it - header->begin()));
        }
    }
    return cols;
}

detector::Procedure parse_procedure(const std::string& name) {
    if (name == "rs") return detector::Procedure::RobertsShiryaev;
    if (name == "musuc") return detector::Procedure::Musuc;
    throw std::invalid_argument("unknown procedure '" + name + "' (expected rs or musuc)");
}

// Opens the configured output target, defaulting to the provided stream.
class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
        } else {
            file_.open(path);
            if (file_) stream_ = &file_;
        }
    }

    bool ok() const { return stream_ != nullptr; }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

}  // namespace

int cmd_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    if (config.format != "csv" && config.format != "jsonl") {
        throw std::invalid_argument("--format must be csv or jsonl");
    }
    if (config.on_bad_record != "fail" && config.on_bad_record != "skip") {
        throw std::invalid_argument("--on-bad-record must be fail or skip");
    }
    detector::DetectorConfig dconf;
    dconf.c = config.threshold;
    dconf.procedure = parse_procedure(config.procedure);
    dconf.validate();
    const std::unique_ptr<epredictor::ScoreFunction> score =
        epredictor::make_score(config.predictor, config.k);
    const ColumnSelection sel = parse_columns_flag(config.columns);

    const bool jsonl = config.format == "jsonl";
    std::optional<std::vector<std::size_t>> cols;  // CSV: resolved at the first data row
    if (jsonl && !sel.all) {
        cols.emplace();
        for (const std::string& tok : sel.tokens) {
            if (!is_index_token(tok)) {
                throw std::invalid_argument("jsonl column selectors must be numeric indices");
            }
            cols->push_back(parse_index(tok));
        }
    }

    std::ifstream fin;
    std::istream* src = &in;
    if (config.input != "-") {
        fin.open(config.input);
        if (!fin) {
            err << "error: cannot open input '" << config.input << "'\n";
            return kExitUsage;
        }
        src = &fin;
    }
    OutputTarget sink(config.output, out);
    if (!sink.ok()) {
        err << "error: cannot open output '" << config.output << "'\n";
        return kExitUsage;
    }

    epredictor::EValueStream evalues(*score, {.window = config.window});
    detector::Detector det(dconf);

    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(*src, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;

        std::vector<double> values;
        std::string reason;

        if (jsonl) {
            const nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
            if (rec.is_discarded()) {
                reason = "invalid JSON";
            } else if (!rec.is_object() || !rec.contains("x") || !rec["x"].is_array()) {
                reason = "record must be an object with an \"x\" array";
            } else {
                const nlohmann::json& x = rec["x"];
                std::vector<std::size_t> idxs;
                if (cols) {
                    idxs = *cols;
                } else {
                    idxs.resize(x.size());
                    std::iota(idxs.begin(), idxs.end(), std::size_t{0});
                    if (idxs.empty()) reason = "empty \"x\" array";
                }
                for (const std::size_t idx : idxs) {
                    if (idx >= x.size()) {
                        reason = "missing element " + std::to_string(idx);
                        break;
                    }
                    if (!x[idx].is_number()) {
                        reason = "non-numeric element " + std::to_string(idx);
                        break;
                    }
                    values.push_back(x[idx].get<double>());
                }
            }
        } else {
            const std::vector<std::string> cells = split(line, ',');
            if (!cols) {
                bool all_numeric = true;
                for (const std::string& cell : cells) {
                    if (!parse_double(cell)) {
                        all_numeric = false;
                        break;
                    }
                }
                if (!all_numeric) {
                    std::vector<std::string> header;
                    header.reserve(cells.size());
                    for (const std::string& cell : cells) header.push_back(trimmed(cell));
                    cols = resolve_csv_columns(sel, &header, header.size());
                    if (config.log_level >= kLogDebug) {
                        err << "debug: header row with " << header.size() << " columns\n";
                    }
                    continue;  // header consumed; not a record
                }
                cols = resolve_csv_columns(sel, nullptr, cells.size());
            }
            for (const std::size_t idx : *cols) {
                if (idx >= cells.size()) {
                    reason = "missing column " + std::to_string(idx);
                    break;
                }
                const std::optional<double> v = parse_double(cells[idx]);
                if (!v) {
                    reason = "unparseable number '" + trimmed(cells[idx]) + "'";
                    break;
                }
                values.push_back(*v);
            }
        }

        if (reason.empty()) {
            try {
                const epredictor::Observation obs(std::move(values));
                const double e = evalues.push(obs);
                if (det.step(e)) {
                    const nlohmann::json rec{{"k", det.log().alarm_count()},
                                             {"sigma", det.log().horizon}};
                    sink.stream() << rec.dump() << '\n';
                    sink.stream().flush();  // alarms must be visible immediately
                }
                continue;
            } catch (const std::exception& ex) {
                reason = ex.what();
            }
        }

        if (config.on_bad_record == "fail") {
            err << "error: line " << line_no << ": " << reason << '\n';
            return kExitUsage;
        }
        if (config.log_level >= kLogWarn) {
            err << "warning: skipping line " << line_no << ": " << reason << '\n';
        }
    }

    const nlohmann::json summary{{"n", det.log().horizon},
                                 {"A_n", det.log().alarm_count()},
                                 {"freq", detector::alarm_frequency(det.log())}};
    sink.stream() << summary.dump() << '\n';
    sink.stream().flush();
    if (config.log_level >= kLogInfo) {
        err << "info: processed " << det.log().horizon << " records, "
            << det.log().alarm_count() << " alarms\n";
    }
    return kExitOk;
}

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err) {
    if (!std::isfinite(options.slack) || options.slack < 0.0) {
        throw std::invalid_argument("--slack must be finite and nonnegative");
    }
    const std::unique_ptr<epredictor::ScoreFunction> score =
        epredictor::make_score(options.predictor, options.k);
    sim::ScenarioSpec spec;
    spec.pre_change = sim::DistributionSpec::parse(options.dist);
    spec.n = options.n;
    spec.dim = options.dim;
    spec.seed = options.seed;
    detector::DetectorConfig config;
    config.c = options.threshold;
    config.procedure = parse_procedure(options.procedure);

    if (options.log_level >= kLogInfo) {
        err << "info: validity run: n=" << options.n << " trials=" << options.trials
            << " c=" << options.threshold << " procedure=" << options.procedure << '\n';
    }
    const sim::ValidityReport report = sim::validity_experiment(
        spec, *score, config, options.trials, options.epsilon, options.threads);

    OutputTarget sink(options.output, out);
    if (!sink.ok()) {
        err << "error: cannot open output '" << options.output << "'\n";
        return kExitUsage;
    }
    sink.stream() << report.to_json() << '\n';
    sink.stream().flush();

    if (!options.csv.empty()) {
        std::ofstream cf(options.csv);
        if (!cf) {
            err << "error: cannot open csv output '" << options.csv << "'\n";
            return kExitUsage;
        }
        report.write_frequencies_csv(cf);
    }

    if (report.exceed_fraction <= options.slack) return kExitOk;
    err << "validation gate failed: exceed_fraction " << report.exceed_fraction << " > slack "
        << options.slack << '\n';
    return kExitGateFailed;
}

int cmd_bench_delay(const BenchDelayOptions& options, std::ostream& out, std::ostream& err) {
    const std::unique_ptr<epredictor::ScoreFunction> score =
        epredictor::make_score(options.predictor, options.k);
    sim::ScenarioSpec spec;
    spec.pre_change = sim::DistributionSpec::parse(options.pre);
    spec.post_change = sim::DistributionSpec::parse(options.post);
    spec.change_at = options.change;
    spec.n = options.n;
    spec.dim = options.dim;
    spec.seed = options.seed;
    detector::DetectorConfig config;
    config.c = options.threshold;
    config.procedure = parse_procedure(options.procedure);

    const sim::DelaySummary summary =
        sim::delay_experiment(spec, *score, config, options.trials, options.threads);

    OutputTarget sink(options.output, out);
    if (!sink.ok()) {
        err << "error: cannot open output '" << options.output << "'\n";
        return kExitUsage;
    }
    sink.stream() << summary.to_json() << '\n';
    sink.stream().flush();
    return kExitOk;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
    const int log_level = log_level_from_env();
    RunConfig detect_cfg;
    detect_cfg.log_level = log_level;
    ValidateOptions validate_opt;
    validate_opt.log_level = log_level;
    BenchDelayOptions bench_opt;
    bench_opt.log_level = log_level;

    CLI::App app{"Streaming detector for violations of the IID assumption, driven by conformal "
                 "e-values"};
    app.name("driftguard");
    app.require_subcommand(1);

    CLI::App* det =
        app.add_subcommand("detect", "Stream records through a detector; alarms come out as "
                                     "JSON Lines the moment they fire");
    det->add_option("--input", detect_cfg.input, "Input path, or - for standard input")
        ->capture_default_str();
    det->add_option("--format", detect_cfg.format, "Input format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    det->add_option("--columns", detect_cfg.columns,
                    "Comma-separated column indices (or CSV header names) forming the "
                    "observation vector; default: all columns");
    det->add_option("--predictor", detect_cfg.predictor, "Score function")
        ->check(CLI::IsMember({"knn", "dist-mean", "const"}))
        ->capture_default_str();
    det->add_option("--k", detect_cfg.k, "Neighbour count for the knn predictor")
        ->capture_default_str();
    det->add_option("--window", detect_cfg.window,
                    "Sliding-window size; 0 scores against the full prefix")
        ->capture_default_str();
    det->add_option("--procedure", detect_cfg.procedure, "Stopping rule")
        ->check(CLI::IsMember({"rs", "musuc"}))
        ->capture_default_str();
    det->add_option("--threshold", detect_cfg.threshold, "Alarm threshold c (> 1)")->required();
    det->add_option("--on-bad-record", detect_cfg.on_bad_record, "Malformed-record policy")
        ->check(CLI::IsMember({"fail", "skip"}))
        ->capture_default_str();
    det->add_option("--seed", detect_cfg.seed, "Reserved for randomized extensions")
        ->capture_default_str();
    det->add_option("--output", detect_cfg.output, "Output path, or - for standard output")
        ->capture_default_str();

    CLI::App* val = app.add_subcommand(
        "validate", "Monte Carlo check of the false-alarm frequency bound on the IID null");
    val->add_option("--n", validate_opt.n, "Stream length per trial")->capture_default_str();
    val->add_option("--trials", validate_opt.trials, "Number of seeded trials")
        ->capture_default_str();
    val->add_option("--threshold", validate_opt.threshold, "Alarm threshold c (> 1)")
        ->capture_default_str();
    val->add_option("--epsilon", validate_opt.epsilon,
                    "Tolerance added to the 1/c bound per trial")
        ->capture_default_str();
    val->add_option("--slack", validate_opt.slack,
                    "Gate: exit 0 iff the fraction of exceeding trials stays within this")
        ->capture_default_str();
    val->add_option("--predictor", validate_opt.predictor, "Score function")
        ->check(CLI::IsMember({"knn", "dist-mean", "const"}))
        ->capture_default_str();
    val->add_option("--k", validate_opt.k, "Neighbour count for the knn predictor")
        ->capture_default_str();
    val->add_option("--procedure", validate_opt.procedure, "Stopping rule")
        ->check(CLI::IsMember({"rs", "musuc"}))
        ->capture_default_str();
    val->add_option("--dist", validate_opt.dist,
                    "Null distribution (gaussian:M:SD, uniform:LO:HI, constant:V)")
        ->capture_default_str();
    val->add_option("--dim", validate_opt.dim, "Observation dimension")->capture_default_str();
    val->add_option("--seed", validate_opt.seed, "Base seed; trial seeds derive from it")
        ->capture_default_str();
    val->add_option("--threads", validate_opt.threads, "Worker threads; 0 = hardware default")
        ->capture_default_str();
    val->add_option("--output", validate_opt.output, "Report path, or - for standard output")
        ->capture_default_str();
    val->add_option("--csv", validate_opt.csv, "Optional CSV path for per-trial frequencies");

    CLI::App* bench = app.add_subcommand(
        "bench-delay", "Exploratory detection-delay benchmark (reported, never a gate)");
    bench->add_option("--n", bench_opt.n, "Stream length per trial")->capture_default_str();
    bench->add_option("--trials", bench_opt.trials, "Number of seeded trials")
        ->capture_default_str();
    bench->add_option("--threshold", bench_opt.threshold, "Alarm threshold c (> 1)")
        ->capture_default_str();
    bench->add_option("--predictor", bench_opt.predictor, "Score function")
        ->check(CLI::IsMember({"knn", "dist-mean", "const"}))
        ->capture_default_str();
    bench->add_option("--k", bench_opt.k, "Neighbour count for the knn predictor")
        ->capture_default_str();
    bench->add_option("--procedure", bench_opt.procedure, "Stopping rule")
        ->check(CLI::IsMember({"rs", "musuc"}))
        ->capture_default_str();
    bench->add_option("--pre", bench_opt.pre, "Pre-change distribution")->capture_default_str();
    bench->add_option("--post", bench_opt.post,
                      "Post-change distribution (drift:START:SD:PERSTEP also allowed)")
        ->capture_default_str();
    bench->add_option("--change", bench_opt.change, "Change-point index (1-based)")->required();
    bench->add_option("--dim", bench_opt.dim, "Observation dimension")->capture_default_str();
    bench->add_option("--seed", bench_opt.seed, "Base seed; trial seeds derive from it")
        ->capture_default_str();
    bench->add_option("--threads", bench_opt.threads, "Worker threads; 0 = hardware default")
        ->capture_default_str();
    bench->add_option("--output", bench_opt.output, "Summary path, or - for standard output")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (det->parsed()) return cmd_detect(detect_cfg, in, out, err);
        if (val->parsed()) return cmd_validate(validate_opt, out, err);
        if (bench->parsed()) return cmd_bench_delay(bench_opt, out, err);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    }
    err << "error: no subcommand given\n";
    return kExitUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace driftguard::cli
