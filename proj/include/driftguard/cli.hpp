#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace driftguard::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 1;  // validation gate not met
inline constexpr int kExitUsage = 2;       // bad arguments, unreadable input, bad record

// Options of the `detect` subcommand (one streaming detector run).
struct RunConfig {
    std::string input = "-";        // file path or "-" for the input stream
    std::string format = "csv";     // csv | jsonl
    std::string columns;            // comma-separated indices or header names; empty = all
    std::string predictor = "knn";  // knn | dist-mean | const
    std::size_t k = 1;
    std::size_t window = 0;  // 0 = score against the full prefix
    std::string procedure = "rs";  // rs | musuc
    double threshold = 0.0;
    std::string on_bad_record = "fail";  // fail | skip
    std::uint64_t seed = 1;              // reserved; detection itself is deterministic
    std::string output = "-";
    int log_level = 2;  // 0 off, 1 error, 2 warn, 3 info, 4 debug
};

// Options of the `validate` subcommand (false-alarm bound experiment).
struct ValidateOptions {
    std::int64_t n = 20000;
    std::int64_t trials = 500;
    double threshold = 20.0;
    double epsilon = 0.02;
    double slack = 0.05;  // gate: exit 0 iff exceed_fraction <= slack
    std::string predictor = "knn";
    std::size_t k = 1;
    std::string procedure = "rs";
    std::string dist = "gaussian:0:1";
    std::size_t dim = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = hardware default
    std::string output = "-";
    std::string csv;  // optional path for per-trial frequencies
    int log_level = 2;
};

// Options of the `bench-delay` subcommand (exploratory delay benchmark).
struct BenchDelayOptions {
    std::int64_t n = 1000;
    std::int64_t trials = 100;
    double threshold = 20.0;
    std::string predictor = "knn";
    std::size_t k = 1;
    std::string procedure = "rs";
    std::string pre = "uniform:0:1";
    std::string post = "constant:1000000";
    std::int64_t change = 0;  // required on the command line
    std::size_t dim = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output = "-";
    int log_level = 2;
};

int cmd_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench_delay(const BenchDelayOptions& options, std::ostream& out, std::ostream& err);

// Full argument-vector entry point (args exclude the program name); used by
// main() with stdio and by tests with their own streams.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv);

}  // namespace driftguard::cli
