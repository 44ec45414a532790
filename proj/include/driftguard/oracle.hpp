#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftguard/detector.hpp"

namespace driftguard::oracle {

using detector::AlarmLog;

// Deliberately slow reference implementations used as ground truth for the
// incremental detectors, plus executable forms of the dominance arguments
// that justify the alarm-frequency bounds. Not production paths.

// Alarm times from evaluating the Roberts-Shiryaev rule literally: for each
// candidate step the within-run statistic is recomputed from scratch with a
// fresh product and a fresh compensated sum (no state carried between
// candidates). Matches the incremental detector bit-for-bit because both
// sides perform the identical multiply/add sequence on the identical run.
AlarmLog brute_force_rs(std::span<const double> e, double c);

// Same for MUSUC: the run product is recomputed from scratch per candidate.
AlarmLog brute_force_musuc(std::span<const double> e, double c);

// Alarms of the time-reversed procedure over a fixed horizon N: tau_0 = N+1
// and tau_k = max{ n < tau_{k-1} : sum_{i=n}^{tau_{k-1}-1} e_n...e_i >= c },
// stopping when no such n exists. tau_times holds the positive stopping
// times in the (strictly decreasing) order they are found.
struct ReversedRun {
    std::int64_t horizon = 0;
    std::vector<std::int64_t> tau_times;

    std::int64_t alarm_count() const {
        return static_cast<std::int64_t>(tau_times.size());
    }
};

// Requires strictly positive e-values (the regime in which the reversed
// procedure is meaningful); throws std::domain_error otherwise.
ReversedRun reversed_sr(std::span<const double> e, double c);

// Forward alarm count never exceeds the reversed alarm count over the same
// horizon: A_N <= A'_N.
bool check_dominance_rs(std::span<const double> e, double c);

// Every forward inter-alarm interval (sigma_k, sigma_{k+1}] that closes
// within the horizon contains at least one reversed stopping time.
bool check_interval_coverage(std::span<const double> e, double c);

// First index k (1-based) at which elementwise dominance of Roberts-Shiryaev
// alarm times over MUSUC alarm times breaks, if any: MUSUC has a k-th alarm
// but Roberts-Shiryaev doesn't, or fires later. bridge_product is the
// product of e over (rs_{k-1}, musuc_{k-1}]; a genuine break forces it below
// 1, so a break with bridge_product >= 1 is internally inconsistent.
struct DominanceBreak {
    std::size_t k = 0;
    std::int64_t rs_time = 0;  // 0 when the k-th Roberts-Shiryaev alarm is missing
    std::int64_t musuc_time = 0;
    double bridge_product = 1.0;
};

std::optional<DominanceBreak> find_dominance_break(std::span<const std::int64_t> rs_times,
                                                   std::span<const std::int64_t> musuc_times,
                                                   std::span<const double> e);

// The k-th Roberts-Shiryaev alarm exists and is no later than the k-th MUSUC
// alarm, for every k at which MUSUC alarms.
bool check_dominance_musuc(std::span<const double> e, double c);

}  // namespace driftguard::oracle
