#include "driftguard/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftguard/numeric.hpp"

namespace driftguard::oracle {

namespace {

void require_threshold(double c) {
    if (!std::isfinite(c) || c <= 1.0) {
        throw std::invalid_argument("threshold must be finite and exceed 1");
    }
}

void require_nonnegative(std::span<const double> e) {
    for (double v : e) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::domain_error("e-values must be finite and nonnegative");
        }
    }
}

void require_positive(std::span<const double> e) {
    for (double v : e) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::domain_error("reversed procedure requires strictly positive e-values");
        }
    }
}

}  // namespace

AlarmLog brute_force_rs(std::span<const double> e, double c) {
    require_threshold(c);
    require_nonnegative(e);

    AlarmLog log;
    log.horizon = static_cast<std::int64_t>(e.size());
    std::size_t start = 0;  // first index of the current run
    for (std::size_t n = 0; n < e.size(); ++n) {
        double product = 1.0;
        NeumaierSum sum;
        for (std::size_t i = start; i <= n; ++i) {
            product *= e[i];
            sum.add(product);
        }
        if (sum.value() >= c) {
            log.alarm_times.push_back(static_cast<std::int64_t>(n) + 1);
            start = n + 1;
        }
    }
    return log;
}

AlarmLog brute_force_musuc(std::span<const double> e, double c) {
    require_threshold(c);
    require_nonnegative(e);

    AlarmLog log;
    log.horizon = static_cast<std::int64_t>(e.size());
    std::size_t start = 0;
    for (std::size_t n = 0; n < e.size(); ++n) {
        double product = 1.0;
        for (std::size_t i = start; i <= n; ++i) product *= e[i];
        if (product >= c) {
            log.alarm_times.push_back(static_cast<std::int64_t>(n) + 1);
            start = n + 1;
        }
    }
    return log;
}

ReversedRun reversed_sr(std::span<const double> e, double c) {
    require_threshold(c);
    require_positive(e);

    ReversedRun run;
    run.horizon = static_cast<std::int64_t>(e.size());

    // right = tau_{k-1} - 1; candidates n are scanned downward, each with a
    // fresh from-scratch sum. The inner accumulation stops as soon as the
    // threshold is reached: the terms are nonnegative, so the decision is
    // already settled, and stopping keeps the products bounded near c.
    std::int64_t right = run.horizon;
    while (right >= 1) {
        std::int64_t found = 0;
        for (std::int64_t n = right; n >= 1 && found == 0; --n) {
            double product = 1.0;
            NeumaierSum sum;
            for (std::int64_t i = n; i <= right; ++i) {
                product *= e[static_cast<std::size_t>(i - 1)];
                sum.add(product);
                if (sum.value() >= c) {
                    found = n;
                    break;
                }
            }
        }
        if (found == 0) break;
        run.tau_times.push_back(found);
        right = found - 1;
    }
    return run;
}

bool check_dominance_rs(std::span<const double> e, double c) {
    const AlarmLog forward = brute_force_rs(e, c);
    const ReversedRun reversed = reversed_sr(e, c);
    return forward.alarm_count() <= reversed.alarm_count();
}

bool check_interval_coverage(std::span<const double> e, double c) {
    const AlarmLog forward = brute_force_rs(e, c);
    const ReversedRun reversed = reversed_sr(e, c);

    std::vector<std::int64_t> taus(reversed.tau_times.begin(), reversed.tau_times.end());
    std::sort(taus.begin(), taus.end());

    std::int64_t prev = 0;
    for (const std::int64_t sigma : forward.alarm_times) {
        // Some tau must lie in (prev, sigma].
        const auto it = std::upper_bound(taus.begin(), taus.end(), prev);
        if (it == taus.end() || *it > sigma) return false;
        prev = sigma;
    }
    return true;
}

std::optional<DominanceBreak> find_dominance_break(std::span<const std::int64_t> rs_times,
                                                   std::span<const std::int64_t> musuc_times,
                                                   std::span<const double> e) {
    for (std::size_t k = 0; k < musuc_times.size(); ++k) {
        const bool rs_missing = k >= rs_times.size();
        if (!rs_missing && rs_times[k] <= musuc_times[k]) continue;

        DominanceBreak brk;
        brk.k = k + 1;
        brk.rs_time = rs_missing ? 0 : rs_times[k];
        brk.musuc_time = musuc_times[k];

        // Product of e over (rs_{k-1}, musuc_{k-1}], empty product = 1.
        const std::int64_t lo = k == 0 ? 0 : rs_times[k - 1];
        const std::int64_t hi = k == 0 ? 0 : musuc_times[k - 1];
        double product = 1.0;
        for (std::int64_t i = lo + 1; i <= hi; ++i) {
            product *= e[static_cast<std::size_t>(i - 1)];
        }
        brk.bridge_product = product;
        return brk;
    }
    return std::nullopt;
}

bool check_dominance_musuc(std::span<const double> e, double c) {
    const AlarmLog rs = brute_force_rs(e, c);
    const AlarmLog musuc = brute_force_musuc(e, c);
    return !find_dominance_break(rs.alarm_times, musuc.alarm_times, e).has_value();
}

}  // namespace driftguard::oracle
