#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace driftguard {

// Sum of a sorted (ascending) range, accumulated in four independent lanes.
// The result is a pure function of the input sequence, so any two callers
// that agree on the sorted order agree bit-for-bit on the sum. Used as the
// canonical reduction wherever batch and streaming code must produce
// identical doubles from the same multiset of values.
inline double sorted_sum(std::span<const double> sorted_values) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    const std::size_t n = sorted_values.size();
    for (; i + 4 <= n; i += 4) {
        a0 += sorted_values[i];
        a1 += sorted_values[i + 1];
        a2 += sorted_values[i + 2];
        a3 += sorted_values[i + 3];
    }
    for (; i < n; ++i) a0 += sorted_values[i];
    return (a0 + a1) + (a2 + a3);
}

// Canonical sum of an arbitrary multiset of finite doubles: sort ascending,
// then sorted_sum. Deterministic under any permutation of the input.
inline double multiset_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return sorted_sum(values);
}

// Neumaier-compensated accumulator. Left-to-right accumulation through this
// struct is reproducible: feeding the same value sequence from a fresh state
// always yields the same (sum, compensation) pair, whether the terms arrive
// incrementally or in one loop.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    // On overflow to infinity the compensation term is NaN and must not
    // poison the total; the infinite sum already tells the whole story.
    double value() const { return std::isinf(sum) ? sum : sum + comp; }

    void reset() {
        sum = 0.0;
        comp = 0.0;
    }
};

}  // namespace driftguard
