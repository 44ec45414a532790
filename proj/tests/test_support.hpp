#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "driftguard/observation.hpp"
#include "driftguard/random.hpp"

namespace driftguard::testsupport {

using epredictor::Observation;

inline std::vector<Observation> obs_seq(std::initializer_list<double> xs) {
    std::vector<Observation> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(Observation{x});
    return out;
}

// Index uniform in [0, n); n must be positive.
inline std::size_t random_index(Rng& rng, std::size_t n) {
    auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
}

// Gaussian batch; duplicate_chance repeats an earlier observation verbatim to
// exercise tied scores and zero distances.
inline std::vector<Observation> random_batch(Rng& rng, std::size_t m, std::size_t dim,
                                             double duplicate_chance = 0.0) {
    std::vector<Observation> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!out.empty() && rng.uniform01() < duplicate_chance) {
            out.push_back(out[random_index(rng, out.size())]);
            continue;
        }
        Observation z;
        z.values.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j) z.values.push_back(rng.gaussian());
        out.push_back(std::move(z));
    }
    return out;
}

// Log-uniform over [1e-6, 1e6]: exercises both decaying and exploding runs.
inline std::vector<double> random_positive_evalues(Rng& rng, std::size_t n) {
    const double lo = std::log(1e-6);
    const double hi = std::log(1e6);
    std::vector<double> e(n);
    for (double& v : e) v = std::exp(rng.uniform(lo, hi));
    return e;
}

inline std::vector<double> random_evalues_with_zeros(Rng& rng, std::size_t n,
                                                     double zero_chance) {
    std::vector<double> e = random_positive_evalues(rng, n);
    for (double& v : e) {
        if (rng.uniform01() < zero_chance) v = 0.0;
    }
    return e;
}

// Threshold in (1, 50).
inline double random_threshold(Rng& rng) { return rng.uniform(1.001, 50.0); }

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(p[i - 1], p[random_index(rng, i)]);
    }
    return p;
}

}  // namespace driftguard::testsupport
