#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace driftguard {

// splitmix64 scramble; used to derive independent per-trial seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-pinned output transforms. The standard pins the
// engine's bit stream but not the distribution adaptors, so uniform and
// gaussian draws go through explicit formulas to keep generated streams
// stable across standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_bits() { return engine_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, caching the second variate.
    double gaussian(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + sd * r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace driftguard
