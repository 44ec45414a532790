#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace driftguard::epredictor {

// One multivariate observation. Coordinates must be finite; dimension is
// fixed per stream and enforced by Bag.
struct Observation {
    std::vector<double> values;

    Observation() = default;
    explicit Observation(std::vector<double> v) : values(std::move(v)) {}
    Observation(std::initializer_list<double> v) : values(v) {}

    std::size_t dim() const { return values.size(); }

    bool finite() const {
        for (double x : values) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    }
};

inline void require_finite(const Observation& z) {
    if (!z.finite()) throw std::domain_error("observation has non-finite coordinate");
}

// Append-only collection of observations with a common dimension. Order of
// insertion is retained for storage, but all consumers treat the contents as
// a multiset: nothing downstream may depend on insertion order.
class Bag {
public:
    Bag() = default;

    explicit Bag(std::vector<Observation> items) {
        for (auto& z : items) add(std::move(z));
    }

    void add(Observation z) {
        require_finite(z);
        if (!items_.empty() && z.dim() != items_.front().dim()) {
            throw std::invalid_argument("observation dimension mismatch in bag");
        }
        items_.push_back(std::move(z));
    }

    std::span<const Observation> items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const Observation& operator[](std::size_t i) const { return items_[i]; }

    std::size_t dim() const { return items_.empty() ? 0 : items_.front().dim(); }

private:
    std::vector<Observation> items_;
};

// Shared distance kernel: every scoring path (batch and streaming) must go
// through the same operation sequence so their doubles agree bit-for-bit.
// Dimension 1 short-circuits to |a - b|, which is the exact value (sqrt of
// the rounded square would be both slower and occasionally one ulp off).
inline double distance_raw(const double* a, const double* b, std::size_t dim) {
    if (dim == 1) return std::abs(a[0] - b[0]);
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline double euclidean_distance(const Observation& a, const Observation& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in distance");
    return distance_raw(a.values.data(), b.values.data(), a.values.size());
}

}  // namespace driftguard::epredictor
