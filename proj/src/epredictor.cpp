#include "driftguard/epredictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftguard/numeric.hpp"

namespace driftguard::epredictor {

EVector evaluate_batch(const ScoreFunction& score, std::span<const Observation> batch) {
    if (batch.empty()) throw std::domain_error("evaluate_batch: empty batch");
    const std::size_t d = batch.front().dim();
    for (const Observation& z : batch) {
        require_finite(z);
        if (z.dim() != d) throw std::invalid_argument("evaluate_batch: dimension mismatch");
    }

    std::vector<double> s = score.score_all(batch);
    for (double v : s) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::domain_error("score function produced a negative or non-finite score");
        }
    }

    const double total = multiset_sum(s);
    EVector alpha(batch.size());
    if (total == 0.0) {
        // Every observation scored 0: nothing distinguishes them, so each
        // gets the neutral e-value 1 (their mean must still be 1).
        std::fill(alpha.begin(), alpha.end(), 1.0);
        return alpha;
    }
    const double m = static_cast<double>(batch.size());
    for (std::size_t i = 0; i < s.size(); ++i) alpha[i] = (m * s[i]) / total;
    return alpha;
}

EValue conformal_e(const ScoreFunction& score, const Bag& bag, const Observation& z) {
    std::vector<Observation> batch(bag.items().begin(), bag.items().end());
    batch.push_back(z);
    return evaluate_batch(score, batch).back();
}

namespace {

// --- streaming engines ------------------------------------------------------

struct StreamEngine {
    virtual ~StreamEngine() = default;
    virtual double push(const Observation& z) = 0;
};

// Constant score: every alpha is exactly 1 at any batch size, so no state is
// needed beyond validation done by the caller.
struct ConstantEngine final : StreamEngine {
    double push(const Observation&) override { return 1.0; }
};

// Generic fallback: keep the effective batch (full prefix, or the trailing
// window) and rerun the batch evaluation each step. Quadratic over a run but
// correct for every score function.
struct RecomputeEngine final : StreamEngine {
    const ScoreFunction* score;
    std::size_t window;
    std::vector<Observation> buf;

    RecomputeEngine(const ScoreFunction& sc, std::size_t w) : score(&sc), window(w) {}

    double push(const Observation& z) override {
        buf.push_back(z);
        if (window > 0 && buf.size() > window) buf.erase(buf.begin());
        return evaluate_batch(*score, buf).back();
    }
};

// Incremental engine for the k-nearest-neighbour score over the full prefix.
//
// Per point j it maintains a max-heap of the (at most) k smallest distances
// from j to every other point seen so far, plus the cached score s_j derived
// from that heap. A new arrival can only shrink entries of that multiset, so
// each step costs one distance + one heap-top comparison per existing point,
// with a heap rebuild only when the k-nearest set actually changes.
//
// Bit-exactness with the batch path rests on two invariants: (a) the heap
// holds exactly the multiset of k smallest distances, which is what the batch
// scorer selects, and scores are always formed by summing those values in
// ascending order; (b) the batch divisor is the sum of all scores sorted
// ascending, which this engine reproduces by keeping the score multiset in a
// sorted vector and reducing it with the same canonical summation.
struct KnnEngine final : StreamEngine {
    std::size_t k;
    std::size_t dim = 0;
    std::size_t m = 0;
    std::vector<double> coords;  // row-major, m * dim; flat so the distance loop stays cache-friendly
    std::vector<std::vector<double>> heaps;
    std::vector<double> scores;
    std::vector<double> sorted_scores;
    std::vector<double> scratch;

    explicit KnnEngine(std::size_t kk) : k(kk) {}

    double score_from_heap(const std::vector<double>& heap) {
        if (heap.empty()) return 0.0;
        scratch.assign(heap.begin(), heap.end());
        std::sort(scratch.begin(), scratch.end());
        double acc = 0.0;
        for (double v : scratch) acc += v;
        return acc / static_cast<double>(scratch.size());
    }

    void replace_sorted(double old_value, double new_value) {
        auto it = std::lower_bound(sorted_scores.begin(), sorted_scores.end(), old_value);
        sorted_scores.erase(it);
        insert_sorted(new_value);
    }

    void insert_sorted(double value) {
        sorted_scores.insert(
            std::lower_bound(sorted_scores.begin(), sorted_scores.end(), value), value);
    }

    double push(const Observation& z) override {
        if (m == 0) dim = z.dim();
        const double* zp = z.values.data();
        std::vector<double> new_heap;
        new_heap.reserve(k);

        for (std::size_t j = 0; j < m; ++j) {
            const double d = distance_raw(zp, coords.data() + j * dim, dim);

            std::vector<double>& h = heaps[j];
            bool changed = false;
            if (h.size() < k) {
                h.push_back(d);
                std::push_heap(h.begin(), h.end());
                changed = true;
            } else if (d < h.front()) {
                std::pop_heap(h.begin(), h.end());
                h.back() = d;
                std::push_heap(h.begin(), h.end());
                changed = true;
            }
            if (changed) {
                const double updated = score_from_heap(h);
                if (updated != scores[j]) {
                    replace_sorted(scores[j], updated);
                    scores[j] = updated;
                }
            }

            if (new_heap.size() < k) {
                new_heap.push_back(d);
                std::push_heap(new_heap.begin(), new_heap.end());
            } else if (d < new_heap.front()) {
                std::pop_heap(new_heap.begin(), new_heap.end());
                new_heap.back() = d;
                std::push_heap(new_heap.begin(), new_heap.end());
            }
        }

        const double s_new = score_from_heap(new_heap);
        coords.insert(coords.end(), z.values.begin(), z.values.end());
        ++m;
        heaps.push_back(std::move(new_heap));
        scores.push_back(s_new);
        insert_sorted(s_new);

        const double total = sorted_sum(sorted_scores);
        if (total == 0.0) return 1.0;
        return (static_cast<double>(m) * s_new) / total;
    }
};

}  // namespace

struct EValueStream::Impl {
    std::unique_ptr<StreamEngine> engine;
    std::size_t n = 0;
    std::size_t dim = 0;
};

EValueStream::EValueStream(const ScoreFunction& score, StreamOptions opts) : impl_(new Impl) {
    if (dynamic_cast<const ConstantScore*>(&score) != nullptr) {
        impl_->engine = std::make_unique<ConstantEngine>();
    } else if (const auto* knn = dynamic_cast<const KnnScore*>(&score);
               knn != nullptr && opts.window == 0) {
        impl_->engine = std::make_unique<KnnEngine>(knn->k());
    } else {
        impl_->engine = std::make_unique<RecomputeEngine>(score, opts.window);
    }
}

EValueStream::~EValueStream() = default;
EValueStream::EValueStream(EValueStream&&) noexcept = default;
EValueStream& EValueStream::operator=(EValueStream&&) noexcept = default;

EValue EValueStream::push(const Observation& z) {
    require_finite(z);
    if (impl_->n == 0) {
        impl_->dim = z.dim();
    } else if (z.dim() != impl_->dim) {
        throw std::invalid_argument("stream observation dimension mismatch");
    }
    ++impl_->n;
    return impl_->engine->push(z);
}

std::size_t EValueStream::count() const { return impl_->n; }

EVector stream_e_values(const ScoreFunction& score, std::span<const Observation> stream) {
    EValueStream s(score);
    EVector out;
    out.reserve(stream.size());
    for (const Observation& z : stream) out.push_back(s.push(z));
    return out;
}

}  // namespace driftguard::epredictor
