#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "driftguard/observation.hpp"
#include "driftguard/scores.hpp"

namespace driftguard::epredictor {

using EValue = double;
using EVector = std::vector<double>;

// Batch e-values for a nonempty batch: alpha_i = m * s_i / sum(s), where s_i
// scores each observation against the rest of the batch. The alphas are
// nonnegative and average to 1; when every score is 0 the batch is fully
// exchangeable-looking and all alphas are set to 1. The result depends only
// on the multiset of observations: permuting the batch permutes the alphas
// bit-for-bit.
EVector evaluate_batch(const ScoreFunction& score, std::span<const Observation> batch);

// E-value of a fresh observation z against the previously seen bag: the last
// alpha of evaluate_batch on bag + z. Equals 1 when the bag is empty.
EValue conformal_e(const ScoreFunction& score, const Bag& bag, const Observation& z);

// Online producer of conformal e-values: push observations one at a time and
// get back exactly the value conformal_e would give against the prefix seen
// so far. Guaranteed bit-identical to the batch path at every step.
//
// window == 0 (default) scores against the full prefix. window == w > 0
// scores against the most recent w observations only (the new one included),
// trading memory and exactness-of-history for bounded per-step cost.
struct StreamOptions {
    std::size_t window = 0;
};

class EValueStream {
public:
    using Options = StreamOptions;

    explicit EValueStream(const ScoreFunction& score, StreamOptions opts = {});
    ~EValueStream();

    EValueStream(const EValueStream&) = delete;
    EValueStream& operator=(const EValueStream&) = delete;
    EValueStream(EValueStream&&) noexcept;
    EValueStream& operator=(EValueStream&&) noexcept;

    // Feed the next observation; returns its e-value.
    EValue push(const Observation& z);

    std::size_t count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// E-values of a whole sequence, processed online: element i is the e-value
// of stream[i] against stream[0..i].
EVector stream_e_values(const ScoreFunction& score, std::span<const Observation> stream);

}  // namespace driftguard::epredictor
