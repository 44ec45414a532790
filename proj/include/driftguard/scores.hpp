#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "driftguard/observation.hpp"

namespace driftguard::epredictor {

// Nonconformity score. score(z, others) rates how unusual z looks relative
// to the remaining observations of its batch ("others" never contains the
// copy of z being scored). Implementations must be permutation-invariant in
// `others` and must return the same double for the same multiset of inputs.
class ScoreFunction {
public:
    virtual ~ScoreFunction() = default;

    virtual double score(const Observation& z, std::span<const Observation> others) const = 0;

    // Score of all[i] within the batch `all`, leaving out the copy at i.
    virtual double score_in(std::span<const Observation> all, std::size_t i) const;

    // Scores of every element of the batch. Default loops over score_in;
    // implementations override when batch-level sharing is cheaper.
    virtual std::vector<double> score_all(std::span<const Observation> all) const;

    virtual std::string name() const = 0;
};

// Average distance to the k nearest other observations (fewer when the batch
// is small; 0 for a singleton batch).
class KnnScore final : public ScoreFunction {
public:
    explicit KnnScore(std::size_t k);

    double score(const Observation& z, std::span<const Observation> others) const override;
    std::string name() const override;

    std::size_t k() const { return k_; }

private:
    std::size_t k_;
};

// Distance from z to the coordinate-wise mean of the full batch (z included).
class DistToMeanScore final : public ScoreFunction {
public:
    double score(const Observation& z, std::span<const Observation> others) const override;
    std::vector<double> score_all(std::span<const Observation> all) const override;
    std::string name() const override;
};

// Uninformative score: every observation gets 1.
class ConstantScore final : public ScoreFunction {
public:
    double score(const Observation& z, std::span<const Observation> others) const override;
    std::string name() const override;
};

// Average distance from z to its k nearest neighbours in `bag`.
double knn_score(const Observation& z, const Bag& bag, std::size_t k);

// Factory for the built-in scores: "knn", "dist-mean", "const".
std::unique_ptr<ScoreFunction> make_score(const std::string& name, std::size_t k = 1);

}  // namespace driftguard::epredictor
