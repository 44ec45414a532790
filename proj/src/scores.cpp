#include "driftguard/scores.hpp"

#include <algorithm>
#include <stdexcept>

#include "driftguard/numeric.hpp"

namespace driftguard::epredictor {

double ScoreFunction::score_in(std::span<const Observation> all, std::size_t i) const {
    if (i >= all.size()) throw std::out_of_range("score_in index out of range");
    std::vector<Observation> others;
    others.reserve(all.size() - 1);
    for (std::size_t j = 0; j < all.size(); ++j) {
        if (j != i) others.push_back(all[j]);
    }
    return score(all[i], others);
}

std::vector<double> ScoreFunction::score_all(std::span<const Observation> all) const {
    std::vector<double> out(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) out[i] = score_in(all, i);
    return out;
}

KnnScore::KnnScore(std::size_t k) : k_(k) {
    if (k == 0) throw std::invalid_argument("knn score requires k >= 1");
}

namespace {

// Sum of the k smallest values divided by their count. `dists` is consumed.
// The k smallest are summed in ascending order so the result depends only on
// the multiset of distances.
double mean_of_k_smallest(std::vector<double>& dists, std::size_t k) {
    if (dists.empty()) return 0.0;
    const std::size_t kk = std::min(k, dists.size());
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kk), dists.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < kk; ++i) acc += dists[i];
    return acc / static_cast<double>(kk);
}

}  // namespace

double KnnScore::score(const Observation& z, std::span<const Observation> others) const {
    std::vector<double> dists;
    dists.reserve(others.size());
    for (const Observation& other : others) dists.push_back(euclidean_distance(z, other));
    return mean_of_k_smallest(dists, k_);
}

std::string KnnScore::name() const { return "knn"; }

namespace {

// Coordinate-wise mean of a batch, each coordinate reduced canonically
// (values sorted ascending before summing) so the centroid is identical for
// any ordering of the batch.
Observation batch_centroid(std::span<const Observation> all) {
    const std::size_t m = all.size();
    const std::size_t d = all.front().dim();
    Observation mean;
    mean.values.resize(d);
    std::vector<double> column(m);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < m; ++i) column[i] = all[i].values[j];
        std::sort(column.begin(), column.end());
        mean.values[j] = sorted_sum(column) / static_cast<double>(m);
    }
    return mean;
}

}  // namespace

double DistToMeanScore::score(const Observation& z, std::span<const Observation> others) const {
    std::vector<Observation> full(others.begin(), others.end());
    full.push_back(z);
    return euclidean_distance(z, batch_centroid(full));
}

std::vector<double> DistToMeanScore::score_all(std::span<const Observation> all) const {
    std::vector<double> out(all.size());
    if (all.empty()) return out;
    const Observation mean = batch_centroid(all);
    for (std::size_t i = 0; i < all.size(); ++i) out[i] = euclidean_distance(all[i], mean);
    return out;
}

std::string DistToMeanScore::name() const { return "dist-mean"; }

double ConstantScore::score(const Observation&, std::span<const Observation>) const { return 1.0; }

std::string ConstantScore::name() const { return "const"; }

double knn_score(const Observation& z, const Bag& bag, std::size_t k) {
    return KnnScore(k).score(z, bag.items());
}

std::unique_ptr<ScoreFunction> make_score(const std::string& name, std::size_t k) {
    if (name == "knn") return std::make_unique<KnnScore>(k);
    if (name == "dist-mean") return std::make_unique<DistToMeanScore>();
    if (name == "const") return std::make_unique<ConstantScore>();
    throw std::invalid_argument("unknown score function: " + name);
}

}  // namespace driftguard::epredictor
