#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

struct KMeansModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<float> centroids;  // k x dim, row-major
    double distortion = 0.0;       // mean squared assignment distance
    std::vector<double> distortion_history;  // one entry per Lloyd iteration

    std::span<const float> centroid(std::size_t c) const {
        return {centroids.data() + c * dim, dim};
    }
};

/// Lloyd iterations from a seeded sample of k distinct input points.
/// Stops when assignments are stable or max_iters is reached. Empty clusters
/// are re-seeded with the point currently farthest from its centroid.
/// Bitwise deterministic for a given (data, k, seed) at any thread count:
/// assignment scans parallelize, centroid accumulation stays sequential.
KMeansModel kmeans_train(const VectorStore& data, std::size_t k, std::size_t max_iters,
                         std::uint64_t seed, std::size_t nthreads = 0);

/// Index of the nearest centroid (squared distance, ties to the smaller index).
std::uint32_t nearest_centroid(const KMeansModel& model, std::span<const float> v);

}  // namespace lidann
