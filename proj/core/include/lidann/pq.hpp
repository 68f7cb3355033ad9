#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

/// Product-quantizer codebook: the vector space is cut into m contiguous
/// subspaces of dsub = dim/m components, each with its own ksub centroids.
/// The full codebook is the Cartesian product of the subspace codebooks.
struct PqCodebook {
    std::size_t m = 0;
    std::size_t dsub = 0;
    std::size_t ksub = 0;

    std::size_t dim() const { return m * dsub; }

    // m x ksub x dsub, row-major by (subspace, centroid).
    std::vector<float> centroids;

    std::span<const float> centroid(std::size_t subspace, std::size_t code) const {
        return {centroids.data() + (subspace * ksub + code) * dsub, dsub};
    }
};

/// Independent k-means per subspace over the given training vectors.
/// ksub must stay within a byte (codes are stored as m bytes).
PqCodebook pq_train(const VectorStore& training, std::size_t m, std::size_t ksub,
                    std::uint64_t seed, std::size_t max_iters = 25, std::size_t nthreads = 0);

/// Per subspace, the index of the nearest centroid (ties to the lower index).
void pq_encode(const PqCodebook& codebook, std::span<const float> v,
               std::span<std::uint8_t> code_out);

/// Concatenation of the selected subspace centroids.
std::vector<float> pq_decode(const PqCodebook& codebook, std::span<const std::uint8_t> code);

}  // namespace lidann
