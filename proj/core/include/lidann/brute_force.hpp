#pragma once

#include <span>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

/// Exact k-nearest-neighbor scan. Returns the k closest base vectors in
/// ascending distance order, ties broken toward the smaller id. This is the
/// ground-truth oracle for labeling, intrinsic-dimension profiles, and recall.
std::vector<Neighbor> brute_force_knn(const VectorStore& store,
                                      std::span<const float> query,
                                      std::size_t k);

/// brute_force_knn over every row of `queries`, parallelized over queries.
/// Output order is by query index regardless of thread count.
std::vector<std::vector<Neighbor>> brute_force_knn_batch(const VectorStore& store,
                                                         const VectorStore& queries,
                                                         std::size_t k,
                                                         std::size_t nthreads = 0);

}  // namespace lidann
