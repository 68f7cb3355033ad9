#pragma once

#include <cstdint>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

/// Ascending query-to-neighbor distances with the reference radius w that
/// bounds the support. The maximum-likelihood estimate below reads the local
/// growth rate of neighbors out of this profile.
struct DistanceProfile {
    std::vector<double> distances;  // x_1 <= ... <= x_k, each in (0, w]
    double w = 0.0;
};

/// Maximum-likelihood local intrinsic dimension:
///   lid = ( (1/k) * sum_i ln(w / x_i) )^-1
/// Terms with x_i == w contribute zero. Throws DegenerateDistances when the
/// sum vanishes (all x_i == w) or any x_i == 0; UsageError on malformed input.
double mle_lid(const DistanceProfile& profile);

struct BatchLidResult {
    // values[i] is valid iff ok[i]; failed entries keep 0.0.
    std::vector<double> values;
    std::vector<std::uint8_t> ok;
    std::size_t failures = 0;
};

/// Per subject vector: take its k nearest base neighbors, set w to the k-th
/// distance, drop leading zero distances (exact duplicates, including the
/// self-match when the subject lives in the base), and estimate. Degenerate
/// profiles are recorded, not thrown; the batch keeps going.
BatchLidResult batch_lid(const VectorStore& subject, const VectorStore& base,
                         std::size_t k, std::size_t nthreads = 0);

/// Persists one 1-dimensional F32 record per subject; failed estimates are
/// written as the sentinel -1 (valid estimates are always positive).
void save_lid_values(const BatchLidResult& result, const std::string& path);

}  // namespace lidann
