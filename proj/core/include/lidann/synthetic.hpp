#pragma once

#include <cstdint>

#include "lidann/vector_store.hpp"

namespace lidann {

/// n points uniform in the unit ball of the given dimension (seeded).
/// The local intrinsic dimension of every interior point equals `dim`.
VectorStore sample_uniform_ball(std::size_t n, std::size_t dim, std::uint64_t seed);

/// Synthetic descriptor mixture in the style of image feature datasets:
/// points live near low-dimensional linear patches of varying intrinsic
/// dimension embedded in the ambient space, with components in [0, 255].
/// Cluster membership is i.i.d. per point, so contiguous-prefix splits
/// stay unbiased.
struct ClusteredParams {
    std::size_t n = 100000;
    std::size_t dim = 128;
    std::size_t clusters = 32;
    std::size_t intrinsic_min = 2;   // cycled across clusters
    std::size_t intrinsic_max = 24;
    double scale_min = 20.0;  // per-cluster spread
    double scale_max = 45.0;
    // Half-width of the centre box as a fraction of the value range. Small
    // values give overlapping patches (one connected manifold, like real
    // descriptor data); large values give isolated islands.
    double center_spread = 0.12;
    // Centre-walk step as a fraction of the sum of adjacent patch radii;
    // below 1 the patches overlap.
    double chain_step = 0.8;
    double ambient_noise = 2.0;  // full-dimensional noise floor
    float value_lo = 0.0f;       // components clamped to this range
    float value_hi = 255.0f;
    bool quantize = false;       // round components to integers (u8-representable)
    std::uint64_t seed = 0;
};

VectorStore make_clustered_descriptors(const ClusteredParams& params);

}  // namespace lidann
