#pragma once

#include <span>

namespace lidann {

/// Squared Euclidean distance with double accumulation. Used for every
/// internal comparison; monotone in the true distance so rankings agree.
double l2_distance_sq(std::span<const float> a, std::span<const float> b);

/// Euclidean distance (sqrt of the squared form). Reported distances use this.
double l2_distance(std::span<const float> a, std::span<const float> b);

namespace detail {
/// Unchecked kernel for hot loops; caller guarantees equal lengths.
double l2_sq_unchecked(const float* a, const float* b, std::size_t n);
}  // namespace detail

}  // namespace lidann
