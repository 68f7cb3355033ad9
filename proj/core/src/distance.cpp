#include "lidann/distance.hpp"

#include <cmath>

#include "lidann/error.hpp"

namespace lidann {

namespace detail {

double l2_sq_unchecked(const float* a, const float* b, std::size_t n) {
    // Four double accumulators keep the FP dependency chain short enough for
    // the compiler to vectorize the widening loop.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = static_cast<double>(a[i]) - b[i];
        const double d1 = static_cast<double>(a[i + 1]) - b[i + 1];
        const double d2 = static_cast<double>(a[i + 2]) - b[i + 2];
        const double d3 = static_cast<double>(a[i + 3]) - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        s0 += d * d;
    }
    return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

double l2_distance_sq(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw UsageError("l2_distance: dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    return detail::l2_sq_unchecked(a.data(), b.data(), a.size());
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(l2_distance_sq(a, b));
}

}  // namespace lidann
