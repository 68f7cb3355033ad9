#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lidann/error.hpp"

namespace lidann {

/// Dense row-major collection of fixed-dimension float vectors with implicit
/// ids 0..count-1. Immutable once handed to an index.
class VectorStore {
public:
    VectorStore() = default;

    VectorStore(std::size_t dim, std::size_t count)
        : dim_(dim), data_(dim * count) {
        if (dim == 0) throw UsageError("VectorStore: dim must be positive");
    }

    /// Takes ownership of row-major data; data.size() must be a multiple of dim.
    VectorStore(std::size_t dim, std::vector<float> data) : dim_(dim), data_(std::move(data)) {
        if (dim == 0) throw UsageError("VectorStore: dim must be positive");
        if (data_.size() % dim_ != 0)
            throw UsageError("VectorStore: data size is not a multiple of dim");
    }

    std::size_t dim() const { return dim_; }
    std::size_t count() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const float> row(std::size_t id) const {
        return {data_.data() + id * dim_, dim_};
    }
    std::span<float> row_mut(std::size_t id) {
        return {data_.data() + id * dim_, dim_};
    }

    const std::vector<float>& data() const { return data_; }

    void append(std::span<const float> v) {
        if (v.size() != dim_) throw UsageError("VectorStore::append: dimension mismatch");
        data_.insert(data_.end(), v.begin(), v.end());
    }

    void reserve_rows(std::size_t n) { data_.reserve(n * dim_); }

    /// Throws FormatError if any component is non-finite.
    void check_finite() const;

private:
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

/// One search hit: vector id plus Euclidean distance to the query.
/// Distances are stored in float, matching the on-disk ground-truth layout;
/// rankings are always computed in double before narrowing.
struct Neighbor {
    std::uint32_t id = 0;
    float dist = 0.0f;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

}  // namespace lidann
