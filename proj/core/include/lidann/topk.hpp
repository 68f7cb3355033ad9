#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lidann/error.hpp"

namespace lidann {

/// Bounded max-heap keeping the k smallest (distance, id) pairs seen.
/// Ties break toward the smaller id, so the final contents depend only on
/// the multiset of insertions, never on their order.
class TopKHeap {
public:
    struct Entry {
        double dist;
        std::uint32_t id;
    };

    explicit TopKHeap(std::size_t k) : k_(k) {
        if (k == 0) throw UsageError("TopKHeap: capacity must be positive");
        heap_.reserve(k);
    }

    std::size_t capacity() const { return k_; }
    std::size_t size() const { return heap_.size(); }
    bool full() const { return heap_.size() == k_; }

    /// Worst (largest) entry currently kept; only valid when non-empty.
    const Entry& worst() const { return heap_.front(); }

    /// True when (dist, id) would be accepted right now.
    bool would_accept(double dist, std::uint32_t id) const {
        return !full() || less(dist, id, heap_.front());
    }

    void push(double dist, std::uint32_t id) {
        if (!full()) {
            heap_.push_back({dist, id});
            std::push_heap(heap_.begin(), heap_.end(), cmp);
        } else if (less(dist, id, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), cmp);
            heap_.back() = {dist, id};
            std::push_heap(heap_.begin(), heap_.end(), cmp);
        }
    }

    /// Contents in ascending (dist, id) order; leaves the heap empty.
    std::vector<Entry> extract_sorted() {
        std::sort_heap(heap_.begin(), heap_.end(), cmp);
        return std::move(heap_);
    }

private:
    static bool less(double dist, std::uint32_t id, const Entry& e) {
        return dist < e.dist || (dist == e.dist && id < e.id);
    }
    // Max-heap on (dist, id): the root is the eviction candidate.
    static bool cmp(const Entry& a, const Entry& b) {
        return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
    }

    std::size_t k_;
    std::vector<Entry> heap_;
};

}  // namespace lidann
