#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

/// On-disk component encodings. Every record is a 4-byte little-endian
/// component count followed by that many components; all records in a file
/// share one count.
enum class VecFormat {
    F32,  // 4-byte little-endian float per component (.fvecs)
    U8,   // 1-byte unsigned integer per component (.bvecs)
    I32,  // 4-byte little-endian integer per component (.ivecs)
};

/// Picks the format from a conventional file extension; throws UsageError
/// for anything unrecognized.
VecFormat format_from_extension(const std::string& path);

VectorStore read_vectors(const std::string& path, VecFormat format);
void write_vectors(const VectorStore& store, const std::string& path, VecFormat format);

/// Contiguous-prefix carving of one store into training / query / base parts.
/// shuffle=true applies a seeded permutation first (for synthetic data only;
/// the default mirrors the prefix protocol used by the public datasets).
struct SplitSpec {
    std::size_t training_count = 0;
    std::size_t query_count = 0;
    bool shuffle = false;
    std::uint64_t seed = 0;
};

struct SplitResult {
    VectorStore new_base;
    VectorStore training;
    VectorStore queries;
    // Row i of each output store came from original_ids[i] in the input.
    std::vector<std::uint32_t> base_original_ids;
    std::vector<std::uint32_t> training_original_ids;
    std::vector<std::uint32_t> query_original_ids;
};

SplitResult split_dataset(const VectorStore& base, const SplitSpec& spec);

/// Exact nearest-neighbor table: per query, the G closest base ids with
/// distances in ascending order.
class GroundTruthTable {
public:
    GroundTruthTable() = default;
    GroundTruthTable(std::size_t g, std::size_t query_count)
        : g_(g), flat_(g * query_count) {}

    std::size_t g() const { return g_; }
    std::size_t query_count() const { return g_ == 0 ? 0 : flat_.size() / g_; }

    std::span<const Neighbor> row(std::size_t q) const { return {flat_.data() + q * g_, g_}; }
    std::span<Neighbor> row_mut(std::size_t q) { return {flat_.data() + q * g_, g_}; }

    friend bool operator==(const GroundTruthTable&, const GroundTruthTable&) = default;

private:
    std::size_t g_ = 0;
    std::vector<Neighbor> flat_;
};

GroundTruthTable compute_ground_truth(const VectorStore& base, const VectorStore& queries,
                                      std::size_t g, std::size_t nthreads = 0);

/// Ids go to ids_path in the I32 record layout (one record per query);
/// distances go to dist_path in the F32 layout.
void save_ground_truth(const GroundTruthTable& table, const std::string& ids_path,
                       const std::string& dist_path);
GroundTruthTable load_ground_truth(const std::string& ids_path, const std::string& dist_path);

/// compute_ground_truth + save_ground_truth in one step.
GroundTruthTable compute_and_save_ground_truth(const VectorStore& base,
                                               const VectorStore& queries, std::size_t g,
                                               const std::string& ids_path,
                                               const std::string& dist_path,
                                               std::size_t nthreads = 0);

}  // namespace lidann
