#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidann/hnsw.hpp"
#include "lidann/ivf_pq.hpp"
#include "lidann/policy.hpp"
#include "lidann/vector_store.hpp"

namespace lidann {

/// One labeled example: which training vector, its estimated intrinsic
/// dimension, the minimum search cost that reached its ground-truth nearest
/// neighbor, and the log2-scale regression target.
struct TrainingRow {
    std::uint32_t id = 0;  // row in the training store this came from
    double lid_true = 0.0;
    std::uint64_t min_cost = 1;
    double target = 0.0;  // log2(min_cost), exactly
};

struct LabeledData {
    CostKind cost_kind = CostKind::DistanceEvals;
    VectorStore vectors;  // surviving training vectors, aligned with rows
    std::vector<TrainingRow> rows;
    std::size_t dropped_not_reached = 0;
    std::size_t dropped_degenerate = 0;
};

/// Per training vector: an exhaustive top-k_lid scan supplies both the
/// ground-truth neighbor (rank 1) and the distance profile for the intrinsic
/// dimension estimate; the index labeler then measures the minimum search
/// cost to reach that neighbor. Rows whose label never reached the target or
/// whose profile was degenerate are dropped and counted.
LabeledData generate_training_data(const HnswGraph& graph, const VectorStore& base,
                                   const VectorStore& training, std::size_t k_lid = 1000,
                                   std::size_t nthreads = 0);
LabeledData generate_training_data(const IvfPqIndex& index, const VectorStore& base,
                                   const VectorStore& training, std::size_t k_lid = 1000,
                                   std::size_t nthreads = 0);

struct RegressionReport {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

struct Stage1Result {
    MlpWeights net;
    Standardizer input_std;
    RegressionReport holdout;
};

struct VoResult {
    VoModel model;
    RegressionReport holdout;
};

/// Batch size rule from the training protocol: between 200 and 1000
/// depending on the row count (and never above the row count itself).
std::size_t default_batch_size(std::size_t rows);

/// Stage 1: query vector -> intrinsic dimension, hidden widths 200/200,
/// 200 epochs. A holdout fraction is carved off (seeded) for the report.
Stage1Result train_stage1(const LabeledData& data, TrainConfig config = {},
                          double holdout_fraction = 0.1);

/// Stage 2: intrinsic dimension -> log2 search cost, hidden widths 10/10,
/// 20 epochs.
MlpWeights train_stage2(const LabeledData& data, TrainConfig config = {});

/// Single-network ablation: query vector -> log2 search cost with hidden
/// widths 200/200/1/10/10 and the stage-1 training protocol.
VoResult train_vo(const LabeledData& data, TrainConfig config = {});

/// Floor for the budget rule: the 5th percentile of the observed minimum
/// costs (never below 1).
std::uint64_t default_thresh(const std::vector<TrainingRow>& rows);

TerminationPolicy make_policy(Stage1Result stage1, MlpWeights stage2, const LabeledData& data,
                              std::uint64_t thresh_override = 0, double multiplier = 1.0);

/// Columnar text file (id, lid_true, min_cost, target) for inspection;
/// doubles are printed with round-trip precision.
void save_rows(const LabeledData& data, const std::string& path);

/// Reload the rows and re-attach their vectors from the training store.
LabeledData load_rows(const std::string& path, const VectorStore& training);

}  // namespace lidann
