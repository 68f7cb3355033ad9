#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidann/dataset_io.hpp"
#include "lidann/hnsw.hpp"
#include "lidann/ivf_pq.hpp"
#include "lidann/pipeline.hpp"
#include "lidann/policy.hpp"

namespace lidann {

enum class RecallMode {
    At1,    // top-1 returned id attains the ground-truth top-1 distance
    At100,  // any of the top-100 returned ids attains it
};

/// Per-query indicator (0 or 1). Ties count as success: a returned id whose
/// true distance equals the ground-truth top-1 distance is "one of" the
/// ground truth. Empty results count as failure.
int recall_indicator(std::span<const Neighbor> results, std::span<const Neighbor> gt_row,
                     RecallMode mode);

struct TuneResult {
    std::uint64_t param = 0;   // efSearch or nprobe
    double achieved = 0.0;     // measured mean recall at `param`
    bool reached = false;      // false: target unattainable even at the maximum
};

/// Smallest fixed parameter whose mean recall over the queries meets
/// target - tol (galloping upper bound, then bisection).
TuneResult tune_fixed_hnsw(const HnswGraph& graph, const VectorStore& queries,
                           const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                           double target, double tol = 0.001, std::size_t nthreads = 0);
TuneResult tune_fixed_ivf(const IvfPqIndex& index, const VectorStore& queries,
                          const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                          double target, double tol = 0.001, std::size_t nthreads = 0);

struct MultiplierTune {
    double multiplier = 1.0;
    double achieved = 0.0;
    bool reached = false;
};

/// Log-scale bisection of the budget-rule multiplier over [2^-10, 2^10]
/// (40 iterations) for the smallest value meeting target - tol. `tc` holds
/// the raw per-query log2-cost predictions, evaluated once by the caller.
MultiplierTune tune_multiplier_hnsw(const HnswGraph& graph, const VectorStore& queries,
                                    const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                                    std::span<const double> tc, std::uint64_t thresh,
                                    double target, double tol = 0.001,
                                    std::size_t nthreads = 0);
MultiplierTune tune_multiplier_ivf(const IvfPqIndex& index, const VectorStore& queries,
                                   const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                                   std::span<const double> tc, std::uint64_t thresh,
                                   double target, double tol = 0.001,
                                   std::size_t nthreads = 0);

/// Convenience wrappers that evaluate the chain per query, tune, and write
/// the winning multiplier back into the model.
MultiplierTune tune_multiplier(TerminationPolicy& policy, const HnswGraph& graph,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol = 0.001, std::size_t nthreads = 0);
MultiplierTune tune_multiplier(TerminationPolicy& policy, const IvfPqIndex& index,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol = 0.001, std::size_t nthreads = 0);
MultiplierTune tune_multiplier(VoModel& model, const HnswGraph& graph,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol = 0.001, std::size_t nthreads = 0);
MultiplierTune tune_multiplier(VoModel& model, const IvfPqIndex& index,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol = 0.001, std::size_t nthreads = 0);

struct BenchRow {
    std::string method;          // fixed | tao | vo | real-lid
    double target = 0.0;
    double achieved_recall = 0.0;
    double mean_cost = 0.0;      // mean ndis (graph) or mean nprobe (quantization)
    double tuned_param = 0.0;    // efSearch / nprobe / multiplier
    bool reached = true;
    double mean_latency_us = 0.0;   // single-threaded wall clock, prediction included
    double prediction_us = 0.0;     // prediction overhead, reported separately
};

struct ExperimentConfig {
    // Exactly one index.
    const HnswGraph* graph = nullptr;
    const IvfPqIndex* ivf = nullptr;

    const VectorStore* queries = nullptr;
    const GroundTruthTable* gt = nullptr;

    TerminationPolicy* policy = nullptr;  // enables "tao"; multiplier written back
    VoModel* vo = nullptr;                // enables "vo"
    std::vector<double> query_true_lids;  // enables "real-lid" (one per query)

    std::vector<double> targets;                        // recall targets, each in (0, 1]
    std::optional<RecallMode> metric;                   // default: At1 graph, At100 ivf
    double tol = 0.001;
    std::vector<std::string> methods = {"fixed", "tao", "vo", "real-lid"};

    const LabeledData* rows = nullptr;  // enables the LID-vs-cost histogram
    double hist_bin_width = 2.0;

    std::string out_prefix;  // empty: no files; else <prefix>.csv / _report.txt / _hist.csv
    std::size_t nthreads = 0;  // tuning only; latency measurement is single-threaded
};

std::vector<BenchRow> run_benchmark(const ExperimentConfig& config);

struct LidCostBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_cost = 0.0;
};

/// Mean minimum search cost per intrinsic-dimension bin (default width 2).
std::vector<LidCostBin> lid_cost_histogram(const std::vector<TrainingRow>& rows,
                                           double bin_width = 2.0);

/// CSV writers shared by the driver and the benchmark runner. Cost columns
/// are deterministic for fixed seeds; the trailing latency columns are not.
void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);
void write_bench_report(const ExperimentConfig& config, const std::vector<BenchRow>& rows,
                        const std::string& path);
void write_histogram_csv(const std::vector<LidCostBin>& bins, const std::string& path);

}  // namespace lidann
