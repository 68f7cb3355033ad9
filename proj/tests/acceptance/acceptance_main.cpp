// End-to-end acceptance suite. Builds a synthetic descriptor benchmark at
// desk scale, runs the full labeling/training/tuning pipeline on both index
// families, and prints one [PASS]/[FAIL] line per criterion. Exit status is
// the number of failed criteria.
//
// Real feature datasets are not bundled, so the suite substitutes a seeded
// clustered-manifold generator with the same shape (128-dim, byte-range
// components) and heterogeneous local intrinsic dimension.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lidann/bench.hpp"
#include "lidann/brute_force.hpp"
#include "lidann/dataset_io.hpp"
#include "lidann/distance.hpp"
#include "lidann/hnsw.hpp"
#include "lidann/ivf_pq.hpp"
#include "lidann/lid.hpp"
#include "lidann/mlp.hpp"
#include "lidann/pipeline.hpp"
#include "lidann/policy.hpp"
#include "lidann/synthetic.hpp"

using namespace lidann;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void progress(const std::string& msg) {
    std::fprintf(stderr, "  .. %s\n", msg.c_str());
    std::fflush(stderr);
}

struct Sizes {
    std::size_t total = 112000;
    std::size_t training = 10000;
    std::size_t queries = 2000;
    std::size_t k_lid = 1000;
    std::size_t clusters = 32;
    std::size_t intrinsic_max = 14;
    std::size_t nlist = 1024;
    std::size_t stage1_epochs = 200;
    std::size_t vo_epochs = 200;
    std::size_t ball_points = 50000;
};

struct World {
    Sizes sizes;
    std::string workdir;

    std::shared_ptr<VectorStore> base;
    VectorStore training;
    VectorStore queries;
    std::optional<GroundTruthTable> gt;
    std::optional<HnswGraph> graph;
    std::optional<IvfPqIndex> ivf;
    std::optional<LabeledData> hnsw_rows;
    std::optional<LabeledData> ivf_rows;
    std::optional<Stage1Result> stage1;
    std::optional<TerminationPolicy> hnsw_policy;
    std::optional<TerminationPolicy> ivf_policy;
    std::optional<VoModel> vo;
    std::optional<BatchLidResult> query_lids;
    std::optional<std::vector<BenchRow>> hnsw_bench;
    std::optional<std::vector<BenchRow>> ivf_bench;

    void ensure_dataset() {
        if (base) return;
        progress("generating clustered descriptor dataset");
        ClusteredParams p;
        p.n = sizes.total;
        p.dim = 128;
        p.clusters = sizes.clusters;
        p.intrinsic_min = 2;
        p.intrinsic_max = sizes.intrinsic_max;
        p.seed = 20250810;
        auto all = make_clustered_descriptors(p);
        auto split = split_dataset(
            all, {.training_count = sizes.training, .query_count = sizes.queries});
        base = std::make_shared<VectorStore>(std::move(split.new_base));
        training = std::move(split.training);
        queries = std::move(split.queries);
    }

    const GroundTruthTable& ensure_gt() {
        ensure_dataset();
        if (!gt) {
            progress("computing exact ground truth for queries");
            gt = compute_ground_truth(*base, queries, 100);
        }
        return *gt;
    }

    const HnswGraph& ensure_graph() {
        ensure_dataset();
        if (!graph) {
            progress("building graph index");
            graph = hnsw_build(base, {.M = 16, .ef_construction = 200, .seed = 7});
        }
        return *graph;
    }

    const IvfPqIndex& ensure_ivf() {
        ensure_dataset();
        if (!ivf) {
            progress("building quantization index (nlist=" + std::to_string(sizes.nlist) + ")");
            ivf = ivf_build(*base, {.nlist = sizes.nlist,
                                    .m = 8,
                                    .ksub = 256,
                                    .seed = 9,
                                    .coarse_iters = 20,
                                    .pq_iters = 20});
        }
        return *ivf;
    }

    const LabeledData& ensure_hnsw_rows() {
        ensure_graph();
        if (!hnsw_rows) {
            progress("labeling training vectors against the graph index");
            hnsw_rows = generate_training_data(*graph, *base, training, sizes.k_lid);
            save_rows(*hnsw_rows, workdir + "/hnsw_rows.csv");
        }
        return *hnsw_rows;
    }

    const LabeledData& ensure_ivf_rows() {
        ensure_ivf();
        if (!ivf_rows) {
            progress("labeling training vectors against the quantization index");
            ivf_rows = generate_training_data(*ivf, *base, training, sizes.k_lid);
        }
        return *ivf_rows;
    }

    const Stage1Result& ensure_stage1() {
        ensure_hnsw_rows();
        if (!stage1) {
            progress("training stage-1 regressor (vector -> lid)");
            TrainConfig cfg;
            cfg.epochs = sizes.stage1_epochs;
            cfg.learning_rate = 1e-3;
            cfg.seed = 11;
            stage1 = train_stage1(*hnsw_rows, cfg);
        }
        return *stage1;
    }

    const TerminationPolicy& ensure_hnsw_policy() {
        ensure_stage1();
        if (!hnsw_policy) {
            progress("training stage-2 regressor (lid -> log2 ndis)");
            TrainConfig cfg;
            cfg.learning_rate = 5e-3;
            cfg.seed = 12;
            auto stage2 = train_stage2(*hnsw_rows, cfg);
            hnsw_policy = make_policy(*stage1, std::move(stage2), *hnsw_rows);
            policy_save(*hnsw_policy, workdir + "/hnsw_policy.bin");
        }
        return *hnsw_policy;
    }

    const TerminationPolicy& ensure_ivf_policy() {
        ensure_ivf_rows();
        if (!ivf_policy) {
            progress("training the quantization-side regressors");
            TrainConfig cfg1;
            cfg1.epochs = sizes.stage1_epochs;
            cfg1.learning_rate = 1e-3;
            cfg1.seed = 13;
            auto s1 = train_stage1(*ivf_rows, cfg1);
            TrainConfig cfg2;
            cfg2.learning_rate = 5e-3;
            cfg2.seed = 14;
            auto s2 = train_stage2(*ivf_rows, cfg2);
            ivf_policy = make_policy(std::move(s1), std::move(s2), *ivf_rows);
        }
        return *ivf_policy;
    }

    const VoModel& ensure_vo() {
        ensure_hnsw_rows();
        if (!vo) {
            progress("training the vector-only ablation model");
            TrainConfig cfg;
            cfg.epochs = sizes.vo_epochs;
            cfg.learning_rate = 1e-3;
            cfg.seed = 15;
            vo = train_vo(*hnsw_rows, cfg).model;
        }
        return *vo;
    }

    const BatchLidResult& ensure_query_lids() {
        ensure_dataset();
        if (!query_lids) {
            progress("computing true query intrinsic dimensions");
            query_lids = batch_lid(queries, *base, sizes.k_lid);
        }
        return *query_lids;
    }

    const std::vector<BenchRow>& ensure_hnsw_bench() {
        if (!hnsw_bench) {
            ensure_gt();
            ensure_hnsw_policy();
            ensure_vo();
            ensure_query_lids();
            progress("running the matched-recall graph benchmark (target 0.99)");
            auto policy = *hnsw_policy;
            auto vo_model = *vo;
            std::vector<double> lids = query_lids->values;
            for (std::size_t i = 0; i < lids.size(); ++i)
                if (!query_lids->ok[i]) lids[i] = 1.0;

            ExperimentConfig cfg;
            cfg.graph = &*graph;
            cfg.queries = &queries;
            cfg.gt = &*gt;
            cfg.policy = &policy;
            cfg.vo = &vo_model;
            cfg.query_true_lids = std::move(lids);
            cfg.targets = {0.99};
            cfg.rows = &*hnsw_rows;
            cfg.out_prefix = workdir + "/hnsw_bench";
            hnsw_bench = run_benchmark(cfg);
        }
        return *hnsw_bench;
    }

    const std::vector<BenchRow>& ensure_ivf_bench() {
        if (!ivf_bench) {
            ensure_gt();
            ensure_ivf_policy();
            progress("running the matched-recall quantization benchmark (target 0.95)");
            auto policy = *ivf_policy;
            ExperimentConfig cfg;
            cfg.ivf = &*ivf;
            cfg.queries = &queries;
            cfg.gt = &*gt;
            cfg.policy = &policy;
            cfg.targets = {0.95};
            cfg.methods = {"fixed", "tao"};
            cfg.out_prefix = workdir + "/ivf_bench";
            ivf_bench = run_benchmark(cfg);
        }
        return *ivf_bench;
    }
};

const BenchRow* find_row(const std::vector<BenchRow>& rows, const std::string& method) {
    for (const auto& r : rows)
        if (r.method == method) return &r;
    return nullptr;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank for ties
            for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
            i = j + 1;
        }
        return rank;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    return cov / std::sqrt(va * vb);
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::vector<unsigned char> file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Criterion 1: estimator consistency on a uniform ball + exact scale
// invariance.
CriterionResult criterion1(World& w) {
    const auto t0 = Clock::now();
    const std::size_t n = w.sizes.ball_points;
    const auto points = sample_uniform_ball(n, 8, 31);
    const auto batch = batch_lid(points, points, 100);
    std::vector<double> values;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (batch.ok[i]) values.push_back(batch.values[i]);
    if (values.size() < n / 2) return {false, "too many degenerate profiles"};
    const double median = percentile(values, 0.5);

    // Scale invariance on a sample of real profiles.
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto nn = brute_force_knn(points, points.row(i * (n / 100)), 100);
        DistanceProfile profile;
        profile.w = nn.back().dist;
        for (const auto& h : nn)
            if (h.dist != 0.0f) profile.distances.push_back(h.dist);
        if (profile.distances.size() < 2) continue;
        const double ref = mle_lid(profile);
        for (double c : {0.5, 3.0, 1e6}) {
            DistanceProfile scaled = profile;
            scaled.w *= c;
            for (auto& x : scaled.distances) x *= c;
            worst_rel = std::max(worst_rel,
                                 std::fabs(mle_lid(scaled) - ref) / std::fabs(ref));
        }
    }
    const double elapsed = seconds_since(t0);

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "median lid %.3f (want [6.4, 9.6]), scale drift %.2e, %.1fs", median,
                  worst_rel, elapsed);
    const bool pass =
        median >= 6.4 && median <= 9.6 && worst_rel <= 1e-12 && elapsed < 120.0;
    return {pass, buf};
}

// Criterion 2: estimator hand values.
CriterionResult criterion2(World&) {
    const double three = mle_lid({{1.0, 2.0, 4.0}, 4.0});
    bool pass = std::fabs(three - 1.4427) <= 1e-4;
    double worst_two = 0.0;
    for (double wv : {1.0, 2.75, 640.0}) {
        const double got = mle_lid({{wv / std::exp(1.0), wv}, wv});
        worst_two = std::max(worst_two, std::fabs(got - 2.0));
    }
    pass = pass && worst_two <= 1e-9;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mle([1,2,4],4)=%.6f, two-point drift %.2e", three,
                  worst_two);
    return {pass, buf};
}

// Criterion 3: positive lid/cost correlation and a non-decreasing cost
// histogram over the central lid mass.
CriterionResult criterion3(World& w) {
    const auto t0 = Clock::now();
    const auto& rows = w.ensure_hnsw_rows().rows;
    std::vector<double> lids, costs;
    for (const auto& r : rows) {
        lids.push_back(r.lid_true);
        costs.push_back(static_cast<double>(r.min_cost));
    }
    const double rho = spearman(lids, costs);

    const auto bins = lid_cost_histogram(rows, 2.0);
    const double lo = percentile(lids, 0.10);
    const double hi = percentile(lids, 0.90);
    bool monotone = true;
    double prev = -1.0;
    std::size_t central_bins = 0;
    for (const auto& b : bins) {
        if (b.lo < lo || b.hi > hi || b.count == 0) continue;
        ++central_bins;
        if (b.mean_cost < prev) monotone = false;
        prev = b.mean_cost;
    }
    const double elapsed = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "spearman %.3f (>0.3), %zu central bins monotone=%s, dropped %zu, %.0fs", rho,
                  central_bins, monotone ? "yes" : "no",
                  w.hnsw_rows->dropped_not_reached + w.hnsw_rows->dropped_degenerate, elapsed);
    return {rho > 0.3 && monotone && central_bins >= 3 && elapsed < 1800.0, buf};
}

// Criterion 4: stage-1 regression quality on held-out queries.
CriterionResult criterion4(World& w) {
    const auto t0 = Clock::now();
    const auto& s1 = w.ensure_stage1();
    const auto& lids = w.ensure_query_lids();

    double abs_sum = 0.0, sq_sum = 0.0, mean_y = 0.0;
    std::size_t n = 0;
    std::vector<double> preds, truths;
    for (std::size_t q = 0; q < w.queries.count(); ++q) {
        if (!lids.ok[q]) continue;
        const std::vector<double> x = s1.input_std.applied(w.queries.row(q));
        preds.push_back(mlp_forward(s1.net, x));
        truths.push_back(lids.values[q]);
        mean_y += lids.values[q];
        ++n;
    }
    if (n == 0) return {false, "no valid query lids"};
    mean_y /= static_cast<double>(n);
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double err = preds[i] - truths[i];
        abs_sum += std::fabs(err);
        sq_sum += err * err;
        ss_tot += (truths[i] - mean_y) * (truths[i] - mean_y);
    }
    const double mae = abs_sum / static_cast<double>(n);
    const double r2 = ss_tot > 0.0 ? 1.0 - sq_sum / ss_tot : 0.0;
    const double elapsed = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "query-set MAE %.3f (<=2.5), R2 %.3f (>=0.5), train holdout MAE %.3f, %.0fs",
                  mae, r2, s1.holdout.mae, elapsed);
    return {mae <= 2.5 && r2 >= 0.5 && elapsed < 1200.0, buf};
}

// Criterion 5: graph-side cost reduction at matched recall 0.99.
CriterionResult criterion5(World& w) {
    const auto& rows = w.ensure_hnsw_bench();
    const auto* fixed = find_row(rows, "fixed");
    const auto* tao = find_row(rows, "tao");
    if (!fixed || !tao) return {false, "missing bench rows"};
    const double ratio = tao->mean_cost / fixed->mean_cost;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "tao ndis %.0f vs fixed %.0f (ratio %.3f <= 0.9), recalls %.4f/%.4f",
                  tao->mean_cost, fixed->mean_cost, ratio, tao->achieved_recall,
                  fixed->achieved_recall);
    const bool matched = fixed->achieved_recall >= 0.989 && tao->achieved_recall >= 0.989 &&
                         fixed->reached && tao->reached;
    return {matched && ratio <= 0.9, buf};
}

// Criterion 6: quantization-side cost reduction at matched recall 0.95.
CriterionResult criterion6(World& w) {
    const auto& rows = w.ensure_ivf_bench();
    const auto* fixed = find_row(rows, "fixed");
    const auto* tao = find_row(rows, "tao");
    if (!fixed || !tao) return {false, "missing bench rows"};
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "tao nprobe %.2f vs fixed %.2f, recalls %.4f/%.4f", tao->mean_cost,
                  fixed->mean_cost, tao->achieved_recall, fixed->achieved_recall);
    const bool matched = fixed->achieved_recall >= 0.949 && tao->achieved_recall >= 0.949 &&
                         fixed->reached && tao->reached;
    return {matched && tao->mean_cost < fixed->mean_cost, buf};
}

// Criterion 7: ablation directions (vector-only and real-lid).
CriterionResult criterion7(World& w) {
    const auto& rows = w.ensure_hnsw_bench();
    const auto* tao = find_row(rows, "tao");
    const auto* vo = find_row(rows, "vo");
    const auto* real = find_row(rows, "real-lid");
    if (!tao || !vo || !real) return {false, "missing bench rows"};
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "tao %.0f <= vo %.0f; real-lid %.0f <= 1.1*tao (%.0f); recalls %.4f/%.4f/%.4f",
                  tao->mean_cost, vo->mean_cost, real->mean_cost, 1.1 * tao->mean_cost,
                  tao->achieved_recall, vo->achieved_recall, real->achieved_recall);
    const bool matched = vo->achieved_recall >= 0.989 && real->achieved_recall >= 0.989;
    const bool pass = matched && tao->mean_cost <= vo->mean_cost &&
                      real->mean_cost <= 1.1 * tao->mean_cost;
    return {pass, buf};
}

// Criterion 8: oracle equivalences on a 10k-scale instance.
CriterionResult criterion8(World&) {
    ClusteredParams p;
    p.n = 11000;
    p.dim = 64;
    p.clusters = 8;
    p.intrinsic_min = 2;
    p.intrinsic_max = 10;
    p.seed = 4242;
    auto all = make_clustered_descriptors(p);
    auto split = split_dataset(all, {.training_count = 0, .query_count = 1000});
    auto base = std::make_shared<VectorStore>(std::move(split.new_base));

    // Saturated-budget graph search vs brute force.
    const auto graph = hnsw_build(base, {.M = 16, .ef_construction = 200, .seed = 3});
    std::size_t hits = 0;
    for (std::size_t q = 0; q < split.queries.count(); ++q) {
        const auto got =
            hnsw_search_adaptive(graph, split.queries.row(q), 1, SearchBudget::unbounded());
        const auto want = brute_force_knn(*base, split.queries.row(q), 1);
        if (!got.neighbors.empty() && got.neighbors[0].dist == want[0].dist) ++hits;
    }
    const double sat_recall =
        static_cast<double>(hits) / static_cast<double>(split.queries.count());

    // Full-probe search vs an independent exhaustive ADC scan.
    const auto index = ivf_build(*base, {.nlist = 64, .m = 8, .ksub = 64, .seed = 5});
    bool full_scan_equal = true;
    std::vector<float> residual(index.dim);
    for (std::size_t q = 0; q < 100 && full_scan_equal; ++q) {
        const auto got = ivf_search(index, split.queries.row(q), index.nlist, 10);
        std::vector<std::pair<double, std::uint32_t>> all_codes;
        for (std::size_t c = 0; c < index.nlist; ++c) {
            const auto cen = index.coarse.centroid(c);
            for (std::size_t j = 0; j < index.dim; ++j)
                residual[j] = split.queries.row(q)[j] - cen[j];
            const AdcTable table = adc_table(index.codebook, residual);
            for (std::size_t i = 0; i < index.list_ids[c].size(); ++i) {
                const std::uint8_t* code =
                    index.list_codes[c].data() + i * index.codebook.m;
                float est = 0.0f;
                for (std::size_t j = 0; j < index.codebook.m; ++j)
                    est += table.lookup(j, code[j]);
                all_codes.emplace_back(static_cast<double>(est), index.list_ids[c][i]);
            }
        }
        std::sort(all_codes.begin(), all_codes.end());
        for (std::size_t i = 0; i < got.neighbors.size(); ++i) {
            if (got.neighbors[i].id != all_codes[i].second ||
                got.neighbors[i].dist !=
                    static_cast<float>(std::sqrt(all_codes[i].first))) {
                full_scan_equal = false;
                break;
            }
        }
    }

    // Minimum-probe labels vs a linear sweep.
    bool sweep_equal = true;
    std::size_t checked = 0;
    for (std::size_t q = 0; q < 1000 && sweep_equal; ++q) {
        const auto gt = brute_force_knn(*base, split.queries.row(q), 1)[0];
        const auto label = label_min_nprobe(index, split.queries.row(q), gt.id);
        std::uint32_t sweep = 0;
        for (std::uint32_t probe = 1; probe <= index.nlist; ++probe) {
            const auto res = ivf_search(index, split.queries.row(q), probe, base->count());
            bool found = false;
            for (const auto& nbr : res.neighbors)
                if (nbr.id == gt.id) found = true;
            if (found) {
                sweep = probe;
                break;
            }
        }
        if (label != sweep) sweep_equal = false;
        ++checked;
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "saturated recall %.4f (>=0.999), full-scan equal=%s, %zu sweep labels equal=%s",
                  sat_recall, full_scan_equal ? "yes" : "no", checked,
                  sweep_equal ? "yes" : "no");
    return {sat_recall >= 0.999 && full_scan_equal && sweep_equal, buf};
}

// Criterion 9: numerical core checks.
CriterionResult criterion9(World&) {
    // Gradient check away from the ReLU kink.
    std::mt19937_64 rng(17);
    MlpWeights net = mlp_init({{4, 8, 1}}, 23);
    MlpDataset sample;
    sample.dim = 4;
    for (int i = 0; i < 24; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = 0.3 + static_cast<double>(rng() % 100) / 125.0;
        sample.append(x, static_cast<double>(rng() % 9) - 4.0);
    }
    const double grad_err = mlp_gradient_check(net, sample, 1e-5);

    // ADC lookups vs decoded squared distances.
    VectorStore residuals(16, 512);
    for (std::size_t i = 0; i < residuals.count(); ++i)
        for (std::size_t j = 0; j < 16; ++j)
            residuals.row_mut(i)[j] = static_cast<float>(rng() % 4000) / 11.0f - 180.0f;
    const auto cb = pq_train(residuals, 4, 32, 3);
    double worst_adc = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<float> r(16);
        for (auto& v : r) v = static_cast<float>(rng() % 4000) / 11.0f - 180.0f;
        const AdcTable table = adc_table(cb, r);
        std::vector<std::uint8_t> code(4);
        for (auto& c : code) c = static_cast<std::uint8_t>(rng() % 32);
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) sum += table.lookup(j, code[j]);
        const double direct = l2_distance_sq(r, pq_decode(cb, code));
        worst_adc = std::max(worst_adc, std::fabs(sum - direct) / (1.0 + direct));
    }

    // Distortion monotonicity.
    VectorStore cloud(8, 4000);
    for (std::size_t i = 0; i < cloud.count(); ++i)
        for (std::size_t j = 0; j < 8; ++j)
            cloud.row_mut(i)[j] = static_cast<float>(rng() % 10000) / 37.0f;
    const auto model = kmeans_train(cloud, 32, 30, 19);
    bool monotone = true;
    for (std::size_t i = 1; i < model.distortion_history.size(); ++i)
        if (model.distortion_history[i] > model.distortion_history[i - 1] + 1e-9)
            monotone = false;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "gradient err %.2e (<1e-4), adc err %.2e (<1e-6), distortion monotone=%s",
                  grad_err, worst_adc, monotone ? "yes" : "no");
    return {grad_err < 1e-4 && worst_adc < 1e-6 && monotone, buf};
}

// Criterion 10: byte-identical artifacts under identical seeds.
CriterionResult criterion10(World& w) {
    ClusteredParams p;
    p.n = 21000;
    p.dim = 64;
    p.clusters = 16;
    p.intrinsic_min = 2;
    p.intrinsic_max = 16;
    p.seed = 777;

    auto run = [&](const std::string& tag) {
        auto all = make_clustered_descriptors(p);
        auto split = split_dataset(all, {.training_count = 1500, .query_count = 400});
        auto base = std::make_shared<VectorStore>(std::move(split.new_base));

        const auto graph = hnsw_build(base, {.M = 12, .ef_construction = 100, .seed = 21});
        hnsw_save(graph, w.workdir + "/det_graph_" + tag + ".bin");
        const auto index = ivf_build(*base, {.nlist = 128, .m = 8, .ksub = 64, .seed = 22});
        ivf_save(index, w.workdir + "/det_ivf_" + tag + ".bin");

        auto rows = generate_training_data(graph, *base, split.training, 128);
        TrainConfig cfg1;
        cfg1.epochs = 20;
        cfg1.seed = 23;
        auto s1 = train_stage1(rows, cfg1);
        TrainConfig cfg2;
        cfg2.seed = 24;
        auto s2 = train_stage2(rows, cfg2);
        auto policy = make_policy(std::move(s1), std::move(s2), rows);
        policy_save(policy, w.workdir + "/det_policy_" + tag + ".bin");

        const auto gt = compute_ground_truth(*base, split.queries, 100);
        ExperimentConfig cfg;
        cfg.graph = &graph;
        cfg.queries = &split.queries;
        cfg.gt = &gt;
        cfg.policy = &policy;
        cfg.targets = {0.9};
        cfg.methods = {"fixed", "tao"};
        return run_benchmark(cfg);
    };

    const auto rows_a = run("a");
    const auto rows_b = run("b");

    const bool graph_equal = file_bytes(w.workdir + "/det_graph_a.bin") ==
                             file_bytes(w.workdir + "/det_graph_b.bin");
    const bool ivf_equal =
        file_bytes(w.workdir + "/det_ivf_a.bin") == file_bytes(w.workdir + "/det_ivf_b.bin");
    const bool policy_equal = file_bytes(w.workdir + "/det_policy_a.bin") ==
                              file_bytes(w.workdir + "/det_policy_b.bin");
    bool costs_equal = rows_a.size() == rows_b.size();
    for (std::size_t i = 0; costs_equal && i < rows_a.size(); ++i)
        costs_equal = rows_a[i].method == rows_b[i].method &&
                      rows_a[i].achieved_recall == rows_b[i].achieved_recall &&
                      rows_a[i].mean_cost == rows_b[i].mean_cost &&
                      rows_a[i].tuned_param == rows_b[i].tuned_param;

    char buf[256];
    std::snprintf(buf, sizeof(buf), "graph=%s ivf=%s policy=%s cost-columns=%s",
                  graph_equal ? "identical" : "DIFFER", ivf_equal ? "identical" : "DIFFER",
                  policy_equal ? "identical" : "DIFFER", costs_equal ? "identical" : "DIFFER");
    return {graph_equal && ivf_equal && policy_equal && costs_equal, buf};
}

}  // namespace

int main(int argc, char** argv) {
    std::string workdir = "acceptance_work";
    std::set<int> only;
    bool small = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--workdir" && i + 1 < argc) {
            workdir = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else if (arg == "--small") {
            small = true;
        } else {
            std::fprintf(stderr, "usage: acceptance [--workdir DIR] [--only N,M] [--small]\n");
            return 2;
        }
    }
    std::filesystem::create_directories(workdir);

    World world;
    world.workdir = workdir;
    if (small) {
        world.sizes.total = 13000;
        world.sizes.training = 1500;
        world.sizes.queries = 500;
        world.sizes.k_lid = 200;
        world.sizes.clusters = 12;
        world.sizes.intrinsic_max = 12;
        world.sizes.nlist = 128;
        world.sizes.stage1_epochs = 60;
        world.sizes.vo_epochs = 60;
        world.sizes.ball_points = 8000;
    }

    using Fn = std::function<CriterionResult(World&)>;
    const std::vector<std::pair<std::string, Fn>> criteria = {
        {"lid estimator consistency (uniform 8-ball)", criterion1},
        {"lid estimator hand values", criterion2},
        {"lid/search-cost correlation and histogram trend", criterion3},
        {"stage-1 regression quality", criterion4},
        {"graph cost reduction at matched recall 0.99", criterion5},
        {"quantization cost reduction at matched recall 0.95", criterion6},
        {"ablation directions (vector-only, real-lid)", criterion7},
        {"oracle equivalences (saturated search, full scan, probe sweep)", criterion8},
        {"numerical core (gradients, adc, distortion)", criterion9},
        {"determinism of artifacts and cost columns", criterion10},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int num = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(num)) continue;
        const auto t0 = Clock::now();
        CriterionResult result;
        try {
            result = criteria[i].second(world);
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(t0);
        std::printf("[%s] criterion %d: %s -- %s (%.1fs)\n", result.pass ? "PASS" : "FAIL",
                    num, criteria[i].first.c_str(), result.detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", failures);
    }
    return failures;
}
