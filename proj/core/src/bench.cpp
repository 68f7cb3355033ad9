#include "lidann/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lidann/parallel.hpp"

namespace lidann {

namespace {

// Ids in the ground-truth row tied with the top-1 distance. The row is
// sorted, so the tie set is a prefix.
bool attains_top1(const Neighbor& hit, std::span<const Neighbor> gt_row) {
    const float top1 = gt_row[0].dist;
    if (hit.dist == top1) return true;  // exact distances only; see recall notes
    for (const auto& g : gt_row) {
        if (g.dist != top1) break;
        if (g.id == hit.id) return true;
    }
    return false;
}

}  // namespace

int recall_indicator(std::span<const Neighbor> results, std::span<const Neighbor> gt_row,
                     RecallMode mode) {
    if (gt_row.empty()) throw UsageError("recall_indicator: empty ground-truth row");
    if (results.empty()) return 0;
    const std::size_t depth = mode == RecallMode::At1 ? 1 : std::min<std::size_t>(100, results.size());
    for (std::size_t i = 0; i < depth; ++i)
        if (attains_top1(results[i], gt_row)) return 1;
    return 0;
}

namespace {

// Mean recall of a per-query search closure, parallelized over queries.
template <typename SearchFn>
double mean_recall(const VectorStore& queries, const GroundTruthTable& gt, RecallMode mode,
                   std::size_t nthreads, SearchFn&& search) {
    std::vector<int> hits(queries.count(), 0);
    parallel_for(queries.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            const auto results = search(q);
            hits[q] = recall_indicator(results, gt.row(q), mode);
        }
    });
    std::size_t total = 0;
    for (int h : hits) total += static_cast<std::size_t>(h);
    return static_cast<double>(total) / static_cast<double>(queries.count());
}

struct ParamEval {
    std::uint64_t param;
    double recall;
};

// Galloping + bisection for the smallest integer parameter meeting the
// target. `eval` must be (empirically) non-decreasing in the parameter.
template <typename EvalFn>
TuneResult tune_integer_param(std::uint64_t lo, std::uint64_t hi_max, double target, double tol,
                              EvalFn&& eval) {
    const double bar = target - tol;
    double r = eval(lo);
    if (r >= bar) return {lo, r, true};

    std::uint64_t hi = lo;
    double r_hi = r;
    while (r_hi < bar && hi < hi_max) {
        hi = std::min(hi_max, hi * 2 + 1);
        r_hi = eval(hi);
    }
    if (r_hi < bar) return {hi, r_hi, false};

    std::uint64_t lo_b = lo;  // known below the bar
    while (hi - lo_b > 1) {
        const std::uint64_t mid = lo_b + (hi - lo_b) / 2;
        const double r_mid = eval(mid);
        if (r_mid >= bar) {
            hi = mid;
            r_hi = r_mid;
        } else {
            lo_b = mid;
        }
    }
    return {hi, r_hi, true};
}

void check_tuning_inputs(const VectorStore& queries, const GroundTruthTable& gt,
                         double target, double tol) {
    if (queries.count() == 0) throw UsageError("tuning: no queries");
    if (gt.query_count() != queries.count())
        throw UsageError("tuning: ground-truth table does not match the query set");
    if (!(target > 0.0) || target > 1.0) throw UsageError("tuning: target must be in (0, 1]");
    if (tol < 0.0) throw UsageError("tuning: tolerance must be non-negative");
}

}  // namespace

TuneResult tune_fixed_hnsw(const HnswGraph& graph, const VectorStore& queries,
                           const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                           double target, double tol, std::size_t nthreads) {
    check_tuning_inputs(queries, gt, target, tol);
    const std::uint64_t max_ef = graph.count();
    return tune_integer_param(k, max_ef, target, tol, [&](std::uint64_t ef) {
        return mean_recall(queries, gt, mode, nthreads, [&](std::size_t q) {
            return hnsw_search_fixed(graph, queries.row(q), k, ef).neighbors;
        });
    });
}

TuneResult tune_fixed_ivf(const IvfPqIndex& index, const VectorStore& queries,
                          const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                          double target, double tol, std::size_t nthreads) {
    check_tuning_inputs(queries, gt, target, tol);
    return tune_integer_param(1, index.nlist, target, tol, [&](std::uint64_t nprobe) {
        return mean_recall(queries, gt, mode, nthreads, [&](std::size_t q) {
            return ivf_search(index, queries.row(q), nprobe, k).neighbors;
        });
    });
}

namespace {

// Shared multiplier bisection. search(q, budget) runs one budgeted query.
template <typename SearchFn>
MultiplierTune tune_multiplier_core(const VectorStore& queries, const GroundTruthTable& gt,
                                    RecallMode mode, std::span<const double> tc,
                                    std::uint64_t thresh, double target, double tol,
                                    std::size_t nthreads, SearchFn&& search) {
    check_tuning_inputs(queries, gt, target, tol);
    if (tc.size() != queries.count())
        throw UsageError("tune_multiplier: tc size does not match the query set");

    const double bar = target - tol;
    auto budgets_of = [&](double mult) {
        std::vector<std::uint64_t> budgets(tc.size());
        for (std::size_t i = 0; i < tc.size(); ++i)
            budgets[i] = apply_budget_rule(tc[i], mult, thresh);
        return budgets;
    };
    auto eval = [&](const std::vector<std::uint64_t>& budgets) {
        return mean_recall(queries, gt, mode, nthreads,
                           [&](std::size_t q) { return search(q, budgets[q]); });
    };

    double lo_exp = -10.0, hi_exp = 10.0;
    std::vector<std::uint64_t> lo_budgets = budgets_of(std::exp2(lo_exp));
    std::vector<std::uint64_t> hi_budgets = budgets_of(std::exp2(hi_exp));
    double r_lo = eval(lo_budgets);
    if (r_lo >= bar) return {std::exp2(lo_exp), r_lo, true};
    double r_hi = eval(hi_budgets);
    if (r_hi < bar) return {std::exp2(hi_exp), r_hi, false};

    for (int iter = 0; iter < 40; ++iter) {
        const double mid_exp = 0.5 * (lo_exp + hi_exp);
        auto mid_budgets = budgets_of(std::exp2(mid_exp));
        double r_mid;
        // Budgets quantize the multiplier; identical budget vectors must give
        // identical recall, so skip the searches when an endpoint matches.
        if (mid_budgets == hi_budgets) {
            r_mid = r_hi;
        } else if (mid_budgets == lo_budgets) {
            r_mid = r_lo;
        } else {
            r_mid = eval(mid_budgets);
        }
        if (r_mid >= bar) {
            hi_exp = mid_exp;
            r_hi = r_mid;
            hi_budgets = std::move(mid_budgets);
        } else {
            lo_exp = mid_exp;
            r_lo = r_mid;
            lo_budgets = std::move(mid_budgets);
        }
    }
    return {std::exp2(hi_exp), r_hi, true};
}

}  // namespace

MultiplierTune tune_multiplier_hnsw(const HnswGraph& graph, const VectorStore& queries,
                                    const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                                    std::span<const double> tc, std::uint64_t thresh,
                                    double target, double tol, std::size_t nthreads) {
    return tune_multiplier_core(
        queries, gt, mode, tc, thresh, target, tol, nthreads,
        [&](std::size_t q, std::uint64_t budget) {
            return hnsw_search_adaptive(graph, queries.row(q), k, SearchBudget::capped(budget))
                .neighbors;
        });
}

MultiplierTune tune_multiplier_ivf(const IvfPqIndex& index, const VectorStore& queries,
                                   const GroundTruthTable& gt, std::size_t k, RecallMode mode,
                                   std::span<const double> tc, std::uint64_t thresh,
                                   double target, double tol, std::size_t nthreads) {
    return tune_multiplier_core(queries, gt, mode, tc, thresh, target, tol, nthreads,
                                [&](std::size_t q, std::uint64_t budget) {
                                    const std::size_t nprobe = static_cast<std::size_t>(
                                        std::min<std::uint64_t>(budget, index.nlist));
                                    return ivf_search(index, queries.row(q), nprobe, k).neighbors;
                                });
}

namespace {

std::vector<double> chain_tc(const TerminationPolicy& policy, const VectorStore& queries,
                             std::size_t nthreads) {
    std::vector<double> tc(queries.count());
    parallel_for(queries.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) tc[q] = predict_tc(policy, queries.row(q));
    });
    return tc;
}

std::vector<double> chain_tc_vo(const VoModel& model, const VectorStore& queries,
                                std::size_t nthreads) {
    std::vector<double> tc(queries.count());
    parallel_for(queries.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) tc[q] = predict_tc_vo(model, queries.row(q));
    });
    return tc;
}

}  // namespace

MultiplierTune tune_multiplier(TerminationPolicy& policy, const HnswGraph& graph,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol, std::size_t nthreads) {
    const auto tc = chain_tc(policy, queries, nthreads);
    auto tuned = tune_multiplier_hnsw(graph, queries, gt, 1, RecallMode::At1, tc, policy.thresh,
                                      target, tol, nthreads);
    policy.multiplier = tuned.multiplier;
    return tuned;
}

MultiplierTune tune_multiplier(TerminationPolicy& policy, const IvfPqIndex& index,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol, std::size_t nthreads) {
    const auto tc = chain_tc(policy, queries, nthreads);
    auto tuned = tune_multiplier_ivf(index, queries, gt, 100, RecallMode::At100, tc,
                                     policy.thresh, target, tol, nthreads);
    policy.multiplier = tuned.multiplier;
    return tuned;
}

MultiplierTune tune_multiplier(VoModel& model, const HnswGraph& graph,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol, std::size_t nthreads) {
    const auto tc = chain_tc_vo(model, queries, nthreads);
    auto tuned = tune_multiplier_hnsw(graph, queries, gt, 1, RecallMode::At1, tc, model.thresh,
                                      target, tol, nthreads);
    model.multiplier = tuned.multiplier;
    return tuned;
}

MultiplierTune tune_multiplier(VoModel& model, const IvfPqIndex& index,
                               const VectorStore& queries, const GroundTruthTable& gt,
                               double target, double tol, std::size_t nthreads) {
    const auto tc = chain_tc_vo(model, queries, nthreads);
    auto tuned = tune_multiplier_ivf(index, queries, gt, 100, RecallMode::At100, tc,
                                     model.thresh, target, tol, nthreads);
    model.multiplier = tuned.multiplier;
    return tuned;
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::micro>(b - a).count();
}

struct Measurement {
    double recall = 0.0;
    double mean_cost = 0.0;
    double mean_latency_us = 0.0;
    double prediction_us = 0.0;
};

// Strictly single-threaded timed loop. budget_fn returns (budget, seconds of
// prediction time); a null budget means the fixed configuration.
template <typename PredictFn, typename SearchFn>
Measurement measure_method(const VectorStore& queries, const GroundTruthTable& gt,
                           RecallMode mode, PredictFn&& predict, SearchFn&& search) {
    Measurement m;
    double cost_sum = 0.0, lat_sum = 0.0, pred_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t q = 0; q < queries.count(); ++q) {
        const auto t0 = Clock::now();
        const std::uint64_t budget = predict(q);
        const auto t1 = Clock::now();
        const auto [results, cost] = search(q, budget);
        const auto t2 = Clock::now();
        hits += static_cast<std::size_t>(recall_indicator(results, gt.row(q), mode));
        cost_sum += static_cast<double>(cost);
        lat_sum += micros_between(t0, t2);
        pred_sum += micros_between(t0, t1);
    }
    const double n = static_cast<double>(queries.count());
    m.recall = static_cast<double>(hits) / n;
    m.mean_cost = cost_sum / n;
    m.mean_latency_us = lat_sum / n;
    m.prediction_us = pred_sum / n;
    return m;
}

}  // namespace

std::vector<BenchRow> run_benchmark(const ExperimentConfig& config) {
    if ((config.graph == nullptr) == (config.ivf == nullptr))
        throw UsageError("run_benchmark: exactly one index must be set");
    if (!config.queries || !config.gt) throw UsageError("run_benchmark: queries and gt required");
    if (config.gt->query_count() != config.queries->count())
        throw UsageError("run_benchmark: ground truth does not match the query set");
    if (config.targets.empty()) throw UsageError("run_benchmark: no recall targets");
    for (double t : config.targets)
        if (!(t > 0.0) || t > 1.0) throw UsageError("run_benchmark: target outside (0, 1]");
    if (!config.query_true_lids.empty() &&
        config.query_true_lids.size() != config.queries->count())
        throw UsageError("run_benchmark: query_true_lids does not match the query set");

    const bool is_graph = config.graph != nullptr;
    const RecallMode mode =
        config.metric.value_or(is_graph ? RecallMode::At1 : RecallMode::At100);
    const std::size_t k = mode == RecallMode::At1 ? 1 : 100;
    const VectorStore& queries = *config.queries;
    const GroundTruthTable& gt = *config.gt;

    auto has_method = [&](const std::string& name) {
        return std::find(config.methods.begin(), config.methods.end(), name) !=
               config.methods.end();
    };

    // Raw chain outputs are independent of the multiplier, so evaluate once.
    std::vector<double> tc_tao, tc_vo, tc_real;
    if (config.policy && has_method("tao"))
        tc_tao = chain_tc(*config.policy, queries, config.nthreads);
    if (config.vo && has_method("vo")) tc_vo = chain_tc_vo(*config.vo, queries, config.nthreads);
    if (config.policy && !config.query_true_lids.empty() && has_method("real-lid")) {
        tc_real.resize(queries.count());
        for (std::size_t q = 0; q < queries.count(); ++q) {
            const double one[1] = {config.query_true_lids[q]};
            tc_real[q] = mlp_forward(config.policy->stage2, one);
        }
    }

    auto search_budgeted = [&](std::size_t q, std::uint64_t budget)
        -> std::pair<std::vector<Neighbor>, std::uint64_t> {
        if (is_graph) {
            auto r = hnsw_search_adaptive(*config.graph, queries.row(q), k,
                                          SearchBudget::capped(budget));
            return {std::move(r.neighbors), r.stats.ndis};
        }
        const std::size_t nprobe =
            static_cast<std::size_t>(std::min<std::uint64_t>(budget, config.ivf->nlist));
        auto r = ivf_search(*config.ivf, queries.row(q), nprobe, k);
        return {std::move(r.neighbors), r.stats.clusters_probed};
    };

    std::vector<BenchRow> rows;
    for (double target : config.targets) {
        std::uint64_t fixed_param = 0;
        if (has_method("fixed")) {
            const TuneResult tuned =
                is_graph ? tune_fixed_hnsw(*config.graph, queries, gt, k, mode, target,
                                           config.tol, config.nthreads)
                         : tune_fixed_ivf(*config.ivf, queries, gt, k, mode, target, config.tol,
                                          config.nthreads);
            fixed_param = tuned.param;
            const Measurement m = measure_method(
                queries, gt, mode, [](std::size_t) { return std::uint64_t{0}; },
                [&](std::size_t q, std::uint64_t) -> std::pair<std::vector<Neighbor>, std::uint64_t> {
                    if (is_graph) {
                        auto r = hnsw_search_fixed(*config.graph, queries.row(q), k,
                                                   static_cast<std::size_t>(fixed_param));
                        return {std::move(r.neighbors), r.stats.ndis};
                    }
                    auto r = ivf_search(*config.ivf, queries.row(q),
                                        static_cast<std::size_t>(fixed_param), k);
                    return {std::move(r.neighbors), r.stats.clusters_probed};
                });
            rows.push_back({"fixed", target, m.recall, m.mean_cost,
                            static_cast<double>(tuned.param), tuned.reached, m.mean_latency_us,
                            0.0});
        }

        auto run_predictive = [&](const std::string& name, std::span<const double> tc,
                                  std::uint64_t thresh, auto&& timed_predict) {
            const MultiplierTune tuned =
                is_graph ? tune_multiplier_hnsw(*config.graph, queries, gt, k, mode, tc, thresh,
                                                target, config.tol, config.nthreads)
                         : tune_multiplier_ivf(*config.ivf, queries, gt, k, mode, tc, thresh,
                                               target, config.tol, config.nthreads);
            const double mult = tuned.multiplier;
            const Measurement m = measure_method(
                queries, gt, mode,
                [&](std::size_t q) { return timed_predict(q, mult, thresh); }, search_budgeted);
            rows.push_back({name, target, m.recall, m.mean_cost, mult, tuned.reached,
                            m.mean_latency_us, m.prediction_us});
            return tuned;
        };

        if (config.policy && has_method("tao")) {
            const auto tuned = run_predictive(
                "tao", tc_tao, config.policy->thresh,
                [&](std::size_t q, double mult, std::uint64_t) {
                    // Full chain per query: standardize, stage 1, stage 2, rule.
                    const double tc = predict_tc(*config.policy, queries.row(q));
                    return apply_budget_rule(tc, mult, config.policy->thresh);
                });
            config.policy->multiplier = tuned.multiplier;
        }
        if (config.vo && has_method("vo")) {
            const auto tuned = run_predictive(
                "vo", tc_vo, config.vo->thresh, [&](std::size_t q, double mult, std::uint64_t) {
                    const double tc = predict_tc_vo(*config.vo, queries.row(q));
                    return apply_budget_rule(tc, mult, config.vo->thresh);
                });
            config.vo->multiplier = tuned.multiplier;
        }
        if (config.policy && !tc_real.empty() && has_method("real-lid")) {
            run_predictive("real-lid", tc_real, config.policy->thresh,
                           [&](std::size_t q, double mult, std::uint64_t) {
                               const double one[1] = {config.query_true_lids[q]};
                               const double tc = mlp_forward(config.policy->stage2, one);
                               return apply_budget_rule(tc, mult, config.policy->thresh);
                           });
        }
    }

    if (!config.out_prefix.empty()) {
        write_bench_csv(rows, config.out_prefix + ".csv");
        write_bench_report(config, rows, config.out_prefix + "_report.txt");
        if (config.rows)
            write_histogram_csv(lid_cost_histogram(config.rows->rows, config.hist_bin_width),
                                config.out_prefix + "_hist.csv");
    }
    return rows;
}

std::vector<LidCostBin> lid_cost_histogram(const std::vector<TrainingRow>& rows,
                                           double bin_width) {
    if (rows.empty() || !(bin_width > 0.0)) return {};
    double max_lid = 0.0;
    for (const auto& r : rows) max_lid = std::max(max_lid, r.lid_true);
    const std::size_t nbins = static_cast<std::size_t>(std::floor(max_lid / bin_width)) + 1;
    std::vector<LidCostBin> bins(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        bins[b].lo = static_cast<double>(b) * bin_width;
        bins[b].hi = bins[b].lo + bin_width;
    }
    for (const auto& r : rows) {
        auto b = static_cast<std::size_t>(std::floor(r.lid_true / bin_width));
        if (b >= nbins) b = nbins - 1;
        ++bins[b].count;
        bins[b].mean_cost += static_cast<double>(r.min_cost);
    }
    for (auto& b : bins)
        if (b.count > 0) b.mean_cost /= static_cast<double>(b.count);
    return bins;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << "method,target,achieved_recall,mean_cost,tuned_param,reached,"
           "mean_latency_us,prediction_us\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.9g,%d,%.3f,%.3f\n",
                      r.method.c_str(), r.target, r.achieved_recall, r.mean_cost, r.tuned_param,
                      r.reached ? 1 : 0, r.mean_latency_us, r.prediction_us);
        out << buf;
    }
}

void write_bench_report(const ExperimentConfig& config, const std::vector<BenchRow>& rows,
                        const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    const bool is_graph = config.graph != nullptr;
    out << "index: " << (is_graph ? "hnsw" : "ivfpq") << "\n";
    out << "metric: "
        << (config.metric.value_or(is_graph ? RecallMode::At1 : RecallMode::At100) ==
                    RecallMode::At1
                ? "recall@1"
                : "recall@100")
        << "\n";
    out << "queries: " << (config.queries ? config.queries->count() : 0) << "\n";
    out << "cost unit: " << (is_graph ? "distance evaluations" : "clusters probed") << "\n\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-10s %-8s %-10s %-14s %-12s %-12s %-10s\n", "method",
                  "target", "recall", "mean_cost", "param", "latency_us", "pred_us");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-10s %-8.4f %-10.6f %-14.2f %-12.6g %-12.2f %-10.2f%s\n",
                      r.method.c_str(), r.target, r.achieved_recall, r.mean_cost, r.tuned_param,
                      r.mean_latency_us, r.prediction_us, r.reached ? "" : "  [unreached]");
        out << buf;
    }
    // Matched-recall discipline: flag any cost pair whose recalls diverge.
    for (const auto& r : rows) {
        if (r.method == "fixed") continue;
        for (const auto& f : rows) {
            if (f.method != "fixed" || f.target != r.target) continue;
            if (std::fabs(f.achieved_recall - r.achieved_recall) > 2.0 * config.tol) {
                std::snprintf(buf, sizeof(buf),
                              "note: %s@%.4f recall %.6f vs fixed %.6f exceeds 2*tol\n",
                              r.method.c_str(), r.target, r.achieved_recall, f.achieved_recall);
                out << buf;
            }
        }
    }
}

void write_histogram_csv(const std::vector<LidCostBin>& bins, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << "lid_lo,lid_hi,count,mean_min_cost\n";
    char buf[128];
    for (const auto& b : bins) {
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%zu,%.6f\n", b.lo, b.hi, b.count, b.mean_cost);
        out << buf;
    }
}

}  // namespace lidann
