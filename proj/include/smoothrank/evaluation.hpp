#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smoothrank/candidates.hpp"
#include "smoothrank/ranker.hpp"
#include "smoothrank/trainer.hpp"

namespace smoothrank {

/// Candidate doc ids by descending relevance probability, ties by doc id.
std::vector<std::string> rank_candidates(const ModelParams& params, const FeatureStore& features,
                                         const CandidateList& list);

/// 1 when relevant_id is among the first k entries. Throws DataError when it
/// is absent and UsageError unless 1 <= k <= ranking size.
int recall_at_k(std::span<const std::string> ranking, const std::string& relevant_id, std::size_t k);

/// "R<n>@<k>".
std::string metric_name(std::size_t n, std::size_t k);

struct QueryOutcome {
    std::string query_id;
    int value = 0;

    bool operator==(const QueryOutcome&) const = default;
};

struct RunResult {
    std::string config_id;
    std::string policy;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::string metric_name;
    double value = 0.0;
    std::vector<QueryOutcome> per_query;

    bool operator==(const RunResult&) const = default;
};

/// Mean R_n@k over the lists. Every list must have the same n.
RunResult evaluate(const ModelParams& params, const FeatureStore& features,
                   const std::vector<CandidateList>& lists, std::size_t k);

/// I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
/// Inverse of student_t_cdf for probability in (0, 1).
double student_t_quantile(double probability, double dof);

struct TTest {
    double t = 0.0;
    double p = 1.0;
};

/// Two-sided paired Student t-test on a - b. All-zero differences give
/// t = 0, p = 1; constant nonzero differences give t = +-inf, p = 0.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// min(1, m * p) for each p.
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;
    double ci95_half_width = 0.0;
    std::size_t runs = 0;
};

/// Mean, sample standard deviation and Student-t 95% half-width.
Aggregate aggregate_values(std::span<const double> values);
Aggregate aggregate_runs(std::span<const RunResult> results);

struct SweepConfig {
    TrainConfig base;  // shared batch size, budget, optimizer; policy is overridden
    std::vector<std::string> policies{"t-ls", "t-wsls"};
    std::vector<double> epsilons;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::size_t k = 1;
    std::size_t threads = 1;

    void validate() const;
};

struct SweepRow {
    std::string policy;
    double epsilon = 0.0;
    Aggregate aggregate;
    std::size_t first_run = 0;  // index of the row's first seed in SweepResult::runs
};

struct SweepResult {
    std::vector<SweepRow> rows;        // baseline first, then (policy, epsilon)
    std::vector<RunResult> runs;       // same order, seeds innermost
};

/// Trains and evaluates the hard-label baseline and every (policy, epsilon)
/// cell for every seed. Cells may run on `threads` workers; output order is
/// fixed.
SweepResult epsilon_sweep(const SweepConfig& config, const FeatureStore& features,
                          const std::vector<CandidateList>& train_lists,
                          const std::vector<CandidateList>& eval_lists);

/// Per-seed values of one sweep row, in seed order.
std::vector<double> row_values(const SweepResult& sweep, const SweepRow& row);

/// results.csv. With append, the header is written only for a new file.
void write_results_csv(const std::filesystem::path& path, std::span<const RunResult> results, bool append);
/// sweep.csv: "policy,epsilon,mean,std,ci95,runs".
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);

/// Table of every row against the baseline, and of t-wsls against t-ls at
/// equal epsilon, with Bonferroni-adjusted p-values and gain/loss markers.
std::string significance_report(const SweepResult& sweep, std::size_t bonferroni_m, double alpha = 0.05);
void write_significance_report(const std::filesystem::path& path, const std::string& report);

}  // namespace smoothrank
