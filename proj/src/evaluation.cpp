#include "smoothrank/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"

namespace smoothrank {

std::vector<std::string> rank_candidates(const ModelParams& params, const FeatureStore& features,
                                         const CandidateList& list) {
    struct Scored {
        const std::string* doc_id;
        double p_rel;
    };
    std::vector<Scored> scored;
    scored.reserve(list.n());
    for (const auto& c : list.candidates) {
        scored.push_back({&c.doc_id, relevance_probability(params, features.get(list.query_id, c.doc_id))});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.p_rel != b.p_rel) {
            return a.p_rel > b.p_rel;
        }
        return *a.doc_id < *b.doc_id;
    });
    std::vector<std::string> ranking;
    ranking.reserve(scored.size());
    for (const auto& s : scored) {
        ranking.push_back(*s.doc_id);
    }
    return ranking;
}

int recall_at_k(std::span<const std::string> ranking, const std::string& relevant_id, std::size_t k) {
    if (k < 1 || k > ranking.size()) {
        throw UsageError("K must be in [1, " + std::to_string(ranking.size()) + "], got " + std::to_string(k));
    }
    auto it = std::find(ranking.begin(), ranking.end(), relevant_id);
    if (it == ranking.end()) {
        throw DataError("relevant document " + relevant_id + " is not in the ranking");
    }
    return static_cast<std::size_t>(it - ranking.begin()) < k ? 1 : 0;
}

std::string metric_name(std::size_t n, std::size_t k) { return "R" + std::to_string(n) + "@" + std::to_string(k); }

RunResult evaluate(const ModelParams& params, const FeatureStore& features, const std::vector<CandidateList>& lists,
                   std::size_t k) {
    if (lists.empty()) {
        throw DataError("no candidate lists to evaluate");
    }
    const std::size_t n = lists.front().n();
    RunResult result;
    result.metric_name = metric_name(n, k);
    double total = 0.0;
    for (const auto& list : lists) {
        if (list.n() != n) {
            throw DataError("query " + list.query_id + " has " + std::to_string(list.n()) +
                            " candidates; all lists must have " + std::to_string(n));
        }
        const auto ranking = rank_candidates(params, features, list);
        const int hit = recall_at_k(ranking, list.relevant_id(), k);
        result.per_query.push_back(QueryOutcome{list.query_id, hit});
        total += hit;
    }
    result.value = total / static_cast<double>(lists.size());
    return result;
}

// ---------------------------------------------------------------------------
// Student t distribution

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw UsageError("incomplete beta needs a, b > 0");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {
/// P(|T| >= |t|).
double two_sided_tail(double t, double dof) {
    if (std::isinf(t)) {
        return 0.0;
    }
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}
}  // namespace

double student_t_cdf(double t, double dof) {
    const double tail = 0.5 * two_sided_tail(t, dof);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double probability, double dof) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw UsageError("quantile probability must be in (0, 1)");
    }
    if (probability < 0.5) {
        return -student_t_quantile(1.0 - probability, dof);
    }
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, dof) < probability) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < probability) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DataError("paired t-test needs samples of equal length (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) {
        throw DataError("paired t-test needs at least 2 pairs");
    }
    const auto n = static_cast<double>(a.size());
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : d) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) {
        if (mean == 0.0) {
            return {0.0, 1.0};
        }
        return {std::copysign(std::numeric_limits<double>::infinity(), mean), 0.0};
    }
    const double t = mean / (sd / std::sqrt(n));
    return {t, two_sided_tail(t, n - 1.0)};
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
    if (m < 1 || m < p_values.size()) {
        throw UsageError("Bonferroni factor must be at least the number of comparisons");
    }
    std::vector<double> out;
    out.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DataError("p-value outside [0, 1]: " + std::to_string(p));
        }
        out.push_back(std::min(1.0, static_cast<double>(m) * p));
    }
    return out;
}

Aggregate aggregate_values(std::span<const double> values) {
    if (values.size() < 2) {
        throw DataError("aggregation needs at least 2 runs");
    }
    const auto n = static_cast<double>(values.size());
    Aggregate agg;
    agg.runs = values.size();
    agg.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - agg.mean) * (v - agg.mean);
    }
    agg.std = std::sqrt(ss / (n - 1.0));
    agg.ci95_half_width = student_t_quantile(0.975, n - 1.0) * agg.std / std::sqrt(n);
    return agg;
}

Aggregate aggregate_runs(std::span<const RunResult> results) {
    if (results.size() < 2) {
        throw DataError("aggregation needs at least 2 runs");
    }
    std::vector<double> values;
    for (const auto& r : results) {
        if (r.config_id != results.front().config_id || r.metric_name != results.front().metric_name) {
            throw DataError("cannot aggregate runs of different configurations or metrics");
        }
        values.push_back(r.value);
    }
    return aggregate_values(values);
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepConfig::validate() const {
    if (policies.empty()) {
        throw UsageError("sweep needs at least one policy");
    }
    for (const auto& p : policies) {
        if (parse_policy(p).kind == SmoothingKind::Hard) {
            throw UsageError("the hard-label baseline is always included; do not list it as a sweep policy");
        }
    }
    if (epsilons.empty()) {
        throw UsageError("sweep needs at least one epsilon");
    }
    for (double e : epsilons) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw UsageError("sweep epsilons must be in [0, 1]");
        }
    }
    if (seeds.size() < 2) {
        throw UsageError("sweep needs at least 2 seeds");
    }
    if (k < 1) {
        throw UsageError("K must be >= 1");
    }
    if (threads < 1) {
        throw UsageError("thread count must be >= 1");
    }
}

namespace {

struct Cell {
    std::string policy;
    double epsilon;
    std::uint64_t seed;
};

TrainConfig cell_config(const TrainConfig& base, const Cell& cell) {
    TrainConfig cfg = base;
    const auto spec = parse_policy(cell.policy);
    cfg.policy = SmoothingPolicy{spec.kind, spec.kind == SmoothingKind::Hard ? 0.0 : cell.epsilon};
    cfg.schedule.kind = spec.two_stage ? ScheduleKind::TwoStage : ScheduleKind::Constant;
    if (spec.two_stage && cfg.schedule.switch_at == 0) {
        cfg.schedule.switch_at = std::max<std::uint64_t>(1, cfg.total_instances / 2);
    }
    if (!spec.two_stage) {
        cfg.schedule.switch_at = 0;
    }
    cfg.seed = cell.seed;
    return cfg;
}

}  // namespace

SweepResult epsilon_sweep(const SweepConfig& config, const FeatureStore& features,
                          const std::vector<CandidateList>& train_lists, const std::vector<CandidateList>& eval_lists) {
    config.validate();
    std::vector<Cell> cells;
    SweepResult sweep;
    sweep.rows.push_back(SweepRow{"hard", 0.0, {}, 0});
    for (auto seed : config.seeds) {
        cells.push_back(Cell{"hard", 0.0, seed});
    }
    for (const auto& policy : config.policies) {
        for (double eps : config.epsilons) {
            sweep.rows.push_back(SweepRow{policy, eps, {}, cells.size()});
            for (auto seed : config.seeds) {
                cells.push_back(Cell{policy, eps, seed});
            }
        }
    }
    // Validate every configuration before spending time on training.
    for (const auto& cell : cells) {
        cell_config(config.base, cell).validate();
    }

    sweep.runs.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                const auto cfg = cell_config(config.base, cells[i]);
                const auto trained = train(cfg, features, train_lists);
                RunResult r = evaluate(trained.params, features, eval_lists, config.k);
                r.config_id = config_id(cfg);
                r.policy = cells[i].policy;
                r.epsilon = cells[i].epsilon;
                r.seed = cells[i].seed;
                sweep.runs[i] = std::move(r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = cells.size();
            }
        }
    };
    const std::size_t workers = std::min(config.threads, cells.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    for (auto& row : sweep.rows) {
        row.aggregate = aggregate_values(row_values(sweep, row));
    }
    return sweep;
}

std::vector<double> row_values(const SweepResult& sweep, const SweepRow& row) {
    std::vector<double> values;
    for (std::size_t i = row.first_run; i < sweep.runs.size(); ++i) {
        const auto& r = sweep.runs[i];
        if (r.policy != row.policy || r.epsilon != row.epsilon) {
            break;
        }
        values.push_back(r.value);
    }
    return values;
}

void write_results_csv(const std::filesystem::path& path, std::span<const RunResult> results, bool append) {
    std::string out;
    std::error_code ec;
    if (!append || !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0) {
        out = "config_id,policy,epsilon,seed,metric,value\n";
    }
    for (const auto& r : results) {
        out += r.config_id + "," + r.policy + "," + detail::fixed(r.epsilon) + "," + std::to_string(r.seed) + "," +
               r.metric_name + "," + detail::fixed(r.value) + "\n";
    }
    if (append) {
        detail::append_file(path, out);
    } else {
        detail::write_file_atomic(path, out);
    }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
    std::string out = "policy,epsilon,mean,std,ci95,runs\n";
    for (const auto& row : sweep.rows) {
        out += row.policy + "," + detail::fixed(row.epsilon) + "," + detail::fixed(row.aggregate.mean) + "," +
               detail::fixed(row.aggregate.std) + "," + detail::fixed(row.aggregate.ci95_half_width) + "," +
               std::to_string(row.aggregate.runs) + "\n";
    }
    detail::write_file_atomic(path, out);
}

std::string significance_report(const SweepResult& sweep, std::size_t bonferroni_m, double alpha) {
    if (sweep.rows.empty() || sweep.runs.empty()) {
        throw DataError("empty sweep");
    }
    const SweepRow& baseline = sweep.rows.front();
    const auto base_values = row_values(sweep, baseline);

    auto find_row = [&](const std::string& policy, double eps) -> const SweepRow* {
        for (const auto& r : sweep.rows) {
            if (r.policy == policy && r.epsilon == eps) {
                return &r;
            }
        }
        return nullptr;
    };
    auto compare = [&](const std::vector<double>& values, const std::vector<double>& reference,
                       const char* gain, const char* loss, std::string& marker) {
        const auto test = paired_t_test(values, reference);
        const double p = bonferroni(std::vector<double>{test.p}, bonferroni_m)[0];
        if (p < alpha) {
            marker += test.t > 0 ? gain : loss;
        }
        return p;
    };

    char line[256];
    std::string out;
    std::snprintf(line, sizeof line,
                  "%s over %zu seeds; two-sided paired t-tests, Bonferroni m=%zu, alpha=%.2f\n"
                  "markers: \xE2\x96\xB2/\xE2\x96\xBC vs hard baseline, \xE2\x96\xB3/\xE2\x96\xBD vs the"
                  " matching non-weak policy at equal epsilon\n\n",
                  sweep.runs.front().metric_name.c_str(), base_values.size(), bonferroni_m, alpha);
    out += line;
    std::snprintf(line, sizeof line, "%-8s %-9s %-20s %-8s %-12s %-12s\n", "policy", "epsilon", "mean+-std",
                  "markers", "p_vs_hard", "p_vs_ls");
    out += line;
    for (const auto& row : sweep.rows) {
        const auto values = row_values(sweep, row);
        std::string marker;
        std::string p_base = "-";
        std::string p_ls = "-";
        if (&row != &baseline) {
            p_base = detail::fixed(compare(values, base_values, "\xE2\x96\xB2", "\xE2\x96\xBC", marker));
            std::string ls_policy;
            if (row.policy == "t-wsls") {
                ls_policy = "t-ls";
            } else if (row.policy == "wsls") {
                ls_policy = "ls";
            }
            if (const SweepRow* ls_row = ls_policy.empty() ? nullptr : find_row(ls_policy, row.epsilon)) {
                p_ls = detail::fixed(
                    compare(values, row_values(sweep, *ls_row), "\xE2\x96\xB3", "\xE2\x96\xBD", marker));
            }
        }
        const std::string mean_std = detail::fixed(row.aggregate.mean, 4) + "+-" + detail::fixed(row.aggregate.std, 4);
        std::snprintf(line, sizeof line, "%-8s %-9s %-20s %-8s %-12s %-12s\n", row.policy.c_str(),
                      detail::fixed(row.epsilon, 2).c_str(), mean_std.c_str(), marker.empty() ? "-" : marker.c_str(),
                      p_base.c_str(), p_ls.c_str());
        out += line;
    }
    return out;
}

void write_significance_report(const std::filesystem::path& path, const std::string& report) {
    detail::write_file_atomic(path, report);
}

}  // namespace smoothrank
