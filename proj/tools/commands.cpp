#include "commands.hpp"

#include <cstdlib>
#include <iostream>

#include "smoothrank/candidates.hpp"
#include "smoothrank/corpus_io.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/ranker.hpp"
#include "smoothrank/retrieval.hpp"

namespace smoothrank::cli {

namespace {

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create directory " + dir.string());
    }
}

std::size_t common_length(const std::vector<CandidateList>& lists, const fs::path& path) {
    if (lists.empty()) {
        throw DataError(path.string() + ": no candidate lists");
    }
    const std::size_t n = lists.front().n();
    for (const auto& l : lists) {
        if (l.n() != n) {
            throw DataError(path.string() + ": query " + l.query_id + " has " + std::to_string(l.n()) +
                            " candidates, expected " + std::to_string(n));
        }
    }
    return n;
}

}  // namespace

std::size_t thread_budget() {
    const char* raw = std::getenv("SMOOTHRANK_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return 1;
    }
    try {
        const long value = std::stol(raw);
        if (value < 1) {
            throw UsageError("SMOOTHRANK_THREADS must be >= 1");
        }
        return static_cast<std::size_t>(value);
    } catch (const std::logic_error&) {
        throw UsageError(std::string("SMOOTHRANK_THREADS is not a number: ") + raw);
    }
}

void cmd_generate(const GenerateArgs& args) {
    if (args.eval_queries >= args.spec.queries) {
        throw UsageError("--eval-queries must be smaller than --queries");
    }
    const auto all = generate_synthetic(args.spec);
    ensure_directory(args.out);
    write_documents(args.out / "docs.jsonl", all.corpus);
    write_queries(args.out / "queries.jsonl", all.queries);
    write_qrels(args.out / "qrels.txt", all.qrels);
    std::cout << "wrote " << all.corpus.size() << " documents and " << all.queries.size() << " queries to "
              << args.out.string() << "\n";
    if (args.eval_queries > 0) {
        const std::size_t train_count = all.queries.size() - args.eval_queries;
        write_queries(args.out / "queries.train.jsonl", slice_queries(all, 0, train_count).queries);
        write_queries(args.out / "queries.eval.jsonl", slice_queries(all, train_count, args.eval_queries).queries);
        std::cout << "split " << train_count << " training / " << args.eval_queries << " evaluation queries\n";
    }
}

void cmd_index(const fs::path& docs, const fs::path& out) {
    const auto corpus = load_documents(docs);
    const auto index = InvertedIndex::build(corpus);
    save_index(out, corpus, index);
    std::cout << "indexed N=" << index.doc_count() << " documents, avg_doc_length=" << index.avg_doc_length()
              << ", terms=" << index.all_postings().size() << "\n";
}

void cmd_sample(const SampleArgs& args) {
    if (args.n < 2) {
        throw UsageError("--n must be >= 2");
    }
    const auto kind = parse_sampler_kind(args.ns);
    const auto bundle = load_index(args.index);
    const auto queries = load_queries(args.queries);
    const auto all_qrels = load_qrels(args.qrels);
    // A qrels file may cover several query splits; only this split is checked.
    Qrels qrels;
    for (const auto& [qid, docs] : all_qrels.judgments) {
        if (queries.contains(qid)) {
            qrels.judgments[qid] = docs;
        }
    }
    validate_qrels(qrels, queries, bundle.corpus);
    const auto lists = build_candidate_lists(queries, qrels, bundle.index, NegativeSampler{kind, args.seed}, args.n);
    write_candidates(args.out, lists);
    std::cout << "wrote " << lists.size() << " candidate lists of " << args.n << " (" << args.ns << ") to "
              << args.out.string() << "\n";
}

RunManifest cmd_train(const TrainInputs& inputs, TrainConfig config, const fs::path& out) {
    const auto lists = load_candidates(inputs.candidates);
    config.n = common_length(lists, inputs.candidates);
    config.validate();
    const auto bundle = load_index(inputs.index);
    const auto queries = load_queries(inputs.queries);
    const auto features = FeatureStore::build(queries, bundle.corpus, bundle.index, lists);

    const auto result = train(config, features, lists);
    ensure_directory(out);
    const auto checkpoint = out / "checkpoint.smrk";
    const auto log_path = out / "trainlog.csv";
    save_checkpoint(result.params, result.state, checkpoint);
    write_trainlog_csv(log_path, result.log);

    RunManifest manifest;
    manifest.kind = "train";
    manifest.config = train_config_to_json(config);
    manifest.inputs = {digest_file("candidates", inputs.candidates), digest_file("index", inputs.index),
                       digest_file("queries", inputs.queries)};
    manifest.outputs = {digest_file("checkpoint", checkpoint), digest_file("trainlog", log_path)};
    write_manifest(out / "manifest.json", manifest);

    std::cout << "trained " << config_id(config) << " seed=" << config.seed << " on " << config.total_instances
              << " instances; final batch loss " << result.log.entries.back().loss << "\n"
              << "checkpoint " << checkpoint.string() << " sha256=" << manifest.outputs[0].sha256 << "\n";
    return manifest;
}

void cmd_evaluate(const EvaluateArgs& args) {
    const auto lists = load_candidates(args.candidates);
    const std::size_t n = common_length(lists, args.candidates);
    if (args.k < 1 || args.k > n) {
        throw UsageError("--k must be in [1, " + std::to_string(n) + "]");
    }
    const auto checkpoint = load_checkpoint(args.checkpoint);
    const auto bundle = load_index(args.index);
    const auto queries = load_queries(args.queries);
    const auto features = FeatureStore::build(queries, bundle.corpus, bundle.index, lists);

    RunResult result = evaluate(checkpoint.params, features, lists, args.k);
    const auto manifest_path = args.checkpoint.parent_path() / "manifest.json";
    std::error_code ec;
    if (fs::exists(manifest_path, ec)) {
        const auto manifest = load_manifest(manifest_path);
        const auto config = train_config_from_json(manifest.config);
        result.config_id = config_id(config);
        result.policy = policy_name(config.policy.kind, config.schedule.kind);
        result.epsilon = config.policy.epsilon;
        result.seed = config.seed;
    } else {
        result.config_id = "unknown";
        result.policy = "unknown";
    }
    if (args.config_id) {
        result.config_id = *args.config_id;
    }
    write_results_csv(args.out, std::vector<RunResult>{result}, true);
    std::cout << result.metric_name << " = " << result.value << " over " << lists.size() << " queries ("
              << result.config_id << ", seed " << result.seed << ")\n";
}

RunManifest cmd_sweep(const SweepInputs& inputs, SweepConfig config, std::size_t bonferroni_m, const fs::path& out) {
    const auto lists = load_candidates(inputs.candidates);
    const auto eval_path = inputs.eval_candidates.empty() ? inputs.candidates : inputs.eval_candidates;
    const auto eval_lists = inputs.eval_candidates.empty() ? lists : load_candidates(eval_path);
    config.base.n = common_length(lists, inputs.candidates);
    const std::size_t eval_n = common_length(eval_lists, eval_path);
    if (config.k < 1 || config.k > eval_n) {
        throw UsageError("--k must be in [1, " + std::to_string(eval_n) + "]");
    }
    config.validate();
    (void)bonferroni(std::vector<double>{}, bonferroni_m);

    const auto bundle = load_index(inputs.index);
    const auto queries = load_queries(inputs.queries);
    auto features = FeatureStore::build(queries, bundle.corpus, bundle.index, lists);
    features.extend(queries, bundle.corpus, bundle.index, eval_lists);

    const auto sweep = epsilon_sweep(config, features, lists, eval_lists);
    ensure_directory(out);
    write_sweep_csv(out / "sweep.csv", sweep);
    write_results_csv(out / "results.csv", sweep.runs, false);
    const std::string report = significance_report(sweep, bonferroni_m);
    write_significance_report(out / "significance.txt", report);

    RunManifest manifest;
    manifest.kind = "sweep";
    manifest.config = sweep_config_to_json(config, bonferroni_m);
    manifest.inputs = {digest_file("candidates", inputs.candidates), digest_file("eval_candidates", eval_path),
                       digest_file("index", inputs.index), digest_file("queries", inputs.queries)};
    manifest.outputs = {digest_file("sweep", out / "sweep.csv"), digest_file("results", out / "results.csv"),
                        digest_file("significance", out / "significance.txt")};
    write_manifest(out / "manifest.json", manifest);
    std::cout << report;
    return manifest;
}

void cmd_analyze_ns(const fs::path& candidates, const fs::path& out) {
    const auto lists = load_candidates(candidates);
    const auto stats = ns_score_stats(flatten(lists));
    write_histogram_csv(out, stats);
    std::cout << "negatives=" << stats.count << " mean normalized score=" << stats.mean << "\n";
}

bool cmd_rerun(const fs::path& manifest_path, const fs::path& out) {
    const auto manifest = load_manifest(manifest_path);
    const auto changed = changed_inputs(manifest);
    if (!changed.empty()) {
        std::string list;
        for (const auto& c : changed) {
            list += " " + c;
        }
        throw DataError("inputs changed since the run was recorded:" + list);
    }
    auto input = [&](const std::string& role) {
        const auto* d = find_digest(manifest.inputs, role);
        if (d == nullptr) {
            throw DataError("manifest has no input \"" + role + "\"");
        }
        return fs::path(d->path);
    };
    RunManifest rerun;
    std::string role;
    if (manifest.kind == "train") {
        rerun = cmd_train({input("candidates"), input("index"), input("queries")},
                          train_config_from_json(manifest.config), out);
        role = "checkpoint";
    } else if (manifest.kind == "sweep") {
        const auto m = manifest.config.value("bonferroni_m", std::size_t{2});
        auto config = sweep_config_from_json(manifest.config);
        config.threads = thread_budget();
        rerun = cmd_sweep({input("candidates"), input("eval_candidates"), input("index"), input("queries")}, config,
                          m, out);
        role = "sweep";
    } else {
        throw DataError("unknown manifest kind \"" + manifest.kind + "\"");
    }
    const auto* before = find_digest(manifest.outputs, role);
    const auto* after = find_digest(rerun.outputs, role);
    const bool same = before != nullptr && after != nullptr && before->sha256 == after->sha256;
    std::cout << role << (same ? " digest reproduced: " : " digest differs: ") << (after ? after->sha256 : "")
              << "\n";
    return same;
}

}  // namespace smoothrank::cli
