#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "smoothrank/errors.hpp"

using namespace smoothrank;
namespace fs = std::filesystem;

namespace {

TrainConfig train_config_from_flags(const std::string& policy, const CLI::Option* epsilon_opt, double epsilon,
                                    const CLI::Option* switch_opt, std::uint64_t switch_at) {
    const auto spec = parse_policy(policy);
    TrainConfig config;
    if (spec.kind == SmoothingKind::Hard) {
        if (epsilon_opt->count() > 0 && epsilon != 0.0) {
            throw UsageError("--policy hard takes no --epsilon (hard labels force epsilon = 0)");
        }
        epsilon = 0.0;
    }
    config.policy = SmoothingPolicy{spec.kind, epsilon};
    if (spec.two_stage) {
        config.schedule.kind = ScheduleKind::TwoStage;
        config.schedule.switch_at = switch_at;  // 0 means half of the budget, resolved below
    } else if (switch_opt->count() > 0) {
        throw UsageError("--switch-at only applies to t-ls and t-wsls");
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label smoothing and weakly supervised label smoothing for pointwise neural rankers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    cli::GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic topical collection (docs, queries, qrels)");
    generate->add_option("--documents", gen.spec.documents, "Number of documents")->capture_default_str();
    generate->add_option("--queries", gen.spec.queries, "Number of queries")->capture_default_str();
    generate->add_option("--topics", gen.spec.topics, "Number of topics")->capture_default_str();
    generate->add_option("--seed", gen.spec.seed, "Generator seed")->capture_default_str();
    generate->add_option("--eval-queries", gen.eval_queries,
                         "Also write queries.train.jsonl / queries.eval.jsonl holding out this many queries");
    generate->add_option("--out", gen.out, "Output directory")->required();

    fs::path index_docs, index_out;
    auto* index = app.add_subcommand("index", "Build a BM25 index file from documents.jsonl");
    index->add_option("--docs", index_docs, "documents.jsonl")->required();
    index->add_option("--out", index_out, "Index file to write")->required();

    cli::SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "Build candidate lists with a negative sampler");
    sample->add_option("--index", sample_args.index)->required();
    sample->add_option("--queries", sample_args.queries)->required();
    sample->add_option("--qrels", sample_args.qrels)->required();
    sample->add_option("--ns", sample_args.ns, "bm25 or random")->capture_default_str();
    sample->add_option("--n", sample_args.n, "Candidates per query")->capture_default_str();
    sample->add_option("--seed", sample_args.seed)->capture_default_str();
    sample->add_option("--out", sample_args.out, "candidates.tsv to write")->required();

    cli::TrainInputs train_inputs;
    std::string policy;
    double epsilon = 0.2;
    std::uint64_t switch_at = 0;
    TrainConfig train_defaults;
    fs::path train_out;
    auto* train_cmd = app.add_subcommand("train", "Train a ranker on candidate lists");
    train_cmd->add_option("--candidates", train_inputs.candidates)->required();
    train_cmd->add_option("--index", train_inputs.index)->required();
    train_cmd->add_option("--queries", train_inputs.queries)->required();
    train_cmd->add_option("--policy", policy, "hard, ls, wsls, t-ls or t-wsls")->required();
    auto* eps_opt = train_cmd->add_option("--epsilon", epsilon, "Smoothing strength")->capture_default_str();
    auto* switch_opt =
        train_cmd->add_option("--switch-at", switch_at, "Two-stage switch point (default: half the budget)");
    train_cmd->add_option("--batch-size", train_defaults.batch_size)->capture_default_str();
    train_cmd->add_option("--instances", train_defaults.total_instances)->capture_default_str();
    train_cmd->add_option("--lr", train_defaults.adam.lr)->capture_default_str();
    train_cmd->add_option("--beta1", train_defaults.adam.beta1)->capture_default_str();
    train_cmd->add_option("--beta2", train_defaults.adam.beta2)->capture_default_str();
    train_cmd->add_option("--eps-adam", train_defaults.adam.eps)->capture_default_str();
    train_cmd->add_option("--seed", train_defaults.seed)->capture_default_str();
    train_cmd->add_option("--out", train_out, "Output directory")->required();

    cli::EvaluateArgs eval_args;
    std::string eval_config_id;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute R_n@K of a checkpoint and append it to results.csv");
    evaluate_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
    evaluate_cmd->add_option("--candidates", eval_args.candidates)->required();
    evaluate_cmd->add_option("--index", eval_args.index)->required();
    evaluate_cmd->add_option("--queries", eval_args.queries)->required();
    evaluate_cmd->add_option("--k", eval_args.k)->capture_default_str();
    auto* config_id_opt = evaluate_cmd->add_option("--config-id", eval_config_id, "Override the config id column");
    evaluate_cmd->add_option("--out", eval_args.out, "results.csv to append to")->required();

    cli::SweepInputs sweep_inputs;
    SweepConfig sweep_config;
    sweep_config.epsilons = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t bonferroni_m = 2;
    std::uint64_t sweep_switch = 0;
    fs::path sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Epsilon sensitivity sweep over policies and seeds");
    sweep->add_option("--candidates", sweep_inputs.candidates, "Training candidates")->required();
    sweep->add_option("--eval-candidates", sweep_inputs.eval_candidates, "Evaluation candidates (default: training)");
    sweep->add_option("--index", sweep_inputs.index)->required();
    sweep->add_option("--queries", sweep_inputs.queries)->required();
    sweep->add_option("--epsilons", sweep_config.epsilons)->delimiter(',')->capture_default_str();
    sweep->add_option("--policies", sweep_config.policies)->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", sweep_config.seeds)->delimiter(',')->capture_default_str();
    sweep->add_option("--batch-size", sweep_config.base.batch_size)->capture_default_str();
    sweep->add_option("--instances", sweep_config.base.total_instances)->capture_default_str();
    sweep->add_option("--switch-at", sweep_switch, "Two-stage switch point (default: half the budget)");
    sweep->add_option("--lr", sweep_config.base.adam.lr)->capture_default_str();
    sweep->add_option("--k", sweep_config.k)->capture_default_str();
    sweep->add_option("--bonferroni-m", bonferroni_m)->capture_default_str();
    sweep->add_option("--out", sweep_out, "Output directory")->required();

    fs::path ns_candidates, ns_out;
    auto* analyze = app.add_subcommand("analyze-ns", "Histogram of normalized negative-sampler scores");
    analyze->add_option("--candidates", ns_candidates)->required();
    analyze->add_option("--out", ns_out, "histogram.csv to write")->required();

    fs::path rerun_manifest, rerun_out;
    auto* rerun = app.add_subcommand("rerun", "Re-execute a recorded train/sweep run and compare output digests");
    rerun->add_option("--manifest", rerun_manifest)->required();
    rerun->add_option("--out", rerun_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            cli::cmd_generate(gen);
        } else if (*index) {
            cli::cmd_index(index_docs, index_out);
        } else if (*sample) {
            cli::cmd_sample(sample_args);
        } else if (*train_cmd) {
            TrainConfig config = train_config_from_flags(policy, eps_opt, epsilon, switch_opt, switch_at);
            config.batch_size = train_defaults.batch_size;
            config.total_instances = train_defaults.total_instances;
            config.adam = train_defaults.adam;
            config.seed = train_defaults.seed;
            if (config.schedule.kind == ScheduleKind::TwoStage && config.schedule.switch_at == 0) {
                if (switch_opt->count() > 0) {
                    throw UsageError("--switch-at must be >= 1");
                }
                config.schedule.switch_at = std::max<std::uint64_t>(1, config.total_instances / 2);
            }
            cli::cmd_train(train_inputs, config, train_out);
        } else if (*evaluate_cmd) {
            if (config_id_opt->count() > 0) {
                eval_args.config_id = eval_config_id;
            }
            cli::cmd_evaluate(eval_args);
        } else if (*sweep) {
            if (sweep_config.seeds.empty()) {
                throw UsageError("--seeds must list at least 2 seeds");
            }
            sweep_config.base.schedule.switch_at =
                sweep_switch > 0 ? sweep_switch : std::max<std::uint64_t>(1, sweep_config.base.total_instances / 2);
            sweep_config.threads = cli::thread_budget();
            cli::cmd_sweep(sweep_inputs, sweep_config, bonferroni_m, sweep_out);
        } else if (*analyze) {
            cli::cmd_analyze_ns(ns_candidates, ns_out);
        } else if (*rerun) {
            return cli::cmd_rerun(rerun_manifest, rerun_out) ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
