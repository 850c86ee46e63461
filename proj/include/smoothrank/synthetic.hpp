#pragma once

#include <cstddef>
#include <cstdint>

#include "smoothrank/corpus_io.hpp"

namespace smoothrank {

/// Topical toy collection. Every query is a few key terms of one topic; its
/// relevant document carries most of them, and per-query distractors from
/// the same topic carry some of them (often repeated), so BM25 retrieves
/// them as hard negatives. All documents have the same length, so length
/// statistics carry no signal.
struct SyntheticSpec {
    std::size_t documents = 1000;
    std::size_t queries = 200;
    std::size_t topics = 20;
    std::size_t topic_vocabulary = 60;
    std::size_t background_vocabulary = 400;
    std::size_t key_terms = 3;
    std::size_t doc_length = 24;  // tokens per document
    std::size_t distractors_per_query = 4;
    double key_dropout = 0.1;  // chance that the relevant document misses a key term
    std::uint64_t seed = 42;
};

struct SyntheticCollection {
    Corpus corpus;
    QuerySet queries;
    Qrels qrels;
};

/// Deterministic per spec.seed. Throws UsageError when the document budget
/// cannot hold a relevant document plus distractors for every query.
SyntheticCollection generate_synthetic(const SyntheticSpec& spec);

/// First `count` queries (in query-set order) with their judgments.
SyntheticCollection slice_queries(const SyntheticCollection& all, std::size_t first, std::size_t count);

}  // namespace smoothrank
