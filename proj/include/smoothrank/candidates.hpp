#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smoothrank/corpus_io.hpp"
#include "smoothrank/retrieval.hpp"
#include "smoothrank/types.hpp"

namespace smoothrank {

struct Candidate {
    std::string doc_id;
    Label label = Label::NonRelevant;
    double ns_score = 0.0;

    bool operator==(const Candidate&) const = default;
};

/// One query's re-ranking list: the positive first, then the sampled
/// negatives in sampler order.
struct CandidateList {
    std::string query_id;
    std::vector<Candidate> candidates;

    [[nodiscard]] std::size_t n() const { return candidates.size(); }
    /// Doc id of the single relevant candidate; throws DataError otherwise.
    [[nodiscard]] const std::string& relevant_id() const;

    bool operator==(const CandidateList&) const = default;
};

enum class SamplerKind { Bm25, Random };

struct NegativeSampler {
    SamplerKind kind = SamplerKind::Bm25;
    std::uint64_t seed = 0;
};

/// Parses "bm25" / "random"; throws UsageError otherwise.
SamplerKind parse_sampler_kind(const std::string& name);

/// Builds one list of n candidates per query, in query-set order. The
/// positive is the lexicographically smallest relevant doc id; the other
/// n - 1 entries come from the sampler and never include a relevant document.
std::vector<CandidateList> build_candidate_lists(const QuerySet& queries, const Qrels& qrels,
                                                 const InvertedIndex& index,
                                                 const NegativeSampler& sampler, std::size_t n);

/// Checks one positive per list, distinct doc ids and scores in [0, 1].
void validate_candidate_list(const CandidateList& list);

/// All (query, candidate) pairs in list order.
std::vector<TrainInstance> flatten(const std::vector<CandidateList>& lists);

/// candidates.tsv: header "qid\tdocid\tlabel\tns_score", scores with six
/// decimals. Rows of one query are contiguous.
void write_candidates(const std::filesystem::path& path, const std::vector<CandidateList>& lists);
std::vector<CandidateList> load_candidates(const std::filesystem::path& path);

}  // namespace smoothrank
