#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "smoothrank/corpus_io.hpp"
#include "smoothrank/types.hpp"

namespace smoothrank {

/// Lowercases ASCII letters and splits on every byte that is not [a-z0-9].
std::vector<std::string> tokenize(std::string_view text);

/// Unique terms in first-occurrence order.
std::vector<std::string> unique_terms(std::span<const std::string> terms);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc;  // position of the document in the index
    std::uint32_t tf;

    bool operator==(const Posting&) const = default;
};

class InvertedIndex {
  public:
    InvertedIndex() = default;

    /// Throws DataError for an empty corpus.
    static InvertedIndex build(const Corpus& corpus, Bm25Params params = {});

    /// Reassembles an index from its serialized parts, checking consistency.
    static InvertedIndex from_parts(std::vector<std::string> doc_ids,
                                    std::vector<std::uint32_t> doc_lengths,
                                    std::unordered_map<std::string, std::vector<Posting>> postings,
                                    Bm25Params params);

    [[nodiscard]] std::size_t doc_count() const { return doc_ids_.size(); }
    [[nodiscard]] double avg_doc_length() const { return avg_doc_length_; }
    [[nodiscard]] const Bm25Params& params() const { return params_; }

    [[nodiscard]] std::span<const std::string> doc_ids() const { return doc_ids_; }
    [[nodiscard]] const std::string& doc_id(std::size_t doc) const { return doc_ids_[doc]; }
    [[nodiscard]] std::optional<std::size_t> doc_position(const std::string& id) const;
    [[nodiscard]] std::uint32_t doc_length(std::size_t doc) const { return doc_lengths_[doc]; }
    [[nodiscard]] std::span<const std::uint32_t> doc_lengths() const { return doc_lengths_; }

    /// Postings sorted by document position; empty span for unseen terms.
    [[nodiscard]] std::span<const Posting> postings(const std::string& term) const;
    [[nodiscard]] const std::unordered_map<std::string, std::vector<Posting>>& all_postings() const {
        return postings_;
    }
    [[nodiscard]] std::size_t doc_frequency(const std::string& term) const {
        return postings(term).size();
    }
    /// Nonnegative (Lucene-style) idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    [[nodiscard]] double idf(const std::string& term) const;
    [[nodiscard]] std::uint32_t term_frequency(const std::string& term, std::size_t doc) const;

    bool operator==(const InvertedIndex& other) const;

  private:
    void finalize();

    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, std::size_t> doc_position_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_doc_length_ = 0.0;
    Bm25Params params_;
};

/// Saturated term weight tf*(k1+1) / (tf + k1*(1 - b + b*len/avglen)).
double bm25_term_weight(double tf, double doc_length, double avg_doc_length, const Bm25Params& params);

/// BM25 of an indexed document; repeated query terms count once.
/// Throws DataError for an unknown doc id.
double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms,
                  const std::string& doc_id);

/// BM25 of arbitrary document tokens against the index statistics.
double bm25_score_tokens(const InvertedIndex& index, std::span<const std::string> query_terms,
                         std::span<const std::string> doc_terms);

struct RankedDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const RankedDoc&) const = default;
};

/// Top-k documents with positive BM25 score, by descending score then
/// ascending doc id.
std::vector<RankedDoc> retrieve_top_k(const InvertedIndex& index, std::string_view query_text,
                                      std::size_t k);

struct ScoredCandidate {
    std::string doc_id;
    double raw_score = 0.0;
    double normalized_score = 0.0;

    bool operator==(const ScoredCandidate&) const = default;
};

/// (s - min) / (max - min); every output is 0.5 when max == min.
std::vector<double> minmax_normalize(std::span<const double> raw_scores);

/// The list that BM25 negatives are drawn from: the top (m + |relevant|)
/// documents, padded with random zero-score non-relevant documents when
/// fewer than m non-relevant ones matched, and min-max normalized as a whole.
/// Relevant documents stay in the pool so they take part in the scaling.
std::vector<ScoredCandidate> bm25_candidate_pool(const InvertedIndex& index, std::string_view query_text,
                                                 const std::set<std::string>& relevant_ids,
                                                 std::size_t m, std::uint64_t seed);

/// First m non-relevant entries of bm25_candidate_pool.
std::vector<ScoredCandidate> sample_negatives_bm25(const InvertedIndex& index, std::string_view query_text,
                                                   const std::set<std::string>& relevant_ids,
                                                   std::size_t m, std::uint64_t seed);

/// Normalized score given to negatives that carry no retrieval signal.
inline constexpr double kUninformativeScore = 0.5;

/// m distinct documents drawn uniformly without replacement, excluding the
/// relevant ones. Every normalized score is kUninformativeScore.
std::vector<ScoredCandidate> sample_negatives_random(std::span<const std::string> doc_ids,
                                                     const std::set<std::string>& relevant_ids,
                                                     std::size_t m, std::uint64_t seed);

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

struct ScoreStats {
    std::vector<HistogramBin> histogram;
    double mean = 0.0;
    std::size_t count = 0;
};

inline constexpr std::size_t kScoreHistogramBins = 20;

/// Histogram and mean of normalized scores in [0, 1]. The last bin includes 1.
ScoreStats score_stats(std::span<const double> scores);

/// Statistics of the negative instances' normalized sampler scores.
/// Throws DataError when there are no negatives.
ScoreStats ns_score_stats(std::span<const TrainInstance> instances);

/// histogram.csv: "bin_lower,bin_upper,count" rows and a trailing
/// "mean,<value>,<count>" line.
void write_histogram_csv(const std::filesystem::path& path, const ScoreStats& stats);

/// An index file bundles the documents (needed for feature extraction) with
/// the postings built from them.
struct IndexBundle {
    Corpus corpus;
    InvertedIndex index;
};

void save_index(const std::filesystem::path& path, const Corpus& corpus, const InvertedIndex& index);
IndexBundle load_index(const std::filesystem::path& path);

}  // namespace smoothrank
