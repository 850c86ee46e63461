#include "smoothrank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "io_util.hpp"
#include "json.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/rng.hpp"

namespace smoothrank {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        terms.push_back(std::move(current));
    }
    return terms;
}

std::vector<std::string> unique_terms(std::span<const std::string> terms) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& t : terms) {
        if (seen.insert(t).second) {
            out.push_back(t);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// InvertedIndex

InvertedIndex InvertedIndex::build(const Corpus& corpus, Bm25Params params) {
    if (corpus.empty()) {
        throw DataError("cannot index an empty corpus");
    }
    InvertedIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto terms = tokenize(corpus[i].text);
        std::unordered_map<std::string, std::uint32_t> tf;
        for (const auto& t : terms) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back(Posting{static_cast<std::uint32_t>(i), count});
        }
        index.doc_ids_.push_back(corpus[i].id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    }
    index.finalize();
    return index;
}

InvertedIndex InvertedIndex::from_parts(std::vector<std::string> doc_ids, std::vector<std::uint32_t> doc_lengths,
                                        std::unordered_map<std::string, std::vector<Posting>> postings,
                                        Bm25Params params) {
    if (doc_ids.empty()) {
        throw DataError("index has no documents");
    }
    if (doc_ids.size() != doc_lengths.size()) {
        throw DataError("index document count does not match its length table");
    }
    std::vector<std::uint64_t> length_check(doc_ids.size(), 0);
    for (const auto& [term, list] : postings) {
        if (list.empty()) {
            throw DataError("index term has an empty posting list: " + term);
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].doc >= doc_ids.size() || list[i].tf == 0 || (i > 0 && list[i].doc <= list[i - 1].doc)) {
                throw DataError("index posting list is inconsistent for term " + term);
            }
            length_check[list[i].doc] += list[i].tf;
        }
    }
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
        if (length_check[d] != doc_lengths[d]) {
            throw DataError("index postings do not add up to the length of document " + doc_ids[d]);
        }
    }
    InvertedIndex index;
    index.doc_ids_ = std::move(doc_ids);
    index.doc_lengths_ = std::move(doc_lengths);
    index.postings_ = std::move(postings);
    index.params_ = params;
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    doc_position_.clear();
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        if (!doc_position_.emplace(doc_ids_[i], i).second) {
            throw DataError("duplicate id: " + doc_ids_[i]);
        }
    }
    std::uint64_t total = 0;
    for (auto len : doc_lengths_) {
        total += len;
    }
    avg_doc_length_ = static_cast<double>(total) / static_cast<double>(doc_ids_.size());
}

std::optional<std::size_t> InvertedIndex::doc_position(const std::string& id) const {
    auto it = doc_position_.find(id);
    if (it == doc_position_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::span<const Posting> InvertedIndex::postings(const std::string& term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) {
        return {};
    }
    return it->second;
}

double InvertedIndex::idf(const std::string& term) const {
    const auto n = static_cast<double>(doc_count());
    const auto df = static_cast<double>(doc_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::uint32_t InvertedIndex::term_frequency(const std::string& term, std::size_t doc) const {
    const auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, std::size_t d) { return p.doc < d; });
    if (it == list.end() || it->doc != doc) {
        return 0;
    }
    return it->tf;
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
    return doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ && postings_ == other.postings_ &&
           params_.k1 == other.params_.k1 && params_.b == other.params_.b;
}

// ---------------------------------------------------------------------------
// BM25

double bm25_term_weight(double tf, double doc_length, double avg_doc_length, const Bm25Params& params) {
    const double norm = 1.0 - params.b + params.b * doc_length / avg_doc_length;
    return tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
}

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms,
                  const std::string& doc_id) {
    const auto doc = index.doc_position(doc_id);
    if (!doc) {
        throw DataError("unknown document " + doc_id);
    }
    const double len = index.doc_length(*doc);
    double score = 0.0;
    for (const auto& term : unique_terms(query_terms)) {
        const auto tf = index.term_frequency(term, *doc);
        if (tf > 0) {
            score += index.idf(term) * bm25_term_weight(tf, len, index.avg_doc_length(), index.params());
        }
    }
    return score;
}

double bm25_score_tokens(const InvertedIndex& index, std::span<const std::string> query_terms,
                         std::span<const std::string> doc_terms) {
    std::unordered_map<std::string, std::uint32_t> tf;
    for (const auto& t : doc_terms) {
        ++tf[t];
    }
    const auto len = static_cast<double>(doc_terms.size());
    double score = 0.0;
    for (const auto& term : unique_terms(query_terms)) {
        auto it = tf.find(term);
        if (it != tf.end()) {
            score += index.idf(term) * bm25_term_weight(it->second, len, index.avg_doc_length(), index.params());
        }
    }
    return score;
}

std::vector<RankedDoc> retrieve_top_k(const InvertedIndex& index, std::string_view query_text, std::size_t k) {
    if (k == 0) {
        throw UsageError("retrieve_top_k needs k >= 1");
    }
    const auto terms = unique_terms(tokenize(query_text));
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& term : terms) {
        const auto list = index.postings(term);
        if (list.empty()) {
            continue;
        }
        const double idf = index.idf(term);
        for (const auto& p : list) {
            if (acc[p.doc] == 0.0) {
                touched.push_back(p.doc);
            }
            acc[p.doc] += idf * bm25_term_weight(p.tf, index.doc_length(p.doc), index.avg_doc_length(),
                                                 index.params());
        }
    }
    std::vector<RankedDoc> ranked;
    ranked.reserve(touched.size());
    for (auto d : touched) {
        ranked.push_back(RankedDoc{index.doc_id(d), acc[d]});
    }
    auto before = [](const RankedDoc& a, const RankedDoc& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.doc_id < b.doc_id;
    };
    if (ranked.size() > k) {
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(), before);
        ranked.resize(k);
    } else {
        std::sort(ranked.begin(), ranked.end(), before);
    }
    return ranked;
}

// ---------------------------------------------------------------------------
// Negative sampling

std::vector<double> minmax_normalize(std::span<const double> raw_scores) {
    if (raw_scores.empty()) {
        throw DataError("cannot normalize an empty score list");
    }
    const auto [lo, hi] = std::minmax_element(raw_scores.begin(), raw_scores.end());
    const double min = *lo;
    const double range = *hi - *lo;
    std::vector<double> out(raw_scores.size());
    for (std::size_t i = 0; i < raw_scores.size(); ++i) {
        out[i] = range == 0.0 ? kUninformativeScore : (raw_scores[i] - min) / range;
    }
    return out;
}

namespace {

/// Picks `count` distinct entries of `pool` uniformly; order is the prefix of
/// a seeded Fisher-Yates permutation.
std::vector<std::string> draw_without_replacement(std::vector<std::string> pool, std::size_t count,
                                                  std::uint64_t seed) {
    Rng gen(seed);
    for (std::size_t i = 0; i < count; ++i) {
        auto j = i + static_cast<std::size_t>(uniform_index(gen, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace

std::vector<ScoredCandidate> bm25_candidate_pool(const InvertedIndex& index, std::string_view query_text,
                                                 const std::set<std::string>& relevant_ids, std::size_t m,
                                                 std::uint64_t seed) {
    if (m == 0) {
        throw UsageError("number of negatives must be >= 1");
    }
    const auto retrieved = retrieve_top_k(index, query_text, m + relevant_ids.size());
    std::vector<ScoredCandidate> pool;
    std::unordered_set<std::string> in_pool;
    std::size_t negatives = 0;
    for (const auto& r : retrieved) {
        pool.push_back(ScoredCandidate{r.doc_id, r.score, 0.0});
        in_pool.insert(r.doc_id);
        if (relevant_ids.count(r.doc_id) == 0) {
            ++negatives;
        }
    }
    if (negatives < m) {
        std::vector<std::string> fill;
        for (const auto& id : index.doc_ids()) {
            if (relevant_ids.count(id) == 0 && in_pool.count(id) == 0) {
                fill.push_back(id);
            }
        }
        const std::size_t needed = m - negatives;
        if (fill.size() < needed) {
            throw DataError("corpus has " + std::to_string(negatives + fill.size()) +
                            " non-relevant documents, " + std::to_string(m) + " negatives requested");
        }
        for (auto& id : draw_without_replacement(std::move(fill), needed, seed)) {
            pool.push_back(ScoredCandidate{std::move(id), 0.0, 0.0});
        }
    }
    std::vector<double> raw(pool.size());
    std::transform(pool.begin(), pool.end(), raw.begin(), [](const auto& c) { return c.raw_score; });
    const auto normalized = minmax_normalize(raw);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        pool[i].normalized_score = normalized[i];
    }
    return pool;
}

std::vector<ScoredCandidate> sample_negatives_bm25(const InvertedIndex& index, std::string_view query_text,
                                                   const std::set<std::string>& relevant_ids, std::size_t m,
                                                   std::uint64_t seed) {
    std::vector<ScoredCandidate> negatives;
    for (auto& c : bm25_candidate_pool(index, query_text, relevant_ids, m, seed)) {
        if (relevant_ids.count(c.doc_id) == 0 && negatives.size() < m) {
            negatives.push_back(std::move(c));
        }
    }
    return negatives;
}

std::vector<ScoredCandidate> sample_negatives_random(std::span<const std::string> doc_ids,
                                                     const std::set<std::string>& relevant_ids, std::size_t m,
                                                     std::uint64_t seed) {
    if (m == 0) {
        throw UsageError("number of negatives must be >= 1");
    }
    std::vector<std::string> pool;
    for (const auto& id : doc_ids) {
        if (relevant_ids.count(id) == 0) {
            pool.push_back(id);
        }
    }
    if (pool.size() < m) {
        throw DataError("corpus has " + std::to_string(pool.size()) + " non-relevant documents, " +
                        std::to_string(m) + " negatives requested");
    }
    std::vector<ScoredCandidate> out;
    for (auto& id : draw_without_replacement(std::move(pool), m, seed)) {
        out.push_back(ScoredCandidate{std::move(id), 0.0, kUninformativeScore});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Score statistics

ScoreStats score_stats(std::span<const double> scores) {
    if (scores.empty()) {
        throw DataError("no negative instances to analyze");
    }
    ScoreStats stats;
    stats.histogram.resize(kScoreHistogramBins);
    const auto bins = static_cast<double>(kScoreHistogramBins);
    for (std::size_t i = 0; i < kScoreHistogramBins; ++i) {
        stats.histogram[i].lower = static_cast<double>(i) / bins;
        stats.histogram[i].upper = static_cast<double>(i + 1) / bins;
    }
    double sum = 0.0;
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw DataError("normalized score outside [0, 1]: " + std::to_string(s));
        }
        auto bin = static_cast<std::size_t>(std::floor(s * bins));
        ++stats.histogram[std::min(bin, kScoreHistogramBins - 1)].count;
        sum += s;
    }
    stats.count = scores.size();
    stats.mean = sum / static_cast<double>(scores.size());
    return stats;
}

ScoreStats ns_score_stats(std::span<const TrainInstance> instances) {
    std::vector<double> scores;
    for (const auto& inst : instances) {
        if (inst.label == Label::NonRelevant) {
            scores.push_back(inst.ns_score);
        }
    }
    return score_stats(scores);
}

void write_histogram_csv(const std::filesystem::path& path, const ScoreStats& stats) {
    std::string out = "bin_lower,bin_upper,count\n";
    for (const auto& bin : stats.histogram) {
        out += detail::fixed(bin.lower) + "," + detail::fixed(bin.upper) + "," + std::to_string(bin.count) + "\n";
    }
    out += "mean," + detail::fixed(stats.mean) + "," + std::to_string(stats.count) + "\n";
    detail::write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Index files

namespace {
constexpr const char* kIndexFormat = "smoothrank-index";
constexpr int kIndexVersion = 1;
}  // namespace

void save_index(const std::filesystem::path& path, const Corpus& corpus, const InvertedIndex& index) {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : corpus) {
        docs.push_back({{"id", d.id}, {"text", d.text}});
    }
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : index.all_postings()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& p : list) {
            entries.push_back({p.doc, p.tf});
        }
        postings[term] = std::move(entries);
    }
    nlohmann::json root{{"format", kIndexFormat},
                        {"version", kIndexVersion},
                        {"k1", index.params().k1},
                        {"b", index.params().b},
                        {"documents", std::move(docs)},
                        {"doc_lengths", std::vector<std::uint32_t>(index.doc_lengths().begin(),
                                                                   index.doc_lengths().end())},
                        {"postings", std::move(postings)}};
    detail::write_file_atomic(path, root.dump() + "\n");
}

IndexBundle load_index(const std::filesystem::path& path) {
    const std::string contents = detail::read_file(path);
    try {
        const auto root = nlohmann::json::parse(contents);
        if (root.value("format", "") != kIndexFormat) {
            throw DataError(path.string() + ": not an index file");
        }
        if (root.at("version").get<int>() != kIndexVersion) {
            throw DataError(path.string() + ": unsupported index version");
        }
        IndexBundle bundle;
        std::vector<std::string> ids;
        for (const auto& d : root.at("documents")) {
            Document doc{d.at("id").get<std::string>(), d.at("text").get<std::string>()};
            ids.push_back(doc.id);
            bundle.corpus.add(std::move(doc));
        }
        std::unordered_map<std::string, std::vector<Posting>> postings;
        for (const auto& [term, entries] : root.at("postings").items()) {
            auto& list = postings[term];
            for (const auto& e : entries) {
                list.push_back(Posting{e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
            }
        }
        Bm25Params params{root.at("k1").get<double>(), root.at("b").get<double>()};
        bundle.index = InvertedIndex::from_parts(std::move(ids), root.at("doc_lengths").get<std::vector<std::uint32_t>>(),
                                                 std::move(postings), params);
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": corrupt index file: " + e.what());
    }
}

}  // namespace smoothrank
