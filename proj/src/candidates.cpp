#include "smoothrank/candidates.hpp"

#include <charconv>
#include <unordered_set>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"
#include "smoothrank/rng.hpp"

namespace smoothrank {

const std::string& CandidateList::relevant_id() const {
    const std::string* found = nullptr;
    for (const auto& c : candidates) {
        if (c.label == Label::Relevant) {
            if (found != nullptr) {
                throw DataError("query " + query_id + " has more than one relevant candidate");
            }
            found = &c.doc_id;
        }
    }
    if (found == nullptr) {
        throw DataError("query " + query_id + " has no relevant candidate");
    }
    return *found;
}

SamplerKind parse_sampler_kind(const std::string& name) {
    if (name == "bm25") {
        return SamplerKind::Bm25;
    }
    if (name == "random") {
        return SamplerKind::Random;
    }
    throw UsageError("unknown negative sampler \"" + name + "\" (expected bm25 or random)");
}

std::vector<CandidateList> build_candidate_lists(const QuerySet& queries, const Qrels& qrels,
                                                 const InvertedIndex& index, const NegativeSampler& sampler,
                                                 std::size_t n) {
    if (n < 2) {
        throw UsageError("candidate lists need n >= 2");
    }
    if (index.doc_count() < n) {
        throw DataError("corpus has " + std::to_string(index.doc_count()) + " documents, fewer than n = " +
                        std::to_string(n));
    }
    std::vector<CandidateList> lists;
    lists.reserve(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const Query& query = queries[qi];
        const auto* relevant = qrels.relevant_for(query.id);
        if (relevant == nullptr || relevant->empty()) {
            throw DataError("query " + query.id + " has no relevant document");
        }
        const std::string& positive = *relevant->begin();
        if (!index.doc_position(positive)) {
            throw DataError("relevant document " + positive + " of query " + query.id + " is not indexed");
        }
        const std::uint64_t seed = derive_seed(sampler.seed, qi);
        const std::size_t m = n - 1;

        CandidateList list{query.id, {}};
        list.candidates.reserve(n);
        if (sampler.kind == SamplerKind::Bm25) {
            const auto pool = bm25_candidate_pool(index, query.text, *relevant, m, seed);
            double positive_score = 0.0;
            for (const auto& c : pool) {
                if (c.doc_id == positive) {
                    positive_score = c.normalized_score;
                }
            }
            list.candidates.push_back(Candidate{positive, Label::Relevant, positive_score});
            for (const auto& c : pool) {
                if (relevant->count(c.doc_id) == 0 && list.candidates.size() < n) {
                    list.candidates.push_back(Candidate{c.doc_id, Label::NonRelevant, c.normalized_score});
                }
            }
        } else {
            list.candidates.push_back(Candidate{positive, Label::Relevant, kUninformativeScore});
            for (const auto& c : sample_negatives_random(index.doc_ids(), *relevant, m, seed)) {
                list.candidates.push_back(Candidate{c.doc_id, Label::NonRelevant, c.normalized_score});
            }
        }
        validate_candidate_list(list);
        lists.push_back(std::move(list));
    }
    return lists;
}

void validate_candidate_list(const CandidateList& list) {
    if (list.candidates.empty()) {
        throw DataError("query " + list.query_id + " has an empty candidate list");
    }
    (void)list.relevant_id();
    std::unordered_set<std::string> seen;
    for (const auto& c : list.candidates) {
        if (!seen.insert(c.doc_id).second) {
            throw DataError("query " + list.query_id + " lists document " + c.doc_id + " twice");
        }
        if (!(c.ns_score >= 0.0 && c.ns_score <= 1.0)) {
            throw DataError("query " + list.query_id + ": ns_score of " + c.doc_id + " outside [0, 1]");
        }
    }
}

std::vector<TrainInstance> flatten(const std::vector<CandidateList>& lists) {
    std::vector<TrainInstance> out;
    for (const auto& list : lists) {
        for (const auto& c : list.candidates) {
            out.push_back(TrainInstance{list.query_id, c.doc_id, c.label, c.ns_score});
        }
    }
    return out;
}

namespace {
constexpr const char* kCandidatesHeader = "qid\tdocid\tlabel\tns_score";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return fields;
}
}  // namespace

void write_candidates(const std::filesystem::path& path, const std::vector<CandidateList>& lists) {
    std::string out = std::string(kCandidatesHeader) + "\n";
    for (const auto& list : lists) {
        for (const auto& c : list.candidates) {
            out += list.query_id + "\t" + c.doc_id + "\t" + std::to_string(class_index(c.label)) + "\t" +
                   detail::fixed(c.ns_score) + "\n";
        }
    }
    detail::write_file_atomic(path, out);
}

std::vector<CandidateList> load_candidates(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != kCandidatesHeader) {
        throw DataError(path.string() + ":1: expected header \"qid<TAB>docid<TAB>label<TAB>ns_score\"");
    }
    std::vector<CandidateList> lists;
    std::unordered_set<std::string> finished;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        const auto fields = split_tabs(lines[i]);
        if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
            throw DataError(where + ": expected 4 tab-separated columns");
        }
        Label label;
        if (fields[2] == "1") {
            label = Label::Relevant;
        } else if (fields[2] == "0") {
            label = Label::NonRelevant;
        } else {
            throw DataError(where + ": label must be 0 or 1");
        }
        double score = 0.0;
        const char* begin = fields[3].data();
        const char* end = begin + fields[3].size();
        auto [ptr, ec] = std::from_chars(begin, end, score);
        if (ec != std::errc() || ptr != end || !(score >= 0.0 && score <= 1.0)) {
            throw DataError(where + ": ns_score must be a number in [0, 1]");
        }
        if (lists.empty() || lists.back().query_id != fields[0]) {
            if (!lists.empty()) {
                finished.insert(lists.back().query_id);
            }
            if (finished.count(fields[0]) != 0) {
                throw DataError(where + ": rows of query " + fields[0] + " are not contiguous");
            }
            lists.push_back(CandidateList{fields[0], {}});
        }
        lists.back().candidates.push_back(Candidate{fields[1], label, score});
    }
    for (const auto& list : lists) {
        validate_candidate_list(list);
    }
    return lists;
}

}  // namespace smoothrank
