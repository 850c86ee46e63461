#include "smoothrank/corpus_io.hpp"

#include "json.hpp"
#include <string>

#include "io_util.hpp"
#include "smoothrank/errors.hpp"

namespace smoothrank {

template <typename Item>
void IdCollection<Item>::add(Item item) {
    if (item.id.empty()) {
        throw DataError("empty id");
    }
    if (by_id_.count(item.id) != 0) {
        throw DataError("duplicate id: " + item.id);
    }
    by_id_.emplace(item.id, items_.size());
    items_.push_back(std::move(item));
}

template <typename Item>
const Item* IdCollection<Item>::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

template <typename Item>
std::optional<std::size_t> IdCollection<Item>::position(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

template class IdCollection<Document>;
template class IdCollection<Query>;

const std::set<std::string>* Qrels::relevant_for(const std::string& query_id) const {
    auto it = judgments.find(query_id);
    return it == judgments.end() ? nullptr : &it->second;
}

std::size_t Qrels::pair_count() const {
    std::size_t total = 0;
    for (const auto& [qid, docs] : judgments) {
        total += docs.size();
    }
    return total;
}

namespace {

template <typename Item>
IdCollection<Item> load_jsonl(const std::filesystem::path& path) {
    IdCollection<Item> items;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(where + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") || !obj["id"].is_string() ||
            !obj["text"].is_string()) {
            throw DataError(where + ": expected an object with string fields \"id\" and \"text\"");
        }
        Item item{obj["id"].get<std::string>(), obj["text"].get<std::string>()};
        if (item.id.empty()) {
            throw DataError(where + ": empty id");
        }
        if (items.contains(item.id)) {
            throw DataError(where + ": duplicate id " + item.id);
        }
        items.add(std::move(item));
    }
    return items;
}

template <typename Item>
void write_jsonl(const std::filesystem::path& path, const IdCollection<Item>& items) {
    std::string out;
    for (const auto& item : items) {
        out += nlohmann::json{{"id", item.id}, {"text", item.text}}.dump();
        out += '\n';
    }
    detail::write_file_atomic(path, out);
}

}  // namespace

Corpus load_documents(const std::filesystem::path& path) { return load_jsonl<Document>(path); }

QuerySet load_queries(const std::filesystem::path& path) { return load_jsonl<Query>(path); }

Qrels load_qrels(const std::filesystem::path& path) {
    Qrels qrels;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = detail::split_whitespace(lines[i]);
        if (fields.empty()) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (fields.size() != 4) {
            throw DataError(where + ": expected \"qid 0 docid rel\"");
        }
        const std::string& rel = fields[3];
        if (rel == "1") {
            qrels.judgments[fields[0]].insert(fields[2]);
        } else if (rel != "0") {
            throw DataError(where + ": relevance must be 0 or 1, got " + rel);
        }
    }
    return qrels;
}

void write_documents(const std::filesystem::path& path, const Corpus& corpus) { write_jsonl(path, corpus); }

void write_queries(const std::filesystem::path& path, const QuerySet& queries) { write_jsonl(path, queries); }

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
    std::string out;
    for (const auto& [qid, docs] : qrels.judgments) {
        for (const auto& doc : docs) {
            out += qid + " 0 " + doc + " 1\n";
        }
    }
    detail::write_file_atomic(path, out);
}

void validate_qrels(const Qrels& qrels, const QuerySet& queries, const Corpus& corpus) {
    for (const auto& [qid, docs] : qrels.judgments) {
        if (!queries.contains(qid)) {
            throw DataError("qrels reference unknown query " + qid);
        }
        for (const auto& doc : docs) {
            if (!corpus.contains(doc)) {
                throw DataError("qrels reference unknown document " + doc + " (query " + qid + ")");
            }
        }
    }
}

}  // namespace smoothrank
