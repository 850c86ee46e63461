#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace smoothrank {

struct Document {
    std::string id;
    std::string text;

    bool operator==(const Document&) const = default;
};

struct Query {
    std::string id;
    std::string text;

    bool operator==(const Query&) const = default;
};

/// Insertion-ordered collection of items with unique, non-empty ids.
template <typename Item>
class IdCollection {
  public:
    /// Throws DataError on an empty or duplicate id.
    void add(Item item);

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] const Item& operator[](std::size_t i) const { return items_[i]; }
    [[nodiscard]] const Item* find(const std::string& id) const;
    [[nodiscard]] std::optional<std::size_t> position(const std::string& id) const;
    [[nodiscard]] bool contains(const std::string& id) const { return by_id_.count(id) != 0; }

    [[nodiscard]] auto begin() const { return items_.begin(); }
    [[nodiscard]] auto end() const { return items_.end(); }

    bool operator==(const IdCollection& other) const { return items_ == other.items_; }

  private:
    std::vector<Item> items_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

using Corpus = IdCollection<Document>;
using QuerySet = IdCollection<Query>;

/// Binary relevance judgments: query id -> relevant document ids. Documents
/// without a judgment, and documents judged 0, are both non-relevant.
struct Qrels {
    std::map<std::string, std::set<std::string>> judgments;

    [[nodiscard]] const std::set<std::string>* relevant_for(const std::string& query_id) const;
    [[nodiscard]] std::size_t pair_count() const;

    bool operator==(const Qrels&) const = default;
};

/// Loads a JSONL file of {"id": ..., "text": ...} objects in file order.
Corpus load_documents(const std::filesystem::path& path);
QuerySet load_queries(const std::filesystem::path& path);

/// Loads TREC-style "qid 0 docid rel" lines. Only rel == 1 lines are kept.
Qrels load_qrels(const std::filesystem::path& path);

void write_documents(const std::filesystem::path& path, const Corpus& corpus);
void write_queries(const std::filesystem::path& path, const QuerySet& queries);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

/// Checks that every judged query and document exists.
void validate_qrels(const Qrels& qrels, const QuerySet& queries, const Corpus& corpus);

}  // namespace smoothrank
