#include "smoothrank/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "smoothrank/errors.hpp"
#include "smoothrank/rng.hpp"

namespace smoothrank {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

std::vector<std::string> make_vocabulary(std::size_t count, Rng& gen) {
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        std::string w;
        const auto syllables = 2 + uniform_index(gen, 2);
        for (std::uint64_t s = 0; s < syllables; ++s) {
            w += kOnsets[uniform_index(gen, std::size(kOnsets))];
            w += kVowels[uniform_index(gen, std::size(kVowels))];
        }
        if (seen.insert(w).second) {
            words.push_back(std::move(w));
        }
    }
    return words;
}

const std::string& pick(const std::vector<std::string>& words, Rng& gen) {
    return words[uniform_index(gen, words.size())];
}

std::string join_shuffled(std::vector<std::string> words, Rng& gen) {
    shuffle(std::span<std::string>(words), gen);
    std::string text;
    for (const auto& w : words) {
        if (!text.empty()) {
            text += ' ';
        }
        text += w;
    }
    return text;
}

void add_filler(std::vector<std::string>& words, const std::vector<std::string>& topic,
                const std::vector<std::string>& background, std::size_t topic_count, std::size_t background_count,
                const std::set<std::string>& exclude, Rng& gen) {
    for (std::size_t i = 0; i < topic_count;) {
        const auto& w = pick(topic, gen);
        if (exclude.count(w) == 0) {
            words.push_back(w);
            ++i;
        }
    }
    for (std::size_t i = 0; i < background_count; ++i) {
        words.push_back(pick(background, gen));
    }
}

std::string padded(const char* prefix, std::size_t i, std::size_t width) {
    std::string digits = std::to_string(i);
    return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

SyntheticCollection generate_synthetic(const SyntheticSpec& spec) {
    const std::size_t needed = spec.queries * (1 + spec.distractors_per_query);
    if (spec.queries == 0 || spec.topics == 0 || spec.key_terms == 0 || spec.documents < needed ||
        spec.topic_vocabulary <= spec.key_terms || spec.doc_length < 6 + 2 * spec.key_terms) {
        throw UsageError("synthetic spec cannot hold " + std::to_string(spec.queries) + " queries with " +
                         std::to_string(spec.distractors_per_query) + " distractors in " +
                         std::to_string(spec.documents) + " documents");
    }
    Rng gen(spec.seed);
    const auto vocabulary = make_vocabulary(spec.topics * spec.topic_vocabulary + spec.background_vocabulary, gen);
    std::vector<std::vector<std::string>> topics(spec.topics);
    for (std::size_t t = 0; t < spec.topics; ++t) {
        topics[t].assign(vocabulary.begin() + static_cast<std::ptrdiff_t>(t * spec.topic_vocabulary),
                         vocabulary.begin() + static_cast<std::ptrdiff_t>((t + 1) * spec.topic_vocabulary));
    }
    const std::vector<std::string> background(
        vocabulary.begin() + static_cast<std::ptrdiff_t>(spec.topics * spec.topic_vocabulary), vocabulary.end());

    // Document ids are assigned through a permutation so that the relevant
    // document's id carries no information about its role.
    std::vector<std::size_t> id_order(spec.documents);
    std::iota(id_order.begin(), id_order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(id_order), gen);
    std::vector<std::string> texts(spec.documents);
    std::size_t next_doc = 0;
    const std::size_t width = std::to_string(spec.documents - 1).size();

    SyntheticCollection out;
    for (std::size_t q = 0; q < spec.queries; ++q) {
        const std::size_t topic = uniform_index(gen, spec.topics);
        std::vector<std::string> keys;
        while (keys.size() < spec.key_terms) {
            const auto& w = pick(topics[topic], gen);
            if (std::find(keys.begin(), keys.end(), w) == keys.end()) {
                keys.push_back(w);
            }
        }
        const std::set<std::string> key_set(keys.begin(), keys.end());
        const std::string query_id = padded("q", q, std::to_string(spec.queries - 1).size());
        out.queries.add(Query{query_id, join_shuffled(keys, gen)});

        std::vector<std::string> relevant;
        for (const auto& k : keys) {
            if (uniform_unit(gen) >= spec.key_dropout) {
                relevant.push_back(k);
            }
        }
        if (relevant.empty()) {
            relevant.push_back(pick(keys, gen));
        }
        add_filler(relevant, topics[topic], background, 6, spec.doc_length - 6 - relevant.size(), key_set, gen);
        const std::size_t relevant_slot = id_order[next_doc++];
        texts[relevant_slot] = join_shuffled(std::move(relevant), gen);
        out.qrels.judgments[query_id].insert(padded("d", relevant_slot, width));

        for (std::size_t d = 0; d < spec.distractors_per_query; ++d) {
            std::vector<std::string> words;
            const auto present = 1 + uniform_index(gen, std::max<std::size_t>(1, keys.size() - 1));
            std::vector<std::string> chosen = keys;
            shuffle(std::span<std::string>(chosen), gen);
            for (std::size_t i = 0; i < present; ++i) {
                const auto repeats = 1 + uniform_index(gen, 2);
                for (std::uint64_t r = 0; r < repeats; ++r) {
                    words.push_back(chosen[i]);
                }
            }
            add_filler(words, topics[topic], background, 6, spec.doc_length - 6 - words.size(), key_set, gen);
            texts[id_order[next_doc++]] = join_shuffled(std::move(words), gen);
        }
    }
    while (next_doc < spec.documents) {
        const std::size_t topic = uniform_index(gen, spec.topics);
        std::vector<std::string> words;
        add_filler(words, topics[topic], background, 6, spec.doc_length - 6, {}, gen);
        texts[id_order[next_doc++]] = join_shuffled(std::move(words), gen);
    }
    for (std::size_t i = 0; i < spec.documents; ++i) {
        out.corpus.add(Document{padded("d", i, width), std::move(texts[i])});
    }
    return out;
}

SyntheticCollection slice_queries(const SyntheticCollection& all, std::size_t first, std::size_t count) {
    SyntheticCollection out;
    out.corpus = all.corpus;
    for (std::size_t i = first; i < std::min(all.queries.size(), first + count); ++i) {
        const auto& q = all.queries[i];
        out.queries.add(q);
        if (const auto* rel = all.qrels.relevant_for(q.id)) {
            out.qrels.judgments[q.id] = *rel;
        }
    }
    return out;
}

}  // namespace smoothrank
