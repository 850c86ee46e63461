#pragma once

#include <cstdint>
#include <string>

namespace smoothrank {

/// Binary relevance class. The numeric values double as class indices k.
enum class Label : std::uint8_t { NonRelevant = 0, Relevant = 1 };

constexpr int class_index(Label y) { return static_cast<int>(y); }

/// One (query, document) training example with its ground-truth label and
/// the min-max normalized negative-sampler score of the document.
struct TrainInstance {
    std::string query_id;
    std::string doc_id;
    Label label = Label::NonRelevant;
    double ns_score = 0.0;

    bool operator==(const TrainInstance&) const = default;
};

}  // namespace smoothrank
