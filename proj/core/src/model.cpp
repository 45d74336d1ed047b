#include "fence/model.hpp"

#include "fence/hash.hpp"
#include "fence/text.hpp"

namespace fence {

BinaryLabel map_to_binary(JudgmentLabel label) {
    return label == JudgmentLabel::Supported ? BinaryLabel::Factual
                                             : BinaryLabel::NonFactual;
}

bool labels_agree(JudgmentLabel predicted, const GroundTruth& gt) {
    if (const auto* ternary = std::get_if<JudgmentLabel>(&gt)) {
        return predicted == *ternary;
    }
    return map_to_binary(predicted) == std::get<BinaryLabel>(gt);
}

std::string_view to_string(JudgmentLabel label) {
    switch (label) {
        case JudgmentLabel::Supported: return "supported";
        case JudgmentLabel::Contradictory: return "contradictory";
        case JudgmentLabel::Unverified: return "unverified";
    }
    return "unverified";
}

std::string_view to_string(BinaryLabel label) {
    return label == BinaryLabel::Factual ? "factual" : "non-factual";
}

std::string_view to_string(FamiliarityVerdict verdict) {
    switch (verdict) {
        case FamiliarityVerdict::True: return "true";
        case FamiliarityVerdict::False: return "false";
        case FamiliarityVerdict::Unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(DocOrigin origin) {
    switch (origin) {
        case DocOrigin::dataset: return "dataset";
        case DocOrigin::search: return "search";
        case DocOrigin::encyclopedia: return "encyclopedia";
        case DocOrigin::knowledge_graph: return "knowledge_graph";
    }
    return "dataset";
}

std::string to_string(const GroundTruth& gt) {
    if (const auto* ternary = std::get_if<JudgmentLabel>(&gt)) {
        return std::string(to_string(*ternary));
    }
    return std::string(to_string(std::get<BinaryLabel>(gt)));
}

std::optional<JudgmentLabel> parse_judgment_label(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "supported") return JudgmentLabel::Supported;
    if (v == "contradictory") return JudgmentLabel::Contradictory;
    if (v == "unverified") return JudgmentLabel::Unverified;
    return std::nullopt;
}

std::optional<BinaryLabel> parse_binary_label(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "factual" || v == "1") return BinaryLabel::Factual;
    if (v == "non-factual" || v == "nonfactual" || v == "0") return BinaryLabel::NonFactual;
    return std::nullopt;
}

std::optional<DocOrigin> parse_doc_origin(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "dataset") return DocOrigin::dataset;
    if (v == "search") return DocOrigin::search;
    if (v == "encyclopedia") return DocOrigin::encyclopedia;
    if (v == "knowledge_graph") return DocOrigin::knowledge_graph;
    return std::nullopt;
}

std::optional<GroundTruth> parse_ground_truth(std::string_view s) {
    if (auto ternary = parse_judgment_label(s)) return GroundTruth(*ternary);
    if (auto binary = parse_binary_label(s)) return GroundTruth(*binary);
    return std::nullopt;
}

std::string make_claim_id(std::string_view prompt_id, int passage_index,
                          int claim_index, std::string_view text) {
    std::uint64_t h = fnv1a64(prompt_id);
    h = fnv1a64(std::to_string(passage_index), h);
    h = fnv1a64(std::to_string(claim_index), h);
    h = fnv1a64(text, h);
    return "c" + to_hex(h);
}

bool validate(const JudgmentExample& example) {
    if (trim(example.claim.text).empty()) return false;
    if (example.critique.has_value() != example.augmented_label.has_value()) return false;
    if (example.critique && trim(*example.critique).empty()) return false;
    if (example.augmented_label && !labels_agree(*example.augmented_label, example.gt_label)) {
        return false;
    }
    return true;
}

}  // namespace fence
