#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fence {

// Ternary judgment label for a (claim, documents) pair.
enum class JudgmentLabel { Supported, Contradictory, Unverified };

// Binary ground-truth space used by most public judgment datasets.
enum class BinaryLabel { Factual, NonFactual };

// Generator's evidence-free self-assessment of a claim.
enum class FamiliarityVerdict { True, False, Unknown };

// Where an evidence document came from. The declaration order is also the
// rerank tie-break order.
enum class DocOrigin { dataset, search, encyclopedia, knowledge_graph };

// Datasets carry either binary or ternary ground truth.
using GroundTruth = std::variant<BinaryLabel, JudgmentLabel>;

struct ClaimOrigin {
    std::string response_id;
    int passage_index = 0;
    int claim_index = 0;

    bool operator==(const ClaimOrigin&) const = default;
};

// One atomic factual statement.
struct Claim {
    std::string id;
    std::string text;
    std::optional<ClaimOrigin> origin;
};

// A titled text chunk a claim can be judged against.
struct EvidenceDocument {
    std::string title;
    std::string body;
    DocOrigin origin = DocOrigin::dataset;
    int chunk_index = 0;
    std::optional<double> retrieval_score;
};

// Evaluator verdict: textual critique + label + the raw completion it was
// parsed from. parse_failed marks the conservative Unverified fallback.
struct Judgment {
    std::string critique;
    JudgmentLabel label = JudgmentLabel::Unverified;
    std::string raw_output;
    bool parse_failed = false;
};

// One factuality-judgment training record, optionally augmented with a
// critique and tool-retrieved documents.
struct JudgmentExample {
    std::string id;
    Claim claim;
    std::vector<EvidenceDocument> documents;
    GroundTruth gt_label = BinaryLabel::Factual;
    std::optional<std::string> critique;
    std::optional<JudgmentLabel> augmented_label;
    std::string provenance;
    // Bookkeeping for tool-augmented records: the raw judging completion and
    // the fingerprint of the request that produced it.
    std::optional<std::string> judge_raw_output;
    std::optional<std::uint64_t> judge_fingerprint;
};

// ---- label bridge -----------------------------------------------------------

// Supported maps to Factual; both error classes map to NonFactual.
BinaryLabel map_to_binary(JudgmentLabel label);

// Equality for ternary ground truth, bridged equality for binary.
bool labels_agree(JudgmentLabel predicted, const GroundTruth& gt);

// ---- fixed serialized forms -------------------------------------------------

std::string_view to_string(JudgmentLabel label);
std::string_view to_string(BinaryLabel label);
std::string_view to_string(FamiliarityVerdict verdict);
std::string_view to_string(DocOrigin origin);
std::string to_string(const GroundTruth& gt);

std::optional<JudgmentLabel> parse_judgment_label(std::string_view s);
std::optional<BinaryLabel> parse_binary_label(std::string_view s);
std::optional<DocOrigin> parse_doc_origin(std::string_view s);
// Accepts ternary words, binary words, and 1/0.
std::optional<GroundTruth> parse_ground_truth(std::string_view s);

// Content-hash claim id, stable across re-runs.
std::string make_claim_id(std::string_view prompt_id, int passage_index,
                          int claim_index, std::string_view text);

// True iff the example's invariants hold (non-empty claim text, critique and
// augmented_label paired and agreeing with ground truth).
bool validate(const JudgmentExample& example);

}  // namespace fence
