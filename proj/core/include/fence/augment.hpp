#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fence/backends.hpp"
#include "fence/evidence.hpp"
#include "fence/model.hpp"

namespace fence {

struct AugmentationStats {
    long total = 0;
    long critique_kept = 0;
    long critique_discarded = 0;
    long tooldoc_kept = 0;
    long tooldoc_skipped = 0;
};

struct AugmentOptions {
    int critique_candidates = 10;
    double critique_temperature = 1.0;
    bool with_critiques = true;
    bool with_tool_docs = true;
    int workers = 4;
    int token_budget = 6000;
};

// Samples n candidate judgments for the claim against the given documents.
// Unparseable completions are dropped, so the result may be shorter than n.
std::vector<Judgment> gen_critique_candidates(ChatClient& instruction, const Claim& claim,
                                              std::span<const EvidenceDocument> docs,
                                              int n = 10, double temperature = 1.0,
                                              int token_budget = 6000);

// Attaches the first candidate whose label agrees with ground truth; absent
// means no candidate agreed and the whole example is discarded.
std::optional<JudgmentExample> augment_with_critique(const JudgmentExample& example,
                                                     std::span<const Judgment> candidates);

// Retrieves tool documents for the claim, judges the claim against them with
// the instruction model, and keeps the new example only when that judgment
// agrees with ground truth. The original example is never modified.
std::optional<JudgmentExample> augment_with_tool_docs(ChatClient& instruction,
                                                      EvidenceRetriever& retriever,
                                                      const JudgmentExample& example,
                                                      int token_budget = 6000);

struct BuildResult {
    std::vector<JudgmentExample> examples;
    AugmentationStats stats;
};

// Runs both augmentations independently over the dataset: each input example
// can yield 0, 1, or 2 output records (critique-kept original, tool-doc
// example). Per-example failures count as discard/skip and never abort the
// batch. Output order is fixed by input order.
BuildResult build_eval_train_set(ChatClient& instruction, EvidenceRetriever* retriever,
                                 std::span<const JudgmentExample> dataset,
                                 const AugmentOptions& options = {});

}  // namespace fence
