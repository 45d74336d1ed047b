#include "fence/augment.hpp"

#include "fence/log.hpp"
#include "fence/parallel.hpp"
#include "fence/prompts.hpp"

namespace fence {

std::vector<Judgment> gen_critique_candidates(ChatClient& instruction, const Claim& claim,
                                              std::span<const EvidenceDocument> docs,
                                              int n, double temperature, int token_budget) {
    if (docs.empty()) throw PreconditionError("critique generation requires documents");
    if (n < 1) throw PreconditionError("candidate count must be >= 1");
    ChatRequest request =
        prompts::judgment_request(claim, docs, n, temperature, token_budget);
    std::vector<Judgment> judgments;
    for (const std::string& completion : instruction.chat(request)) {
        try {
            judgments.push_back(prompts::parse_judgment(completion));
        } catch (const ParseFailure&) {
            // dropped; agreement filtering needs a parsed label
        }
    }
    return judgments;
}

std::optional<JudgmentExample> augment_with_critique(const JudgmentExample& example,
                                                     std::span<const Judgment> candidates) {
    for (const Judgment& candidate : candidates) {
        if (labels_agree(candidate.label, example.gt_label)) {
            JudgmentExample kept = example;
            kept.critique = candidate.critique;
            kept.augmented_label = candidate.label;
            return kept;
        }
    }
    return std::nullopt;
}

std::optional<JudgmentExample> augment_with_tool_docs(ChatClient& instruction,
                                                      EvidenceRetriever& retriever,
                                                      const JudgmentExample& example,
                                                      int token_budget) {
    std::vector<EvidenceDocument> tool_docs = retriever.retrieve(example.claim);
    if (tool_docs.empty()) return std::nullopt;

    ChatRequest request =
        prompts::judgment_request(example.claim, tool_docs, 1, 0.0, token_budget);
    std::string completion = instruction.chat(request).front();
    Judgment judgment;
    try {
        judgment = prompts::parse_judgment(completion);
    } catch (const ParseFailure&) {
        return std::nullopt;
    }
    if (!labels_agree(judgment.label, example.gt_label)) return std::nullopt;

    JudgmentExample tool_example = example;
    tool_example.id = example.id + "#tool";
    tool_example.documents = std::move(tool_docs);
    tool_example.critique = judgment.critique;
    tool_example.augmented_label = judgment.label;
    tool_example.judge_raw_output = judgment.raw_output;
    tool_example.judge_fingerprint = request_fingerprint(instruction.profile().role, request);
    return tool_example;
}

BuildResult build_eval_train_set(ChatClient& instruction, EvidenceRetriever* retriever,
                                 std::span<const JudgmentExample> dataset,
                                 const AugmentOptions& options) {
    struct PerExample {
        std::optional<JudgmentExample> critique;
        std::optional<JudgmentExample> tool;
    };
    std::vector<PerExample> results(dataset.size());

    parallel_for(dataset.size(), options.workers, [&](std::size_t i) {
        const JudgmentExample& example = dataset[i];
        if (options.with_critiques && !example.documents.empty()) {
            try {
                auto candidates = gen_critique_candidates(
                    instruction, example.claim, example.documents,
                    options.critique_candidates, options.critique_temperature,
                    options.token_budget);
                results[i].critique = augment_with_critique(example, candidates);
            } catch (const BudgetExceeded&) {
                throw;
            } catch (const ScriptMiss&) {
                throw;
            } catch (const FenceError& e) {
                log_warn("critique augmentation failed for " + example.id + ": " + e.what());
            }
        }
        if (options.with_tool_docs && retriever != nullptr) {
            try {
                results[i].tool = augment_with_tool_docs(instruction, *retriever, example,
                                                         options.token_budget);
            } catch (const BudgetExceeded&) {
                throw;
            } catch (const ScriptMiss&) {
                throw;
            } catch (const FenceError& e) {
                log_warn("tool-doc augmentation failed for " + example.id + ": " + e.what());
            }
        }
    });

    BuildResult out;
    out.stats.total = static_cast<long>(dataset.size());
    for (PerExample& result : results) {
        if (result.critique) {
            out.examples.push_back(std::move(*result.critique));
            ++out.stats.critique_kept;
        } else {
            ++out.stats.critique_discarded;
        }
        if (result.tool) {
            out.examples.push_back(std::move(*result.tool));
            ++out.stats.tooldoc_kept;
        } else {
            ++out.stats.tooldoc_skipped;
        }
    }
    return out;
}

}  // namespace fence
