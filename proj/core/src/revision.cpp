#include "fence/revision.hpp"

#include <algorithm>

#include "fence/log.hpp"
#include "fence/prompts.hpp"
#include "fence/text.hpp"

namespace fence {

std::string_view to_string(VerdictAction action) {
    switch (action) {
        case VerdictAction::keep: return "keep";
        case VerdictAction::edit: return "edit";
        case VerdictAction::remove: return "remove";
    }
    return "keep";
}

std::string_view to_string(VerdictFlag flag) {
    switch (flag) {
        case VerdictFlag::none: return "none";
        case VerdictFlag::tool_failed: return "tool_failed";
        case VerdictFlag::over_cap: return "over_cap";
        case VerdictFlag::unrevised: return "unrevised";
    }
    return "none";
}

std::optional<VerdictAction> parse_verdict_action(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "keep") return VerdictAction::keep;
    if (v == "edit") return VerdictAction::edit;
    if (v == "remove") return VerdictAction::remove;
    return std::nullopt;
}

std::optional<VerdictFlag> parse_verdict_flag(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "none") return VerdictFlag::none;
    if (v == "tool_failed") return VerdictFlag::tool_failed;
    if (v == "over_cap") return VerdictFlag::over_cap;
    if (v == "unrevised") return VerdictFlag::unrevised;
    return std::nullopt;
}

std::string CandidateResponse::text() const {
    std::vector<std::string> parts;
    for (const Passage& passage : passages) {
        if (!passage.removed && !trim(passage.text).empty()) {
            parts.push_back(passage.text);
        }
    }
    return join(parts, "\n\n");
}

void validate(const RevisionConfig& config) {
    if (config.max_rounds < 1 || config.max_false_claims_per_passage < 1 ||
        config.max_passages_revised < 1) {
        throw ConfigError("revision limits must all be >= 1");
    }
}

std::vector<Passage> passages_from_text(const std::string& text) {
    std::vector<Passage> passages;
    auto paragraphs = split_paragraphs(text);
    passages.reserve(paragraphs.size());
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        passages.push_back({static_cast<int>(i), std::move(paragraphs[i]), false});
    }
    return passages;
}

namespace {

DecomposedPassage decompose_passage(ChatClient& instruction, Passage passage,
                                    const std::string& response_id) {
    DecomposedPassage out;
    std::vector<std::string> lines;
    try {
        std::string completion =
            instruction.chat(prompts::decompose_request(passage.text)).front();
        lines = prompts::parse_claim_lines(completion);
    } catch (const ParseFailure&) {
        out.parse_failed = true;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Claim claim;
        claim.text = std::move(lines[i]);
        claim.id = make_claim_id(response_id, passage.index, static_cast<int>(i), claim.text);
        claim.origin = ClaimOrigin{response_id, passage.index, static_cast<int>(i)};
        out.claims.push_back(std::move(claim));
    }
    out.passage = std::move(passage);
    return out;
}

// Judge a passage's claims against tool evidence. Retrieval or judging
// failures downgrade the claim to keep with a tool_failed flag.
std::vector<ClaimVerdict> judge_passage_claims(const std::vector<Claim>& claims,
                                               const RevisionClients& clients,
                                               int token_budget) {
    std::vector<ClaimVerdict> verdicts;
    verdicts.reserve(claims.size());
    for (const Claim& claim : claims) {
        ClaimVerdict verdict;
        verdict.claim = claim;
        try {
            auto docs = clients.retriever->retrieve(claim);
            verdict.judgment = judge(*clients.evaluator, claim, docs, token_budget);
        } catch (const BudgetExceeded&) {
            throw;  // budget exhaustion aborts the run, it is not a tool failure
        } catch (const ScriptMiss&) {
            throw;
        } catch (const FenceError& e) {
            log_warn("cannot verify claim " + claim.id + ", leaving it untouched: " + e.what());
            verdict.judgment = Judgment{"", JudgmentLabel::Unverified, "", true};
            verdict.action = VerdictAction::keep;
            verdict.flag = VerdictFlag::tool_failed;
            verdicts.push_back(std::move(verdict));
            continue;
        }
        verdict.action = VerdictAction::keep;  // non-keep assigned by the caller
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

// Indices of revisable false claims, contradictory before unverified, then by
// claim index. Certain errors get the budget first.
std::vector<std::size_t> select_false_claims(const std::vector<ClaimVerdict>& verdicts,
                                             int cap) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const ClaimVerdict& v = verdicts[i];
        if (v.flag == VerdictFlag::none && v.judgment.label != JudgmentLabel::Supported) {
            candidates.push_back(i);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) {
                         bool a_contra = verdicts[a].judgment.label == JudgmentLabel::Contradictory;
                         bool b_contra = verdicts[b].judgment.label == JudgmentLabel::Contradictory;
                         if (a_contra != b_contra) return a_contra;
                         return a < b;
                     });
    if (candidates.size() > static_cast<std::size_t>(cap)) {
        candidates.resize(static_cast<std::size_t>(cap));
    }
    return candidates;
}

}  // namespace

std::vector<DecomposedPassage> decompose(ChatClient& instruction,
                                         const std::string& response_text,
                                         const std::string& response_id) {
    if (trim(response_text).empty()) {
        throw PreconditionError("cannot decompose an empty response");
    }
    std::vector<DecomposedPassage> out;
    for (Passage& passage : passages_from_text(response_text)) {
        out.push_back(decompose_passage(instruction, std::move(passage), response_id));
    }
    return out;
}

FamiliarityVerdict probe_familiarity(ChatClient& generator, const Claim& claim) {
    std::string completion = generator.chat(prompts::familiarity_request(claim)).front();
    return prompts::parse_familiarity(completion);
}

Passage revise_passage(ChatClient& generator, const Passage& passage,
                       std::span<const ClaimVerdict> verdicts,
                       int max_false_claims_per_passage) {
    std::size_t non_keep = 0;
    for (const ClaimVerdict& v : verdicts) {
        if (v.action != VerdictAction::keep) ++non_keep;
    }
    if (non_keep > static_cast<std::size_t>(max_false_claims_per_passage)) {
        throw PreconditionError("more non-keep verdicts than the per-passage budget");
    }

    Passage current = passage;
    for (const ClaimVerdict& verdict : verdicts) {
        if (verdict.action == VerdictAction::keep) continue;
        if (verdict.claim.origin &&
            verdict.claim.origin->passage_index != passage.index) {
            throw PreconditionError("verdict references a different passage");
        }
        ChatRequest request =
            verdict.action == VerdictAction::edit
                ? prompts::edit_request(current.text, verdict.claim,
                                        verdict.judgment.critique)
                : prompts::remove_request(current.text, verdict.claim);
        std::string rewritten = generator.chat(request).front();
        if (trim(rewritten).empty()) {
            current.text.clear();
            current.removed = true;
            break;  // nothing left to rewrite
        }
        current.text = std::string(trim(rewritten));
    }
    return current;
}

Passage continue_generation(ChatClient& generator, const std::string& prompt,
                            std::span<const Passage> prefix) {
    if (prefix.empty()) throw PreconditionError("continuation requires a non-empty prefix");
    std::vector<std::string> parts;
    for (const Passage& passage : prefix) {
        if (!passage.removed && !trim(passage.text).empty()) parts.push_back(passage.text);
    }
    std::string answer_so_far = join(parts, "\n\n");
    if (answer_so_far.empty()) {
        throw PreconditionError("continuation requires a non-empty prefix");
    }
    std::string completion =
        generator.chat(prompts::continuation_request(prompt, answer_so_far)).front();
    // Keep the first paragraph only; the contract is one passage per step.
    auto paragraphs = split_paragraphs(completion);
    Passage next;
    next.index = static_cast<int>(prefix.size());
    next.text = paragraphs.empty() ? "" : paragraphs.front();
    return next;
}

CandidateResponse revise_response(const CandidateResponse& response,
                                  const std::string& prompt_text,
                                  const RevisionConfig& config,
                                  const RevisionClients& clients,
                                  RevisionTrace* trace, int token_budget) {
    validate(config);
    if (response.lineage.kind == Lineage::Kind::revised &&
        response.lineage.round >= config.max_rounds) {
        throw PreconditionError("response already at max_rounds = " +
                                std::to_string(config.max_rounds));
    }
    int round = response.lineage.round + 1;

    std::vector<Passage> out = response.passages;
    std::vector<ClaimVerdict> all_verdicts;
    std::vector<PassageTrace> passage_traces;
    bool truncated = false;

    std::size_t limit = std::min<std::size_t>(
        out.size(), static_cast<std::size_t>(config.max_passages_revised));
    for (std::size_t i = 0; i < limit; ++i) {
        Passage& current = out[i];
        if (current.removed || trim(current.text).empty()) continue;

        DecomposedPassage decomposed =
            decompose_passage(*clients.instruction, current, response.id);
        std::vector<ClaimVerdict> verdicts =
            judge_passage_claims(decomposed.claims, clients, token_budget);

        auto selected = select_false_claims(verdicts, config.max_false_claims_per_passage);
        for (std::size_t v = 0; v < verdicts.size(); ++v) {
            bool chosen = std::find(selected.begin(), selected.end(), v) != selected.end();
            if (chosen) {
                FamiliarityVerdict familiarity =
                    probe_familiarity(*clients.generator, verdicts[v].claim);
                verdicts[v].familiarity = familiarity;
                verdicts[v].action = familiarity == FamiliarityVerdict::Unknown
                                         ? VerdictAction::remove
                                         : VerdictAction::edit;
            } else if (verdicts[v].flag == VerdictFlag::none &&
                       verdicts[v].judgment.label != JudgmentLabel::Supported) {
                verdicts[v].flag = VerdictFlag::over_cap;
            }
        }

        Passage revised = revise_passage(*clients.generator, current, verdicts,
                                         config.max_false_claims_per_passage);
        bool modified = revised.removed || revised.text != current.text;
        passage_traces.push_back({current.index, current.text, revised.text, modified});
        all_verdicts.insert(all_verdicts.end(), verdicts.begin(), verdicts.end());
        out[i] = std::move(revised);

        if (modified && i + 1 < out.size()) {
            std::span<const Passage> prefix(out.data(), i + 1);
            bool prefix_has_text = false;
            for (const Passage& p : prefix) {
                if (!p.removed && !trim(p.text).empty()) prefix_has_text = true;
            }
            if (!prefix_has_text) continue;  // everything so far removed
            Passage next = continue_generation(*clients.generator, prompt_text, prefix);
            if (trim(next.text).empty()) {
                out.resize(i + 1);  // generator says the answer is complete
                truncated = true;
                break;
            }
            out[i + 1] = Passage{static_cast<int>(i + 1), std::move(next.text), false};
        }
    }

    CandidateResponse revised;
    revised.prompt_id = response.prompt_id;
    revised.lineage = Lineage{Lineage::Kind::revised, response.lineage.sample_index,
                              response.id, round};
    revised.id = response.id + ".r" + std::to_string(round);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    revised.passages = std::move(out);
    revised.refused = response.refused;

    if (trace != nullptr) {
        trace->response_id = response.id;
        trace->prompt_id = response.prompt_id;
        trace->round = round;
        trace->verdicts = std::move(all_verdicts);
        trace->passages = std::move(passage_traces);
        trace->truncated = truncated;
    }
    return revised;
}

void evaluate_response(CandidateResponse& response, const RevisionClients& clients,
                       int token_budget) {
    response.verdicts.clear();
    std::string text = response.text();
    if (trim(text).empty()) {
        response.refused = true;
        return;
    }
    auto decomposed = decompose(*clients.instruction, text, response.id);
    std::size_t total_claims = 0;
    for (const DecomposedPassage& passage : decomposed) {
        auto verdicts = judge_passage_claims(passage.claims, clients, token_budget);
        for (ClaimVerdict& verdict : verdicts) {
            if (verdict.flag == VerdictFlag::none &&
                verdict.judgment.label != JudgmentLabel::Supported) {
                verdict.flag = VerdictFlag::unrevised;
            }
        }
        total_claims += verdicts.size();
        response.verdicts.insert(response.verdicts.end(), verdicts.begin(), verdicts.end());
    }
    response.refused = total_claims == 0;
}

}  // namespace fence
