#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/evaluator.hpp"
#include "fence/evidence.hpp"
#include "fence/model.hpp"

namespace fence {

struct Passage {
    int index = 0;
    std::string text;
    bool removed = false;  // a rewrite deleted everything
};

enum class VerdictAction { keep, edit, remove };

// Why a non-Supported claim was left alone.
enum class VerdictFlag {
    none,
    tool_failed,  // evidence retrieval or judging transport failed: do not touch
    over_cap,     // beyond the per-passage false-claim budget this round
    unrevised,    // judged for scoring only, outside the revision window
};

std::string_view to_string(VerdictAction action);
std::string_view to_string(VerdictFlag flag);
std::optional<VerdictAction> parse_verdict_action(std::string_view s);
std::optional<VerdictFlag> parse_verdict_flag(std::string_view s);

struct ClaimVerdict {
    Claim claim;
    Judgment judgment;
    std::optional<FamiliarityVerdict> familiarity;  // present iff action != keep
    VerdictAction action = VerdictAction::keep;
    VerdictFlag flag = VerdictFlag::none;
};

struct Lineage {
    enum class Kind { original, revised };
    Kind kind = Kind::original;
    int sample_index = 0;    // root sample, inherited along the revision chain
    std::string parent_id;   // revised only
    int round = 0;           // original = 0, revised >= 1
};

struct CandidateResponse {
    std::string id;
    std::string prompt_id;
    Lineage lineage;
    std::vector<Passage> passages;
    std::vector<ClaimVerdict> verdicts;
    std::optional<double> score;
    bool refused = false;

    // Non-removed passages joined with blank lines.
    std::string text() const;
};

struct RevisionConfig {
    int max_rounds = 3;
    int max_false_claims_per_passage = 3;
    int max_passages_revised = 3;
};

void validate(const RevisionConfig& config);

struct RevisionClients {
    ChatClient* instruction = nullptr;
    ChatClient* evaluator = nullptr;
    ChatClient* generator = nullptr;
    EvidenceRetriever* retriever = nullptr;
};

struct DecomposedPassage {
    Passage passage;
    std::vector<Claim> claims;
    bool parse_failed = false;
};

// Blank-line passage split, then one decomposition call per passage. An
// unparseable decomposition yields zero claims for that passage, flagged.
std::vector<DecomposedPassage> decompose(ChatClient& instruction,
                                         const std::string& response_text,
                                         const std::string& response_id);

// Evidence-free probe of the generator; anything unparseable is Unknown,
// the lesser-known-fact bucket.
FamiliarityVerdict probe_familiarity(ChatClient& generator, const Claim& claim);

// Applies one rewrite prompt per non-keep verdict, sequentially, so each
// rewrite sees the previous rewrite's text. An empty rewrite marks the
// passage removed and stops.
Passage revise_passage(ChatClient& generator, const Passage& passage,
                       std::span<const ClaimVerdict> verdicts,
                       int max_false_claims_per_passage = 3);

// Generates exactly the next passage from the prompt and revised prefix;
// empty text signals the generation loop should end.
Passage continue_generation(ChatClient& generator, const std::string& prompt,
                            std::span<const Passage> prefix);

// Audit record for one (response, round); this is what the trace file stores.
struct PassageTrace {
    int index = 0;
    std::string before;
    std::string after;
    bool modified = false;
};

struct RevisionTrace {
    std::string response_id;  // the response that was revised
    std::string prompt_id;
    int round = 0;
    std::vector<ClaimVerdict> verdicts;
    std::vector<PassageTrace> passages;
    bool truncated = false;  // continuation came back empty
};

// One revision round over the first max_passages_revised passages: decompose
// the passage, judge every claim against tool evidence, pick up to
// max_false_claims_per_passage false claims (contradictory first), probe
// familiarity (unknown -> remove, true/false -> edit), rewrite the passage,
// and regenerate the following passage whenever this one changed. Later
// passages are carried through unrevised.
CandidateResponse revise_response(const CandidateResponse& response,
                                  const std::string& prompt_text,
                                  const RevisionConfig& config,
                                  const RevisionClients& clients,
                                  RevisionTrace* trace = nullptr,
                                  int token_budget = 6000);

// Scoring-time evaluation: decomposes every passage, judges every claim, and
// fills verdicts (non-Supported claims keep/unrevised) plus the refused flag.
void evaluate_response(CandidateResponse& response, const RevisionClients& clients,
                       int token_budget = 6000);

std::vector<Passage> passages_from_text(const std::string& text);

}  // namespace fence
