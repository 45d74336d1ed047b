#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fence/revision.hpp"

namespace fence {

struct PreferencePair {
    std::string prompt_id;
    std::string chosen_id;
    std::string rejected_id;
    double chosen_score = 0.0;
    double rejected_score = 0.0;
};

// Summed token log-probabilities under policy and reference for one pair.
struct ObjectiveInputs {
    double beta = 0.1;
    double logp_w_policy = 0.0;
    double logp_l_policy = 0.0;
    double logp_w_ref = 0.0;
    double logp_l_ref = 0.0;
};

// Fraction of claims judged supported; refused or zero-claim responses score 0.
double score_from_verdicts(std::span<const ClaimVerdict> verdicts);

// Sets response.score (and the refused flag when there are no claims).
void score_response(CandidateResponse& response);

// The k highest-scoring candidates in descending score order. Ties break by
// higher round first, then lower sample index, then id. Refused and
// zero-claim responses are never targets. k beyond the pool returns everyone.
std::vector<CandidateResponse> select_sft_targets(std::span<const CandidateResponse> candidates,
                                                  int k);

// Every (w, l) with w in the top-k set and score(l) strictly below score(w),
// ordered by w rank then l rank.
std::vector<PreferencePair> build_preference_pairs(std::span<const CandidateResponse> candidates,
                                                   int k);

// C(2N,2) - C(2N-k,2): the pair count for 2N distinctly-scored candidates.
long long expected_pair_count(int n, int k);

// -log(sigmoid(beta * margin)) via the softplus of the negated margin.
double dpo_loss(const ObjectiveInputs& inputs);

// Negated sum of token log-probabilities; every entry must be <= 0.
double mle_nll(std::span<const double> token_logprobs);

struct PromptBatch {
    std::string prompt_id;
    std::string prompt;
    std::vector<CandidateResponse> candidates;
};

struct PromptManifest {
    long num_candidates = 0;
    long num_pairs = 0;
    std::vector<double> top_scores;
    bool k_truncated = false;  // fewer eligible candidates than k
    std::string note;
};

struct EmitManifest {
    std::vector<std::pair<std::string, PromptManifest>> per_prompt;
    long total_sft_lines = 0;
    long total_dpo_lines = 0;
};

// Writes sft.jsonl, dpo.jsonl and manifest.json under out_dir. Writes go
// through temp files and a final rename; on failure the temps are removed.
EmitManifest emit_training_files(std::span<const PromptBatch> batches, int k,
                                 const std::filesystem::path& out_dir);

}  // namespace fence
