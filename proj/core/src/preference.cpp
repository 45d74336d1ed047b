#include "fence/preference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "json_convert.hpp"

namespace fence {

using nlohmann::ordered_json;

double score_from_verdicts(std::span<const ClaimVerdict> verdicts) {
    if (verdicts.empty()) return 0.0;
    std::size_t supported = 0;
    for (const ClaimVerdict& verdict : verdicts) {
        if (verdict.judgment.label == JudgmentLabel::Supported) ++supported;
    }
    return static_cast<double>(supported) / static_cast<double>(verdicts.size());
}

void score_response(CandidateResponse& response) {
    if (response.verdicts.empty()) {
        response.refused = true;
        response.score = 0.0;
        return;
    }
    response.score = score_from_verdicts(response.verdicts);
}

namespace {

double score_of(const CandidateResponse& candidate) {
    if (!candidate.score) {
        throw PreconditionError("candidate " + candidate.id + " has not been scored");
    }
    return *candidate.score;
}

// Total order used for ranking: score desc, round desc, sample index asc, id.
bool ranks_before(const CandidateResponse& a, const CandidateResponse& b) {
    double sa = score_of(a);
    double sb = score_of(b);
    if (sa != sb) return sa > sb;
    if (a.lineage.round != b.lineage.round) return a.lineage.round > b.lineage.round;
    if (a.lineage.sample_index != b.lineage.sample_index) {
        return a.lineage.sample_index < b.lineage.sample_index;
    }
    return a.id < b.id;
}

}  // namespace

std::vector<CandidateResponse> select_sft_targets(std::span<const CandidateResponse> candidates,
                                                  int k) {
    if (k < 1) throw PreconditionError("k must be >= 1");
    std::vector<CandidateResponse> eligible;
    for (const CandidateResponse& candidate : candidates) {
        score_of(candidate);  // validate everyone, including refusals
        if (candidate.refused || candidate.verdicts.empty()) continue;
        eligible.push_back(candidate);
    }
    std::sort(eligible.begin(), eligible.end(), ranks_before);
    if (eligible.size() > static_cast<std::size_t>(k)) {
        eligible.resize(static_cast<std::size_t>(k));
    }
    return eligible;
}

std::vector<PreferencePair> build_preference_pairs(std::span<const CandidateResponse> candidates,
                                                   int k) {
    std::vector<CandidateResponse> chosen_set = select_sft_targets(candidates, k);

    std::vector<const CandidateResponse*> ranked;
    ranked.reserve(candidates.size());
    for (const CandidateResponse& candidate : candidates) ranked.push_back(&candidate);
    std::sort(ranked.begin(), ranked.end(),
              [](const CandidateResponse* a, const CandidateResponse* b) {
                  return ranks_before(*a, *b);
              });

    std::vector<PreferencePair> pairs;
    for (const CandidateResponse& chosen : chosen_set) {
        double chosen_score = score_of(chosen);
        for (const CandidateResponse* rejected : ranked) {
            double rejected_score = score_of(*rejected);
            if (rejected_score < chosen_score) {
                pairs.push_back({chosen.prompt_id, chosen.id, rejected->id, chosen_score,
                                 rejected_score});
            }
        }
    }
    return pairs;
}

long long expected_pair_count(int n, int k) {
    if (n < 1) throw PreconditionError("N must be >= 1");
    if (k < 1 || k > 2 * n) throw PreconditionError("k must be in [1, 2N]");
    auto choose2 = [](long long m) { return m * (m - 1) / 2; };
    return choose2(2LL * n) - choose2(2LL * n - k);
}

double dpo_loss(const ObjectiveInputs& inputs) {
    if (!(inputs.beta > 0.0)) throw PreconditionError("beta must be > 0");
    for (double x : {inputs.logp_w_policy, inputs.logp_l_policy, inputs.logp_w_ref,
                     inputs.logp_l_ref, inputs.beta}) {
        if (!std::isfinite(x)) throw PreconditionError("objective inputs must be finite");
    }
    double margin = inputs.beta * ((inputs.logp_w_policy - inputs.logp_w_ref) -
                                   (inputs.logp_l_policy - inputs.logp_l_ref));
    // -log(sigmoid(margin)) = softplus(-margin), computed without overflow.
    double x = -margin;
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double mle_nll(std::span<const double> token_logprobs) {
    double sum = 0.0;
    for (double logprob : token_logprobs) {
        if (!(logprob <= 0.0)) {
            throw PreconditionError("token log-probabilities must be <= 0");
        }
        sum += logprob;
    }
    return -sum;
}

namespace {

class StagedFile {
public:
    StagedFile(const std::filesystem::path& final_path)
        : final_(final_path), temp_(final_path.string() + ".tmp"), out_(temp_) {
        if (!out_) throw IoError("cannot open " + temp_.string() + " for writing");
    }

    std::ofstream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw IoError("write to " + temp_.string() + " failed");
        out_.close();
        std::filesystem::rename(temp_, final_);
        committed_ = true;
    }

    ~StagedFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(temp_, ec);
        }
    }

private:
    std::filesystem::path final_;
    std::filesystem::path temp_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace

EmitManifest emit_training_files(std::span<const PromptBatch> batches, int k,
                                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    StagedFile sft(out_dir / "sft.jsonl");
    StagedFile dpo(out_dir / "dpo.jsonl");
    StagedFile manifest(out_dir / "manifest.json");

    EmitManifest result;
    ordered_json manifest_json = ordered_json::object();
    for (const PromptBatch& batch : batches) {
        auto targets = select_sft_targets(batch.candidates, k);
        auto pairs = build_preference_pairs(batch.candidates, k);

        for (const CandidateResponse& target : targets) {
            ordered_json line;
            line["prompt_id"] = batch.prompt_id;
            line["prompt"] = batch.prompt;
            line["target_text"] = target.text();
            line["score"] = *target.score;
            line["lineage"] = lineage_to_json(target.lineage);
            sft.stream() << line.dump() << "\n";
            ++result.total_sft_lines;
        }

        std::unordered_map<std::string, const CandidateResponse*> by_id;
        for (const CandidateResponse& candidate : batch.candidates) {
            by_id[candidate.id] = &candidate;
        }
        for (const PreferencePair& pair : pairs) {
            ordered_json line;
            line["prompt_id"] = pair.prompt_id;
            line["prompt"] = batch.prompt;
            line["chosen_text"] = by_id.at(pair.chosen_id)->text();
            line["rejected_text"] = by_id.at(pair.rejected_id)->text();
            line["chosen_score"] = pair.chosen_score;
            line["rejected_score"] = pair.rejected_score;
            dpo.stream() << line.dump() << "\n";
            ++result.total_dpo_lines;
        }

        PromptManifest info;
        info.num_candidates = static_cast<long>(batch.candidates.size());
        info.num_pairs = static_cast<long>(pairs.size());
        for (const CandidateResponse& target : targets) {
            info.top_scores.push_back(*target.score);
        }
        info.k_truncated = targets.size() < static_cast<std::size_t>(k);
        if (pairs.empty()) info.note = "no pairs: scores tied or no eligible chosen";
        result.per_prompt.emplace_back(batch.prompt_id, info);

        ordered_json entry;
        entry["num_candidates"] = info.num_candidates;
        entry["num_pairs"] = info.num_pairs;
        entry["top_scores"] = info.top_scores;
        if (info.k_truncated) entry["k_truncated"] = true;
        if (!info.note.empty()) entry["note"] = info.note;
        manifest_json[batch.prompt_id] = std::move(entry);
    }

    manifest.stream() << manifest_json.dump(2) << "\n";
    sft.commit();
    dpo.commit();
    manifest.commit();
    return result;
}

}  // namespace fence
