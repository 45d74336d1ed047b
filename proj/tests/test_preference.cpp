#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fence/preference.hpp"
#include "fence/serialize.hpp"

using namespace fence;

namespace {

CandidateResponse make_candidate(const std::string& id, double score, int round = 0,
                                 int sample_index = 0) {
    CandidateResponse c;
    c.id = id;
    c.prompt_id = "p";
    c.lineage.kind = round == 0 ? Lineage::Kind::original : Lineage::Kind::revised;
    c.lineage.round = round;
    c.lineage.sample_index = sample_index;
    c.passages = {{0, "text of " + id, false}};
    // one synthetic verdict so the candidate is not zero-claim
    ClaimVerdict v;
    v.judgment.label = JudgmentLabel::Supported;
    c.verdicts = {v};
    c.score = score;
    return c;
}

// Independent oracle: enumerate all (w, l) with w among the k best scores and
// score(l) strictly lower. Assumes pairwise-distinct scores.
long long brute_force_pairs(std::vector<double> scores, int k) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    sorted.resize(std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size()));
    long long count = 0;
    for (double w : sorted) {
        for (double l : scores) {
            if (l < w) ++count;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("score_from_verdicts: fraction of supported claims") {
    std::vector<ClaimVerdict> verdicts(6);
    for (int i = 0; i < 4; ++i) verdicts[static_cast<std::size_t>(i)].judgment.label = JudgmentLabel::Supported;
    verdicts[4].judgment.label = JudgmentLabel::Contradictory;
    verdicts[5].judgment.label = JudgmentLabel::Unverified;
    CHECK(score_from_verdicts(verdicts) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

    for (auto& v : verdicts) v.judgment.label = JudgmentLabel::Supported;
    CHECK(score_from_verdicts(verdicts) == 1.0);
}

TEST_CASE("score_from_verdicts: invariant under permutation") {
    std::mt19937 rng(7);
    std::vector<ClaimVerdict> verdicts(9);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        verdicts[i].judgment.label =
            i % 3 == 0 ? JudgmentLabel::Supported
                       : (i % 3 == 1 ? JudgmentLabel::Contradictory : JudgmentLabel::Unverified);
    }
    double reference = score_from_verdicts(verdicts);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(verdicts.begin(), verdicts.end(), rng);
        CHECK(score_from_verdicts(verdicts) == reference);
    }
}

TEST_CASE("score_response: refused zero-claim response scores 0 with flag") {
    CandidateResponse refusal;
    refusal.id = "r";
    refusal.passages = {{0, "I apologize, but I'm not familiar with this person.", false}};
    score_response(refusal);
    CHECK(refusal.refused);
    CHECK(refusal.score == 0.0);
}

TEST_CASE("select_sft_targets: k best in descending score order") {
    std::vector<CandidateResponse> candidates = {
        make_candidate("a", 0.9, 0, 0),
        make_candidate("b", 0.5, 0, 1),
        make_candidate("c", 0.7, 1, 0),
    };
    auto targets = select_sft_targets(candidates, 2);
    REQUIRE(targets.size() == 2);
    CHECK(targets[0].id == "a");
    CHECK(targets[1].id == "c");

    auto all = select_sft_targets(candidates, 3);
    REQUIRE(all.size() == 3);
    CHECK(all[2].id == "b");
}

TEST_CASE("select_sft_targets: tie prefers the higher round, then lower sample") {
    std::vector<CandidateResponse> candidates = {
        make_candidate("orig", 0.8, 0, 0),
        make_candidate("revised", 0.8, 2, 0),
    };
    auto targets = select_sft_targets(candidates, 1);
    REQUIRE(targets.size() == 1);
    CHECK(targets[0].id == "revised");

    candidates = {make_candidate("s1", 0.8, 1, 1), make_candidate("s0", 0.8, 1, 0)};
    targets = select_sft_targets(candidates, 1);
    CHECK(targets[0].id == "s0");
}

TEST_CASE("select_sft_targets: k beyond the pool returns everyone, refusals never") {
    std::vector<CandidateResponse> candidates = {make_candidate("a", 0.4)};
    CandidateResponse refusal = make_candidate("refused", 0.0);
    refusal.refused = true;
    refusal.verdicts.clear();
    candidates.push_back(refusal);

    auto targets = select_sft_targets(candidates, 5);
    REQUIRE(targets.size() == 1);
    CHECK(targets[0].id == "a");
}

TEST_CASE("expected_pair_count: formula values") {
    CHECK(expected_pair_count(5, 3) == 24);
    CHECK(expected_pair_count(1, 1) == 1);
    for (int n = 1; n <= 6; ++n) {
        CHECK(expected_pair_count(n, 2 * n) == 2LL * n * (2 * n - 1) / 2);
    }
    CHECK_THROWS_AS(expected_pair_count(2, 5), PreconditionError);
}

TEST_CASE("build_preference_pairs: matches formula and brute force on distinct scores") {
    std::mt19937 rng(42);
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= 2 * n; ++k) {
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> scores;
                std::uniform_real_distribution<double> dist(0.0, 1.0);
                while (scores.size() < static_cast<std::size_t>(2 * n)) {
                    double s = dist(rng);
                    if (std::find(scores.begin(), scores.end(), s) == scores.end()) {
                        scores.push_back(s);
                    }
                }
                std::vector<CandidateResponse> candidates;
                for (std::size_t i = 0; i < scores.size(); ++i) {
                    candidates.push_back(make_candidate("c" + std::to_string(i), scores[i], 0,
                                                        static_cast<int>(i)));
                }
                auto pairs = build_preference_pairs(candidates, k);
                long long expected = expected_pair_count(n, k);
                CHECK(static_cast<long long>(pairs.size()) == expected);
                CHECK(brute_force_pairs(scores, k) == expected);
            }
        }
    }
}

TEST_CASE("build_preference_pairs: strict inequality, deterministic order") {
    std::vector<CandidateResponse> tied = {
        make_candidate("a", 0.5, 0, 0), make_candidate("b", 0.5, 0, 1)};
    CHECK(build_preference_pairs(tied, 1).empty());

    std::vector<CandidateResponse> two = {
        make_candidate("low", 0.2, 0, 0), make_candidate("high", 0.9, 0, 1)};
    auto pairs = build_preference_pairs(two, 1);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].chosen_id == "high");
    CHECK(pairs[0].rejected_id == "low");
    CHECK(pairs[0].chosen_score > pairs[0].rejected_score);
}

TEST_CASE("build_preference_pairs: every pair has chosen in the top-k set") {
    std::vector<CandidateResponse> candidates;
    for (int i = 0; i < 8; ++i) {
        candidates.push_back(make_candidate("c" + std::to_string(i), 0.1 * i, 0, i));
    }
    int k = 3;
    auto targets = select_sft_targets(candidates, k);
    auto pairs = build_preference_pairs(candidates, k);
    for (const PreferencePair& pair : pairs) {
        bool chosen_in_topk = false;
        for (const auto& target : targets) {
            if (target.id == pair.chosen_id) chosen_in_topk = true;
        }
        CHECK(chosen_in_topk);
        CHECK(pair.chosen_score > pair.rejected_score);
    }
}

TEST_CASE("dpo_loss: zero margin gives ln 2") {
    ObjectiveInputs inputs{0.1, -1.0, -2.0, -1.0, -2.0};
    CHECK(dpo_loss(inputs) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("dpo_loss: beta 0.1 with ratios 2 and -3 gives ln(1+e^-0.5)") {
    // chosen log-ratio 2.0, rejected log-ratio -3.0 -> margin 0.5
    ObjectiveInputs inputs{0.1, 2.0, -3.0, 0.0, 0.0};
    CHECK(dpo_loss(inputs) == doctest::Approx(0.4740769841801067).epsilon(1e-12));
}

TEST_CASE("dpo_loss: monotone in both log-ratios, vanishes at large margin") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        ObjectiveInputs inputs{0.3, dist(rng), dist(rng), dist(rng), dist(rng)};
        double base = dpo_loss(inputs);
        ObjectiveInputs up_w = inputs;
        up_w.logp_w_policy += 1e-3;
        CHECK(dpo_loss(up_w) < base);
        ObjectiveInputs up_l = inputs;
        up_l.logp_l_policy += 1e-3;
        CHECK(dpo_loss(up_l) > base);
    }
    ObjectiveInputs inputs{1.0, 500.0, -500.0, 0.0, 0.0};
    CHECK(dpo_loss(inputs) < 1e-12);
}

TEST_CASE("dpo_loss: invariant under shifting policy and reference together") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (int i = 0; i < 50; ++i) {
        ObjectiveInputs inputs{0.2, dist(rng), dist(rng), dist(rng), dist(rng)};
        double base = dpo_loss(inputs);
        double shift = dist(rng);
        ObjectiveInputs shifted = inputs;
        shifted.logp_w_policy += shift;
        shifted.logp_w_ref += shift;
        CHECK(dpo_loss(shifted) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("dpo_loss: rejects non-finite inputs and non-positive beta") {
    CHECK_THROWS_AS(dpo_loss({0.0, 1.0, 0.0, 0.0, 0.0}), PreconditionError);
    CHECK_THROWS_AS(dpo_loss({0.1, std::nan(""), 0.0, 0.0, 0.0}), PreconditionError);
}

TEST_CASE("mle_nll: negated sum, zero for empty and certain tokens") {
    std::vector<double> logprobs = {-0.5, -1.5};
    CHECK(mle_nll(logprobs) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mle_nll(std::vector<double>{}) == 0.0);
    std::vector<double> certain = {0.0, 0.0};
    CHECK(mle_nll(certain) == 0.0);
    std::vector<double> bad = {0.1};
    CHECK_THROWS_AS(mle_nll(bad), PreconditionError);
}

TEST_CASE("emit_training_files: 10 distinct-score candidates with k=3 emit 24 dpo lines") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "fence_emit_test";
    std::filesystem::remove_all(dir);

    PromptBatch batch;
    batch.prompt_id = "p1";
    batch.prompt = "tell me about x";
    for (int i = 0; i < 10; ++i) {
        batch.candidates.push_back(
            make_candidate("c" + std::to_string(i), 0.05 + 0.09 * i, 0, i));
    }
    std::vector<PromptBatch> batches = {batch};
    EmitManifest manifest = emit_training_files(batches, 3, dir);
    CHECK(manifest.total_dpo_lines == 24);
    CHECK(manifest.total_sft_lines == 3);
    CHECK(read_jsonl_file((dir / "dpo.jsonl").string()).size() == 24);
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_training_files: zero prompts emit empty files and manifest") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "fence_emit_empty";
    std::filesystem::remove_all(dir);
    EmitManifest manifest = emit_training_files({}, 3, dir);
    CHECK(manifest.total_sft_lines == 0);
    CHECK(manifest.total_dpo_lines == 0);
    CHECK(std::filesystem::exists(dir / "sft.jsonl"));
    CHECK(std::filesystem::exists(dir / "dpo.jsonl"));
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_training_files: all-tied scores note zero pairs in the manifest") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "fence_emit_tied";
    std::filesystem::remove_all(dir);
    PromptBatch batch;
    batch.prompt_id = "p1";
    batch.prompt = "prompt";
    for (int i = 0; i < 4; ++i) {
        batch.candidates.push_back(make_candidate("c" + std::to_string(i), 0.5, 0, i));
    }
    std::vector<PromptBatch> batches = {batch};
    EmitManifest manifest = emit_training_files(batches, 2, dir);
    CHECK(manifest.total_dpo_lines == 0);
    CHECK(manifest.total_sft_lines == 2);
    REQUIRE(manifest.per_prompt.size() == 1);
    CHECK(manifest.per_prompt[0].second.num_pairs == 0);
    CHECK_FALSE(manifest.per_prompt[0].second.note.empty());
    std::filesystem::remove_all(dir);
}
