#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/evidence_config.hpp"
#include "fence/revision.hpp"

namespace fence {

struct ProviderSettings {
    std::string search_fixture_dir;
    std::string search_endpoint;
    std::string search_api_key;
    std::string wiki_snapshot_dir;
    std::string wiki_endpoint;
    std::string kg_fixture_dir;
    std::string kg_endpoint;
    std::string kg_api_key;

    bool has_search() const { return !search_fixture_dir.empty() || !search_endpoint.empty(); }
    bool has_wiki() const { return !wiki_snapshot_dir.empty() || !wiki_endpoint.empty(); }
    bool has_kg() const { return !kg_fixture_dir.empty() || !kg_endpoint.empty(); }
    bool any() const { return has_search() || has_wiki() || has_kg(); }
};

struct PipelineConfig {
    BackendProfile instruction{BackendRole::instruction_model, "", "", 2,
                               std::chrono::milliseconds{30000}};
    BackendProfile evaluator{BackendRole::evaluator, "", "", 2,
                             std::chrono::milliseconds{30000}};
    BackendProfile generator{BackendRole::generator, "", "", 2,
                             std::chrono::milliseconds{30000}};
    BackendProfile embedder{BackendRole::embedder, "", "", 2,
                            std::chrono::milliseconds{30000}};
    std::string api_key;

    RetrievalConfig retrieval;
    RevisionConfig revision;

    int n_candidates = 5;  // N sampled responses per prompt
    int top_k = 3;         // k SFT / preferred responses

    std::size_t budget_instruction = 0;
    std::size_t budget_evaluator = 0;
    std::size_t budget_generator = 0;
    std::size_t budget_embedder = 0;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;

    double sample_temperature = 1.0;  // candidate sampling
    double judge_temperature = 0.0;   // single-shot judging
    int token_budget = 6000;          // judgment prompt budget, whitespace tokens
    int workers = 4;
    int max_in_flight = 8;
    int critique_candidates = 10;

    ProviderSettings providers;
    std::vector<std::string> topics;
    std::string mock_script;
    bool strict_mock = true;
};

// Parses the key = value config format ('#' comments, dotted keys). Unknown
// keys are errors. Environment variables fill gaps: FENCE_LLM_ENDPOINT,
// FENCE_EMBED_ENDPOINT, FENCE_LLM_API_KEY, FENCE_SEARCH_API_KEY,
// FENCE_KG_API_KEY, FENCE_WIKI_SNAPSHOT_DIR.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);

// Rejects every config invariant violation before any backend call.
void validate(const PipelineConfig& config);

}  // namespace fence
