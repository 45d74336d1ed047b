#include "fence/config.hpp"

#include <cstdlib>
#include <fstream>

#include "fence/text.hpp"

namespace fence {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr ? std::string(value) : fallback;
}

long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long parsed = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
    }
}

long to_nonnegative(const std::string& key, const std::string& value) {
    long parsed = to_long(key, value);
    if (parsed < 0) {
        throw ConfigError("config key '" + key + "' must be non-negative, got '" + value + "'");
    }
    return parsed;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double parsed = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
    }
}

BackendProfile* profile_for(PipelineConfig& config, const std::string& role) {
    if (role == "instruction_model") return &config.instruction;
    if (role == "evaluator") return &config.evaluator;
    if (role == "generator") return &config.generator;
    if (role == "embedder") return &config.embedder;
    return nullptr;
}

std::size_t* budget_for(PipelineConfig& config, const std::string& role) {
    if (role == "instruction_model") return &config.budget_instruction;
    if (role == "evaluator") return &config.budget_evaluator;
    if (role == "generator") return &config.budget_generator;
    if (role == "embedder") return &config.budget_embedder;
    return nullptr;
}

void apply(PipelineConfig& config, const std::string& key, const std::string& value) {
    if (key == "n") { config.n_candidates = static_cast<int>(to_long(key, value)); return; }
    if (key == "k") { config.top_k = static_cast<int>(to_long(key, value)); return; }
    if (key == "seed") { config.seed = static_cast<std::uint64_t>(to_nonnegative(key, value)); return; }
    if (key == "out_dir") { config.out_dir = value; return; }
    if (key == "workers") { config.workers = static_cast<int>(to_long(key, value)); return; }
    if (key == "max_in_flight") {
        config.max_in_flight = static_cast<int>(to_long(key, value));
        return;
    }
    if (key == "token_budget") {
        config.token_budget = static_cast<int>(to_long(key, value));
        return;
    }
    if (key == "sample_temperature") { config.sample_temperature = to_double(key, value); return; }
    if (key == "judge_temperature") { config.judge_temperature = to_double(key, value); return; }
    if (key == "critique_candidates") {
        config.critique_candidates = static_cast<int>(to_long(key, value));
        return;
    }
    if (key == "api_key") { config.api_key = value; return; }
    if (key == "mock_script") { config.mock_script = value; return; }
    if (key == "strict_mock") { config.strict_mock = value != "false" && value != "0"; return; }
    if (key == "topics") {
        config.topics.clear();
        std::size_t start = 0;
        while (start <= value.size()) {
            std::size_t comma = value.find(',', start);
            if (comma == std::string::npos) comma = value.size();
            std::string topic = std::string(trim(value.substr(start, comma - start)));
            if (!topic.empty()) config.topics.push_back(std::move(topic));
            start = comma + 1;
        }
        return;
    }

    if (key.starts_with("profile.")) {
        std::size_t dot = key.find('.', 8);
        if (dot != std::string::npos) {
            std::string role = key.substr(8, dot - 8);
            std::string field = key.substr(dot + 1);
            BackendProfile* profile = profile_for(config, role);
            if (profile != nullptr) {
                if (field == "endpoint") { profile->endpoint = value; return; }
                if (field == "model") { profile->model_name = value; return; }
                if (field == "retry_limit") {
                    profile->retry_limit = static_cast<int>(to_long(key, value));
                    return;
                }
                if (field == "timeout_ms") {
                    profile->request_timeout = std::chrono::milliseconds(to_long(key, value));
                    return;
                }
            }
        }
    }
    if (key.starts_with("budget.")) {
        std::size_t* budget = budget_for(config, key.substr(7));
        if (budget != nullptr) {
            *budget = static_cast<std::size_t>(to_nonnegative(key, value));
            return;
        }
    }
    if (key.starts_with("retrieval.")) {
        std::string field = key.substr(10);
        int parsed = static_cast<int>(to_long(key, value));
        if (field == "search_results_per_query") { config.retrieval.search_results_per_query = parsed; return; }
        if (field == "chunk_size") { config.retrieval.chunk_size = parsed; return; }
        if (field == "wiki_pages_per_title") { config.retrieval.wiki_pages_per_title = parsed; return; }
        if (field == "kg_results") { config.retrieval.kg_results = parsed; return; }
        if (field == "rerank_top_n") { config.retrieval.rerank_top_n = parsed; return; }
    }
    if (key.starts_with("revision.")) {
        std::string field = key.substr(9);
        int parsed = static_cast<int>(to_long(key, value));
        if (field == "max_rounds") { config.revision.max_rounds = parsed; return; }
        if (field == "max_false_claims") { config.revision.max_false_claims_per_passage = parsed; return; }
        if (field == "max_passages") { config.revision.max_passages_revised = parsed; return; }
    }
    if (key.starts_with("providers.")) {
        std::string field = key.substr(10);
        if (field == "search.fixture_dir") { config.providers.search_fixture_dir = value; return; }
        if (field == "search.endpoint") { config.providers.search_endpoint = value; return; }
        if (field == "search.api_key") { config.providers.search_api_key = value; return; }
        if (field == "wiki.snapshot_dir") { config.providers.wiki_snapshot_dir = value; return; }
        if (field == "wiki.endpoint") { config.providers.wiki_endpoint = value; return; }
        if (field == "kg.fixture_dir") { config.providers.kg_fixture_dir = value; return; }
        if (field == "kg.endpoint") { config.providers.kg_endpoint = value; return; }
        if (field == "kg.api_key") { config.providers.kg_api_key = value; return; }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void fill_from_env(PipelineConfig& config) {
    std::string llm_endpoint = env_or("FENCE_LLM_ENDPOINT", "");
    for (BackendProfile* profile :
         {&config.instruction, &config.evaluator, &config.generator}) {
        if (profile->endpoint.empty()) profile->endpoint = llm_endpoint;
    }
    if (config.embedder.endpoint.empty()) {
        config.embedder.endpoint = env_or("FENCE_EMBED_ENDPOINT", llm_endpoint);
    }
    if (config.api_key.empty()) config.api_key = env_or("FENCE_LLM_API_KEY", "");
    if (config.providers.search_api_key.empty()) {
        config.providers.search_api_key = env_or("FENCE_SEARCH_API_KEY", "");
    }
    if (config.providers.kg_api_key.empty()) {
        config.providers.kg_api_key = env_or("FENCE_KG_API_KEY", "");
    }
    if (config.providers.wiki_snapshot_dir.empty()) {
        config.providers.wiki_snapshot_dir = env_or("FENCE_WIKI_SNAPSHOT_DIR", "");
    }
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig config;
    config.instruction.role = BackendRole::instruction_model;
    config.evaluator.role = BackendRole::evaluator;
    config.generator.role = BackendRole::generator;
    config.embedder.role = BackendRole::embedder;

    int line_number = 0;
    for (const std::string& raw : split_lines(text)) {
        ++line_number;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_number) +
                              " is not 'key = value': " + std::string(line));
        }
        std::string key = std::string(trim(line.substr(0, eq)));
        std::string value = std::string(trim(line.substr(eq + 1)));
        apply(config, key, value);
    }
    fill_from_env(config);
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

void validate(const PipelineConfig& config) {
    std::vector<std::string> problems;
    if (config.n_candidates < 1) problems.push_back("n must be >= 1");
    if (config.top_k < 1) problems.push_back("k must be >= 1");
    if (config.top_k > 2 * config.n_candidates) problems.push_back("k must be <= 2N");
    if (config.workers < 1) problems.push_back("workers must be >= 1");
    if (config.max_in_flight < 1) problems.push_back("max_in_flight must be >= 1");
    if (config.token_budget < 1) problems.push_back("token_budget must be >= 1");
    if (config.sample_temperature < 0) problems.push_back("sample_temperature must be >= 0");
    if (config.judge_temperature < 0) problems.push_back("judge_temperature must be >= 0");
    if (config.critique_candidates < 1) problems.push_back("critique_candidates must be >= 1");
    if (config.retrieval.search_results_per_query < 1 || config.retrieval.chunk_size < 1 ||
        config.retrieval.wiki_pages_per_title < 1 || config.retrieval.kg_results < 1 ||
        config.retrieval.rerank_top_n < 1) {
        problems.push_back("retrieval settings must all be >= 1");
    }
    if (config.revision.max_rounds < 1 || config.revision.max_false_claims_per_passage < 1 ||
        config.revision.max_passages_revised < 1) {
        problems.push_back("revision limits must all be >= 1");
    }
    for (const BackendProfile* profile :
         {&config.instruction, &config.evaluator, &config.generator, &config.embedder}) {
        if (profile->retry_limit < 0 || profile->retry_limit > 10) {
            problems.push_back(std::string(to_string(profile->role)) +
                               ".retry_limit must be in [0, 10]");
        }
    }
    if (!problems.empty()) {
        std::string message = "invalid config:";
        for (const std::string& problem : problems) message += "\n  - " + problem;
        throw ConfigError(message);
    }
}

}  // namespace fence
