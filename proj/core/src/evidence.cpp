#include "fence/evidence.hpp"

#include <algorithm>
#include <future>

#include "fence/log.hpp"
#include "fence/prompts.hpp"
#include "fence/text.hpp"

namespace fence {

std::vector<std::string> chunk_text(std::string_view body, int chunk_size) {
    if (chunk_size < 1) throw PreconditionError("chunk_size must be >= 1");
    std::vector<std::string> tokens = ws_tokens(body);
    std::vector<std::string> chunks;
    std::size_t step = static_cast<std::size_t>(chunk_size);
    for (std::size_t start = 0; start < tokens.size(); start += step) {
        std::size_t end = std::min(start + step, tokens.size());
        std::string chunk = tokens[start];
        for (std::size_t i = start + 1; i < end; ++i) {
            chunk += ' ';
            chunk += tokens[i];
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::string gen_search_query(ChatClient& instruction, const Claim& claim) {
    auto completions = instruction.chat(prompts::search_query_request(claim));
    return prompts::parse_search_query(completions.front());
}

std::vector<std::string> gen_wiki_titles(ChatClient& instruction, const Claim& claim) {
    auto completions = instruction.chat(prompts::wiki_titles_request(claim));
    return prompts::parse_name_list(completions.front());
}

std::vector<std::string> gen_kg_entities(ChatClient& instruction, const Claim& claim) {
    auto completions = instruction.chat(prompts::kg_entities_request(claim));
    return prompts::parse_name_list(completions.front());
}

std::vector<EvidenceDocument> rerank(EmbedClient& embedder, const Claim& claim,
                                     std::vector<EvidenceDocument> docs, int top_n) {
    if (top_n < 1) throw PreconditionError("top_n must be >= 1");
    if (docs.empty()) return {};

    std::vector<std::string> texts;
    texts.reserve(docs.size() + 1);
    texts.push_back(claim.text);
    for (const auto& doc : docs) texts.push_back(doc.body);
    auto vectors = embedder.embed(texts);

    struct Ranked {
        double similarity;
        int origin_rank;
        std::size_t index;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ranked.push_back({dot(vectors.front(), vectors[i + 1]),
                          static_cast<int>(docs[i].origin), i});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.origin_rank != b.origin_rank) return a.origin_rank < b.origin_rank;
        return a.index < b.index;
    });

    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(top_n), docs.size());
    std::vector<EvidenceDocument> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        EvidenceDocument doc = docs[ranked[i].index];
        doc.retrieval_score = ranked[i].similarity;
        out.push_back(std::move(doc));
    }
    return out;
}

EvidenceRetriever::EvidenceRetriever(ChatClient& instruction, EmbedClient& embedder,
                                     std::vector<std::shared_ptr<EvidenceProvider>> providers,
                                     RetrievalConfig config)
    : instruction_(instruction),
      embedder_(embedder),
      providers_(std::move(providers)),
      config_(config) {
    if (providers_.empty()) {
        throw PreconditionError("retrieval requires at least one configured provider");
    }
}

std::vector<EvidenceDocument> EvidenceRetriever::cached_fetch(EvidenceProvider& provider,
                                                              const std::string& query) {
    std::string key = std::string(to_string(provider.kind())) + "\x1f" + query;
    {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    fetches_.fetch_add(1);
    auto docs = provider.fetch(query, config_);
    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(key, std::move(docs)).first->second;
}

std::vector<EvidenceDocument> EvidenceRetriever::retrieve(const Claim& claim) {
    bool has_kind[3] = {false, false, false};
    for (const auto& provider : providers_) {
        has_kind[static_cast<int>(provider->kind())] = true;
    }

    // Query generation failures disable that provider for this claim only.
    ToolQueryBundle bundle;
    int generation_failures = 0;
    auto generate = [&](auto&& fn) {
        try {
            fn();
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const FenceError& e) {
            ++generation_failures;
            log_warn("tool-query generation failed for claim " + claim.id + ": " + e.what());
        }
    };
    if (has_kind[static_cast<int>(ProviderKind::search)]) {
        generate([&] { bundle.search_query = gen_search_query(instruction_, claim); });
    }
    if (has_kind[static_cast<int>(ProviderKind::encyclopedia)]) {
        generate([&] { bundle.wiki_titles = gen_wiki_titles(instruction_, claim); });
    }
    if (has_kind[static_cast<int>(ProviderKind::knowledge_graph)]) {
        generate([&] { bundle.kg_entities = gen_kg_entities(instruction_, claim); });
    }
    if (bundle.empty()) {
        throw AllProvidersFailed("no tool queries could be generated for claim " + claim.id);
    }

    struct Task {
        EvidenceProvider* provider;
        std::string query;
    };
    std::vector<Task> tasks;
    for (const auto& provider : providers_) {
        switch (provider->kind()) {
            case ProviderKind::search:
                if (!bundle.search_query.empty()) {
                    tasks.push_back({provider.get(), bundle.search_query});
                }
                break;
            case ProviderKind::encyclopedia:
                for (const auto& title : bundle.wiki_titles) {
                    tasks.push_back({provider.get(), title});
                }
                break;
            case ProviderKind::knowledge_graph:
                for (const auto& entity : bundle.kg_entities) {
                    tasks.push_back({provider.get(), entity});
                }
                break;
        }
    }

    // Fan out per (provider, query); a failed task contributes zero documents.
    std::vector<std::future<std::vector<EvidenceDocument>>> futures;
    futures.reserve(tasks.size());
    for (const Task& task : tasks) {
        futures.push_back(std::async(std::launch::async, [this, task] {
            return cached_fetch(*task.provider, task.query);
        }));
    }

    std::vector<EvidenceDocument> pool;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            auto docs = futures[i].get();
            pool.insert(pool.end(), docs.begin(), docs.end());
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception& e) {
            ++failures;
            log_warn(std::string(to_string(tasks[i].provider->kind())) + " provider failed for query '" +
                     tasks[i].query + "': " + e.what());
        }
    }

    if (pool.empty()) {
        throw AllProvidersFailed("all providers failed or returned nothing for claim " +
                                 claim.id + " (" + std::to_string(failures) +
                                 " provider failures, " +
                                 std::to_string(generation_failures) +
                                 " query-generation failures)");
    }
    return rerank(embedder_, claim, std::move(pool), config_.rerank_top_n);
}

}  // namespace fence
