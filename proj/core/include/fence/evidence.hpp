#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fence/backends.hpp"
#include "fence/evidence_config.hpp"
#include "fence/model.hpp"
#include "fence/providers.hpp"

namespace fence {

// Generated tool calls for one claim.
struct ToolQueryBundle {
    std::string search_query;
    std::vector<std::string> wiki_titles;
    std::vector<std::string> kg_entities;

    bool empty() const {
        return search_query.empty() && wiki_titles.empty() && kg_entities.empty();
    }
};

// Splits into chunks of at most chunk_size whitespace tokens. Joining the
// chunks with single spaces reproduces the whitespace-collapsed input.
std::vector<std::string> chunk_text(std::string_view body, int chunk_size);

std::string gen_search_query(ChatClient& instruction, const Claim& claim);
std::vector<std::string> gen_wiki_titles(ChatClient& instruction, const Claim& claim);
std::vector<std::string> gen_kg_entities(ChatClient& instruction, const Claim& claim);

// Top-n documents by cosine similarity between each body embedding and the
// claim embedding; one embed call covers the claim and every body. Returned
// documents carry the similarity in retrieval_score. Ties break by (origin
// declaration order, original index), a stable total order.
std::vector<EvidenceDocument> rerank(EmbedClient& embedder, const Claim& claim,
                                     std::vector<EvidenceDocument> docs, int top_n);

// Query generation -> provider fan-out -> rerank. Providers fail soft: a
// failed provider contributes nothing; only a fully empty pool is an error.
// Provider results are cached by (provider, query) for the retriever's
// lifetime, so a repeated query performs no second outbound call.
class EvidenceRetriever {
public:
    EvidenceRetriever(ChatClient& instruction, EmbedClient& embedder,
                      std::vector<std::shared_ptr<EvidenceProvider>> providers,
                      RetrievalConfig config);

    // Throws AllProvidersFailed when no configured provider yields a document.
    std::vector<EvidenceDocument> retrieve(const Claim& claim);

    const RetrievalConfig& config() const { return config_; }
    // Outbound provider fetches actually performed (cache misses).
    std::size_t provider_fetches() const { return fetches_.load(); }

private:
    std::vector<EvidenceDocument> cached_fetch(EvidenceProvider& provider,
                                               const std::string& query);

    ChatClient& instruction_;
    EmbedClient& embedder_;
    std::vector<std::shared_ptr<EvidenceProvider>> providers_;
    RetrievalConfig config_;
    std::mutex cache_mutex_;
    std::unordered_map<std::string, std::vector<EvidenceDocument>> cache_;
    std::atomic<std::size_t> fetches_{0};
};

}  // namespace fence
