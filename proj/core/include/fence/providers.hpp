#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/evidence_config.hpp"
#include "fence/model.hpp"

namespace fence {

enum class ProviderKind { search, encyclopedia, knowledge_graph };

std::string_view to_string(ProviderKind kind);

// One evidence source. fetch() turns a single query (search query, page name,
// or entity name) into documents; failures throw and are handled by the
// retriever, which degrades gracefully.
class EvidenceProvider {
public:
    virtual ~EvidenceProvider() = default;
    virtual ProviderKind kind() const = 0;
    virtual std::vector<EvidenceDocument> fetch(const std::string& query,
                                                const RetrievalConfig& config) = 0;
};

// Filesystem-safe key for fixture files: lowercase, non-alphanumerics folded
// to single underscores, capped length.
std::string sanitize_key(std::string_view query);

// Crude tag stripper for scraped pages; drops script/style blocks, decodes a
// handful of entities, collapses whitespace.
std::string strip_html(const std::string& html);

struct SearchResult {
    std::string title;
    std::string url;
    std::string snippet;
    std::string page_content;  // fixtures may carry the page inline
};

// Turns one search result into documents: the snippet plus chunk_size-token
// chunks of the page content when a page is available.
std::vector<EvidenceDocument> documents_from_search_result(const SearchResult& result,
                                                           int chunk_size);

// Reads <dir>/<sanitize(query)>.json holding an array of search results.
class FixtureSearchProvider final : public EvidenceProvider {
public:
    explicit FixtureSearchProvider(std::filesystem::path dir);
    ProviderKind kind() const override { return ProviderKind::search; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    std::filesystem::path dir_;
};

// Web-search API client: GET {endpoint}/search?q=... yielding
// {"results": [{title, url, snippet}]}; each hit's URL is scraped and the
// page chunked, falling back to the snippet alone when scraping fails.
class HttpSearchProvider final : public EvidenceProvider {
public:
    HttpSearchProvider(std::string endpoint, std::string api_key,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds{15000});
    ProviderKind kind() const override { return ProviderKind::search; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    std::string endpoint_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

// Local encyclopedia snapshot: <dir>/titles.txt lists every page title, and
// <dir>/pages/<sanitize(title)>.txt holds the page body. Page-name matching
// uses cosine similarity of title embeddings against the requested name.
class WikiSnapshotProvider final : public EvidenceProvider {
public:
    WikiSnapshotProvider(std::filesystem::path dir, EmbedClient& embedder);
    ProviderKind kind() const override { return ProviderKind::encyclopedia; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    void ensure_index();

    std::filesystem::path dir_;
    EmbedClient& embedder_;
    std::mutex mutex_;
    std::vector<std::string> titles_;
    std::vector<std::vector<double>> title_vectors_;
    bool indexed_ = false;
};

// Remote encyclopedia: GET {endpoint}/page?title=<name> yielding
// {title, text}. The service resolves the page name, so no local title
// index is involved; the page body is chunked like a snapshot page.
class HttpWikiProvider final : public EvidenceProvider {
public:
    explicit HttpWikiProvider(std::string endpoint,
                              std::chrono::milliseconds timeout = std::chrono::milliseconds{15000});
    ProviderKind kind() const override { return ProviderKind::encyclopedia; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
};

struct KgEntity {
    std::string name;
    std::string description;
    std::string detailed_description;
    std::vector<std::pair<std::string, std::string>> attributes;
};

// Flattened text form, one "Name Attribute: value." clause per attribute.
std::string render_kg_entity(const KgEntity& entity);

// Reads <dir>/<sanitize(entity)>.json holding an array of entities.
class FixtureKgProvider final : public EvidenceProvider {
public:
    explicit FixtureKgProvider(std::filesystem::path dir);
    ProviderKind kind() const override { return ProviderKind::knowledge_graph; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    std::filesystem::path dir_;
};

// Entity-search API client: GET {endpoint}/entities?query=... yielding a
// ranked {"items": [{name, description, detailed_description, attributes}]}.
class HttpKgProvider final : public EvidenceProvider {
public:
    HttpKgProvider(std::string endpoint, std::string api_key,
                   std::chrono::milliseconds timeout = std::chrono::milliseconds{15000});
    ProviderKind kind() const override { return ProviderKind::knowledge_graph; }
    std::vector<EvidenceDocument> fetch(const std::string& query,
                                        const RetrievalConfig& config) override;

private:
    std::string endpoint_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

}  // namespace fence
