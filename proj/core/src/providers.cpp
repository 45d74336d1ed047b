#include "fence/providers.hpp"

#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fence/evidence.hpp"
#include "fence/http_clients.hpp"
#include "fence/text.hpp"

namespace fence {

using nlohmann::json;

std::string_view to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::search: return "search";
        case ProviderKind::encyclopedia: return "encyclopedia";
        case ProviderKind::knowledge_graph: return "knowledge_graph";
    }
    return "search";
}

std::string sanitize_key(std::string_view query) {
    std::string out;
    bool last_underscore = true;
    for (char c : query) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            out += static_cast<char>(std::tolower(uc));
            last_underscore = false;
        } else if (!last_underscore) {
            out += '_';
            last_underscore = true;
        }
        if (out.size() >= 100) break;
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "_" : out;
}

std::string strip_html(const std::string& html) {
    std::string lower = to_lower(html);
    std::string out;
    out.reserve(html.size());
    std::size_t i = 0;
    auto skip_block = [&](std::string_view open, std::string_view close) {
        if (lower.compare(i, open.size(), open) == 0) {
            std::size_t end = lower.find(close, i);
            i = end == std::string::npos ? html.size() : end + close.size();
            return true;
        }
        return false;
    };
    while (i < html.size()) {
        if (html[i] == '<') {
            if (skip_block("<script", "</script>")) continue;
            if (skip_block("<style", "</style>")) continue;
            std::size_t end = html.find('>', i);
            i = end == std::string::npos ? html.size() : end + 1;
            out += ' ';
            continue;
        }
        if (html[i] == '&') {
            static const std::pair<std::string_view, char> entities[] = {
                {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'},
                {"&quot;", '"'}, {"&#39;", '\''}, {"&nbsp;", ' '},
            };
            bool matched = false;
            for (const auto& [name, ch] : entities) {
                if (html.compare(i, name.size(), name) == 0) {
                    out += ch;
                    i += name.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        out += html[i];
        ++i;
    }
    return collapse_ws(out);
}

std::vector<EvidenceDocument> documents_from_search_result(const SearchResult& result,
                                                           int chunk_size) {
    std::vector<EvidenceDocument> docs;
    if (!trim(result.snippet).empty()) {
        docs.push_back({result.title, std::string(trim(result.snippet)),
                        DocOrigin::search, 0, std::nullopt});
    }
    if (!trim(result.page_content).empty()) {
        auto chunks = chunk_text(result.page_content, chunk_size);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            docs.push_back({result.title, std::move(chunks[i]), DocOrigin::search,
                            static_cast<int>(i), std::nullopt});
        }
    }
    return docs;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TransportError("fixture not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw TransportError("malformed fixture " + path.string() + ": " + e.what());
    }
}

json http_get_json(const std::string& endpoint, const std::string& path,
                   const httplib::Headers& headers, std::chrono::milliseconds timeout) {
    EndpointParts parts = split_endpoint(endpoint);
    httplib::Client client(parts.base);
    if (timeout.count() > 0) {
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
    }
    auto result = client.Get(parts.prefix + path, headers);
    if (!result || result->status != 200) {
        throw TransportError("provider request failed: " + endpoint + path);
    }
    try {
        return json::parse(result->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed provider response: ") + e.what());
    }
}

SearchResult search_result_from_json(const json& item) {
    SearchResult r;
    r.title = item.value("title", "");
    r.url = item.value("url", "");
    r.snippet = item.value("snippet", "");
    r.page_content = item.value("page_content", "");
    return r;
}

}  // namespace

FixtureSearchProvider::FixtureSearchProvider(std::filesystem::path dir)
    : dir_(std::move(dir)) {}

std::vector<EvidenceDocument> FixtureSearchProvider::fetch(const std::string& query,
                                                           const RetrievalConfig& config) {
    json items = read_json_file(dir_ / (sanitize_key(query) + ".json"));
    std::vector<EvidenceDocument> docs;
    int taken = 0;
    for (const auto& item : items) {
        if (taken++ >= config.search_results_per_query) break;
        auto result_docs =
            documents_from_search_result(search_result_from_json(item), config.chunk_size);
        docs.insert(docs.end(), result_docs.begin(), result_docs.end());
    }
    return docs;
}

HttpSearchProvider::HttpSearchProvider(std::string endpoint, std::string api_key,
                                       std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::vector<EvidenceDocument> HttpSearchProvider::fetch(const std::string& query,
                                                        const RetrievalConfig& config) {
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Ocp-Apim-Subscription-Key", api_key_);
    json response = http_get_json(
        endpoint_, "/search?q=" + httplib::detail::encode_url(query) +
                       "&count=" + std::to_string(config.search_results_per_query),
        headers, timeout_);

    std::vector<EvidenceDocument> docs;
    int taken = 0;
    for (const auto& item : response.value("results", json::array())) {
        if (taken++ >= config.search_results_per_query) break;
        SearchResult result = search_result_from_json(item);
        if (result.page_content.empty() && !result.url.empty()) {
            // Unscrapable pages keep their snippet; the snippet is evidence too.
            try {
                EndpointParts page = split_endpoint(result.url);
                httplib::Client client(page.base);
                if (timeout_.count() > 0) {
                    client.set_connection_timeout(timeout_);
                    client.set_read_timeout(timeout_);
                }
                client.set_follow_location(true);
                auto body = client.Get(page.prefix.empty() ? "/" : page.prefix);
                if (body && body->status == 200) {
                    result.page_content = strip_html(body->body);
                }
            } catch (const std::exception&) {
            }
        }
        auto result_docs = documents_from_search_result(result, config.chunk_size);
        docs.insert(docs.end(), result_docs.begin(), result_docs.end());
    }
    return docs;
}

WikiSnapshotProvider::WikiSnapshotProvider(std::filesystem::path dir, EmbedClient& embedder)
    : dir_(std::move(dir)), embedder_(embedder) {}

void WikiSnapshotProvider::ensure_index() {
    if (indexed_) return;
    std::ifstream in(dir_ / "titles.txt");
    if (!in) throw TransportError("snapshot title index not found in " + dir_.string());
    std::string line;
    std::vector<std::string> titles;
    while (std::getline(in, line)) {
        std::string title = std::string(trim(line));
        if (!title.empty()) titles.push_back(std::move(title));
    }
    if (titles.empty()) throw TransportError("snapshot title index is empty");
    title_vectors_ = embedder_.embed(titles);
    titles_ = std::move(titles);
    indexed_ = true;
}

std::vector<EvidenceDocument> WikiSnapshotProvider::fetch(const std::string& query,
                                                          const RetrievalConfig& config) {
    std::lock_guard lock(mutex_);
    ensure_index();
    std::vector<double> query_vec = embedder_.embed({query}).front();

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(titles_.size());
    for (std::size_t i = 0; i < titles_.size(); ++i) {
        scored.emplace_back(dot(query_vec, title_vectors_[i]), i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<EvidenceDocument> docs;
    int pages = 0;
    for (const auto& [score, index] : scored) {
        if (pages >= config.wiki_pages_per_title) break;
        const std::string& title = titles_[index];
        std::ifstream page(dir_ / "pages" / (sanitize_key(title) + ".txt"));
        if (!page) continue;  // index entry without body: skip
        std::string body((std::istreambuf_iterator<char>(page)),
                         std::istreambuf_iterator<char>());
        auto chunks = chunk_text(body, config.chunk_size);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            docs.push_back({title, std::move(chunks[i]), DocOrigin::encyclopedia,
                            static_cast<int>(i), std::nullopt});
        }
        ++pages;
    }
    return docs;
}

HttpWikiProvider::HttpWikiProvider(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

std::vector<EvidenceDocument> HttpWikiProvider::fetch(const std::string& query,
                                                      const RetrievalConfig& config) {
    json page = http_get_json(endpoint_,
                              "/page?title=" + httplib::detail::encode_url(query), {},
                              timeout_);
    std::string title = page.value("title", query);
    std::string body = page.value("text", "");
    std::vector<EvidenceDocument> docs;
    auto chunks = chunk_text(body, config.chunk_size);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        docs.push_back({title, std::move(chunks[i]), DocOrigin::encyclopedia,
                        static_cast<int>(i), std::nullopt});
    }
    return docs;
}

std::string render_kg_entity(const KgEntity& entity) {
    std::string out = entity.name + ": " + entity.description + ".";
    if (!entity.detailed_description.empty()) {
        out += " " + entity.detailed_description;
        if (out.back() != '.') out += '.';
    }
    for (const auto& [attribute, value] : entity.attributes) {
        out += " " + entity.name + " " + attribute + ": " + value + ".";
    }
    return out;
}

namespace {

KgEntity kg_entity_from_json(const json& item) {
    KgEntity e;
    e.name = item.value("name", "");
    e.description = item.value("description", "");
    e.detailed_description = item.value("detailed_description", "");
    if (item.contains("attributes")) {
        for (const auto& [key, value] : item["attributes"].items()) {
            e.attributes.emplace_back(key, value.get<std::string>());
        }
    }
    return e;
}

std::vector<EvidenceDocument> kg_documents(const json& items, int kg_results) {
    std::vector<EvidenceDocument> docs;
    int taken = 0;
    for (const auto& item : items) {
        if (taken++ >= kg_results) break;
        docs.push_back({"knowledge graph result", render_kg_entity(kg_entity_from_json(item)),
                        DocOrigin::knowledge_graph, 0, std::nullopt});
    }
    return docs;
}

}  // namespace

FixtureKgProvider::FixtureKgProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::vector<EvidenceDocument> FixtureKgProvider::fetch(const std::string& query,
                                                       const RetrievalConfig& config) {
    json items = read_json_file(dir_ / (sanitize_key(query) + ".json"));
    return kg_documents(items, config.kg_results);
}

HttpKgProvider::HttpKgProvider(std::string endpoint, std::string api_key,
                               std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::vector<EvidenceDocument> HttpKgProvider::fetch(const std::string& query,
                                                    const RetrievalConfig& config) {
    std::string path = "/entities?query=" + httplib::detail::encode_url(query);
    if (!api_key_.empty()) path += "&key=" + api_key_;
    json response = http_get_json(endpoint_, path, {}, timeout_);
    return kg_documents(response.value("items", json::array()), config.kg_results);
}

}  // namespace fence
