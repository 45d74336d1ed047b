#include "fence/http_clients.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fence {

using nlohmann::json;

EndpointParts split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    std::size_t path_start;
    if (scheme_end == std::string::npos) {
        path_start = endpoint.find('/');
    } else {
        path_start = endpoint.find('/', scheme_end + 3);
    }
    if (path_start == std::string::npos) {
        return {endpoint, ""};
    }
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

namespace {

httplib::Headers auth_headers(const std::string& api_key) {
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    return headers;
}

// 408/429/5xx and connection failures are retryable; other statuses are not.
json post_json(httplib::Client& client, const std::string& path,
               const httplib::Headers& headers, const json& body) {
    auto result = client.Post(path, headers, body.dump(), "application/json");
    if (!result) {
        throw TransportError("request to " + path + " failed: " +
                             httplib::to_string(result.error()));
    }
    if (result->status == 408 || result->status == 429 || result->status >= 500) {
        throw TransportError("request to " + path + " returned status " +
                             std::to_string(result->status));
    }
    if (result->status != 200) {
        throw FenceError("request to " + path + " returned status " +
                         std::to_string(result->status) + ": " + result->body);
    }
    try {
        return json::parse(result->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed response body: ") + e.what());
    }
}

std::unique_ptr<httplib::Client> make_client(const EndpointParts& parts,
                                             std::chrono::milliseconds timeout) {
    auto client = std::make_unique<httplib::Client>(parts.base);
    if (timeout.count() > 0) {
        client->set_connection_timeout(timeout);
        client->set_read_timeout(timeout);
        client->set_write_timeout(timeout);
    }
    return client;
}

}  // namespace

struct HttpChatClient::Impl {
    EndpointParts parts;
    std::string api_key;
    std::unique_ptr<httplib::Client> client;
};

HttpChatClient::HttpChatClient(BackendProfile profile, std::string api_key,
                               CallLimits limits)
    : ChatClient(profile, limits), impl_(std::make_unique<Impl>()) {
    impl_->parts = split_endpoint(profile.endpoint);
    impl_->api_key = std::move(api_key);
    impl_->client = make_client(impl_->parts, profile.request_timeout);
}

HttpChatClient::~HttpChatClient() = default;

std::vector<std::string> HttpChatClient::chat_once(const ChatRequest& request) {
    json body;
    body["model"] = profile().model_name;
    body["messages"] = json::array();
    if (!request.system_prompt.empty()) {
        body["messages"].push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    body["messages"].push_back({{"role", "user"}, {"content", request.user_prompt}});
    body["temperature"] = request.temperature;
    body["n"] = request.num_samples;
    body["max_tokens"] = request.max_output_units;

    json response = post_json(*impl_->client, impl_->parts.prefix + "/chat/completions",
                              auth_headers(impl_->api_key), body);
    std::vector<std::string> completions;
    for (const auto& choice : response.value("choices", json::array())) {
        completions.push_back(choice.at("message").value("content", ""));
    }
    return completions;
}

struct HttpEmbedClient::Impl {
    EndpointParts parts;
    std::string api_key;
    std::unique_ptr<httplib::Client> client;
};

HttpEmbedClient::HttpEmbedClient(BackendProfile profile, std::string api_key,
                                 CallLimits limits)
    : EmbedClient(profile, limits), impl_(std::make_unique<Impl>()) {
    impl_->parts = split_endpoint(profile.endpoint);
    impl_->api_key = std::move(api_key);
    impl_->client = make_client(impl_->parts, profile.request_timeout);
}

HttpEmbedClient::~HttpEmbedClient() = default;

std::vector<std::vector<double>> HttpEmbedClient::embed_once(
    const std::vector<std::string>& texts) {
    json body;
    body["model"] = profile().model_name;
    body["input"] = texts;

    json response = post_json(*impl_->client, impl_->parts.prefix + "/embeddings",
                              auth_headers(impl_->api_key), body);
    std::vector<std::vector<double>> vectors;
    for (const auto& item : response.value("data", json::array())) {
        vectors.push_back(item.at("embedding").get<std::vector<double>>());
    }
    return vectors;
}

}  // namespace fence
