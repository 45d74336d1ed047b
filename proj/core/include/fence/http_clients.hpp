#pragma once

#include <memory>
#include <string>

#include "fence/backends.hpp"

namespace fence {

// Splits "http://host:port/prefix" into a base usable by an HTTP client and
// the path prefix requests are mounted under.
struct EndpointParts {
    std::string base;    // scheme://host[:port]
    std::string prefix;  // leading path, possibly empty
};
EndpointParts split_endpoint(const std::string& endpoint);

// Chat-completions client: POST {endpoint}/chat/completions with
// {model, messages, temperature, n, max_tokens}.
class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(BackendProfile profile, std::string api_key = "",
                   CallLimits limits = {});
    ~HttpChatClient() override;

protected:
    std::vector<std::string> chat_once(const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Embeddings client: POST {endpoint}/embeddings with {model, input}.
class HttpEmbedClient final : public EmbedClient {
public:
    HttpEmbedClient(BackendProfile profile, std::string api_key = "",
                    CallLimits limits = {});
    ~HttpEmbedClient() override;

protected:
    std::vector<std::vector<double>> embed_once(
        const std::vector<std::string>& texts) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fence
