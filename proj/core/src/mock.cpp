#include "fence/mock.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "fence/hash.hpp"

namespace fence {

using nlohmann::ordered_json;

void MockBook::add(BackendRole role, ChatRequest request,
                   std::vector<std::string> responses, int fail_times) {
    std::uint64_t fp = request_fingerprint(role, request);
    std::lock_guard lock(mutex_);
    if (entries_.find(fp) == entries_.end()) order_.push_back(fp);
    entries_[fp] = MockEntry{role, std::move(request), std::move(responses), fail_times};
    if (fail_times > 0) failures_left_[fp] = fail_times;
}

void MockBook::add_embedding(std::string text, std::vector<double> vector) {
    std::lock_guard lock(mutex_);
    embeddings_[std::move(text)] = std::move(vector);
}

const MockEntry* MockBook::find(std::uint64_t fingerprint) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(fingerprint);
    return it == entries_.end() ? nullptr : &it->second;
}

bool MockBook::consume_failure(std::uint64_t fingerprint) {
    std::lock_guard lock(mutex_);
    auto it = failures_left_.find(fingerprint);
    if (it == failures_left_.end() || it->second <= 0) return false;
    --it->second;
    return true;
}

const std::vector<double>* MockBook::find_embedding(const std::string& text) const {
    std::lock_guard lock(mutex_);
    auto it = embeddings_.find(text);
    return it == embeddings_.end() ? nullptr : &it->second;
}

void MockBook::record(LoggedCall call) {
    std::lock_guard lock(mutex_);
    log_.push_back(std::move(call));
}

std::vector<MockBook::LoggedCall> MockBook::log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

void MockBook::clear_log() {
    std::lock_guard lock(mutex_);
    log_.clear();
}

std::string MockBook::dump_json() const {
    std::lock_guard lock(mutex_);
    ordered_json root;
    root["chat"] = ordered_json::array();
    for (std::uint64_t fp : order_) {
        const MockEntry& e = entries_.at(fp);
        ordered_json item;
        item["role"] = std::string(to_string(e.role));
        item["system"] = e.request.system_prompt;
        item["user"] = e.request.user_prompt;
        item["temperature"] = e.request.temperature;
        item["num_samples"] = e.request.num_samples;
        item["responses"] = e.responses;
        if (e.fail_times > 0) item["fail_times"] = e.fail_times;
        root["chat"].push_back(std::move(item));
    }
    root["embed"] = ordered_json::object();
    for (const auto& [text, vec] : embeddings_) {
        root["embed"][text] = vec;
    }
    return root.dump(2) + "\n";
}

void MockBook::load_json(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed mock script: ") + e.what());
    }
    for (const auto& item : root.value("chat", ordered_json::array())) {
        auto role = parse_backend_role(item.value("role", "instruction_model"));
        if (!role) throw ConfigError("mock script: unknown role " + item.value("role", ""));
        ChatRequest request;
        request.system_prompt = item.value("system", "");
        request.user_prompt = item.value("user", "");
        request.temperature = item.value("temperature", 0.0);
        request.num_samples = item.value("num_samples", 1);
        std::vector<std::string> responses =
            item.value("responses", std::vector<std::string>{});
        add(*role, std::move(request), std::move(responses), item.value("fail_times", 0));
    }
    if (root.contains("embed")) {
        for (const auto& [text, vec] : root["embed"].items()) {
            add_embedding(text, vec.get<std::vector<double>>());
        }
    }
}

std::shared_ptr<MockBook> MockBook::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    auto book = std::make_shared<MockBook>();
    book->load_json(text);
    return book;
}

void MockBook::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mock script: " + path);
    out << dump_json();
}

MockChatClient::MockChatClient(BackendProfile profile, std::shared_ptr<MockBook> book,
                               bool strict, CallLimits limits)
    : ChatClient(std::move(profile), limits), book_(std::move(book)), strict_(strict) {}

std::vector<std::string> MockChatClient::chat_once(const ChatRequest& request) {
    std::uint64_t fp = request_fingerprint(profile().role, request);
    book_->record({profile().role, request, fp});
    if (book_->consume_failure(fp)) {
        throw TransportError("scripted transport failure");
    }
    const MockEntry* entry = book_->find(fp);
    if (entry == nullptr) {
        if (strict_) {
            throw ScriptMiss("no scripted response for " + std::string(to_string(profile().role)) +
                             " request fingerprint " + to_hex(fp) +
                             " (user prompt: " + request.user_prompt.substr(0, 120) + ")");
        }
        return std::vector<std::string>(static_cast<std::size_t>(request.num_samples));
    }
    if (entry->responses.size() < static_cast<std::size_t>(request.num_samples)) {
        throw ScriptMiss("script entry holds " + std::to_string(entry->responses.size()) +
                         " responses, request wants " + std::to_string(request.num_samples));
    }
    return {entry->responses.begin(),
            entry->responses.begin() + request.num_samples};
}

MockEmbedClient::MockEmbedClient(BackendProfile profile, std::shared_ptr<MockBook> book,
                                 bool strict, int fallback_dim, CallLimits limits)
    : EmbedClient(std::move(profile), limits),
      book_(std::move(book)),
      strict_(strict),
      fallback_dim_(fallback_dim) {}

std::vector<std::vector<double>> MockEmbedClient::embed_once(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        if (const auto* scripted = book_->find_embedding(text)) {
            out.push_back(*scripted);
        } else if (strict_) {
            throw ScriptMiss("no scripted embedding for text: " + text.substr(0, 120));
        } else {
            out.push_back(derived_embedding(text, fallback_dim_));
        }
    }
    return out;
}

std::vector<double> derived_embedding(std::string_view text, int dim) {
    std::uint64_t state = fnv1a64(text);
    std::vector<double> v(static_cast<std::size_t>(dim > 0 ? dim : 1));
    for (double& x : v) {
        // Top 53 bits to [0,1), then to [-1,1). Portable and run-stable.
        std::uint64_t bits = splitmix64(state) >> 11;
        x = static_cast<double>(bits) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;
    }
    return v;
}

}  // namespace fence
