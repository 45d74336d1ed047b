#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fence/backends.hpp"

namespace fence {

// One scripted reply: a canned response list for a request fingerprint, with
// an optional number of leading transport failures for retry tests.
struct MockEntry {
    BackendRole role = BackendRole::instruction_model;
    ChatRequest request;
    std::vector<std::string> responses;
    int fail_times = 0;
};

// Shared script + call log for every mocked role in a run. Fingerprints are
// computed from the entry fields, so script files carry plain text, never
// hashes. Safe for concurrent use.
class MockBook {
public:
    struct LoggedCall {
        BackendRole role = BackendRole::instruction_model;
        ChatRequest request;
        std::uint64_t fingerprint = 0;
    };

    void add(BackendRole role, ChatRequest request, std::vector<std::string> responses,
             int fail_times = 0);
    void add_embedding(std::string text, std::vector<double> vector);

    const MockEntry* find(std::uint64_t fingerprint) const;
    // True while the entry still owes a scripted transport failure.
    bool consume_failure(std::uint64_t fingerprint);

    const std::vector<double>* find_embedding(const std::string& text) const;

    void record(LoggedCall call);
    std::vector<LoggedCall> log() const;
    void clear_log();

    std::size_t size() const { return order_.size(); }

    std::string dump_json() const;
    // Appends entries parsed from a script file's JSON text.
    void load_json(const std::string& json_text);
    static std::shared_ptr<MockBook> load_file(const std::string& path);
    void save_file(const std::string& path) const;

private:
    std::vector<std::uint64_t> order_;
    std::unordered_map<std::uint64_t, MockEntry> entries_;
    std::unordered_map<std::string, std::vector<double>> embeddings_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, int> failures_left_;
    std::vector<LoggedCall> log_;
};

// Replays canned completions from a MockBook. In strict mode an unmatched
// fingerprint raises ScriptMiss; otherwise empty completions come back.
class MockChatClient final : public ChatClient {
public:
    MockChatClient(BackendProfile profile, std::shared_ptr<MockBook> book,
                   bool strict = true, CallLimits limits = {});

protected:
    std::vector<std::string> chat_once(const ChatRequest& request) override;

private:
    std::shared_ptr<MockBook> book_;
    bool strict_;
};

// Returns scripted vectors when present; in non-strict mode unknown texts get
// a deterministic pseudo-vector derived from their content hash, so pipelines
// can rerank arbitrary fixture documents without scripting every body.
class MockEmbedClient final : public EmbedClient {
public:
    MockEmbedClient(BackendProfile profile, std::shared_ptr<MockBook> book,
                    bool strict = false, int fallback_dim = 8, CallLimits limits = {});

protected:
    std::vector<std::vector<double>> embed_once(
        const std::vector<std::string>& texts) override;

private:
    std::shared_ptr<MockBook> book_;
    bool strict_;
    int fallback_dim_;
};

// The hash-derived unit-direction vector used by non-strict mock embedding.
std::vector<double> derived_embedding(std::string_view text, int dim);

}  // namespace fence
