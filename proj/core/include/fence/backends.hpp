#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fence/errors.hpp"

namespace fence {

enum class BackendRole { instruction_model, evaluator, generator, embedder };

std::string_view to_string(BackendRole role);
std::optional<BackendRole> parse_backend_role(std::string_view s);

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int num_samples = 1;
    int max_output_units = 1024;
};

struct BackendProfile {
    BackendRole role = BackendRole::instruction_model;
    std::string endpoint;
    std::string model_name;
    int retry_limit = 2;  // <= 10
    std::chrono::milliseconds request_timeout{30000};
};

// Throws ConfigError on invariant violations (retry_limit > 10, negative timeout).
void validate(const BackendProfile& profile);

// Stable hash of (role, system prompt, user prompt, temperature, num_samples).
// Mock scripts key canned responses by this.
std::uint64_t request_fingerprint(BackendRole role, const ChatRequest& request);

struct CallLimits {
    std::size_t max_calls = 0;  // 0 = unlimited
    int max_in_flight = 8;
};

// Bounded in-flight gate; one per client enforces provider rate limits.
class InFlightGate {
public:
    explicit InFlightGate(int slots);
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int free_;
};

// Chat-completion client contract. The base class owns call counting, the
// budget cap, the in-flight limit, and retry of transient transport failures;
// subclasses implement a single attempt.
class ChatClient {
public:
    explicit ChatClient(BackendProfile profile, CallLimits limits = {});
    virtual ~ChatClient() = default;

    // Returns exactly request.num_samples completions.
    std::vector<std::string> chat(const ChatRequest& request);

    const BackendProfile& profile() const { return profile_; }
    std::size_t calls() const { return calls_.load(); }

    // Backoff base for the deterministic retry schedule (base * 2^attempt).
    // Tests set 0 to retry without sleeping.
    void set_backoff(std::chrono::milliseconds base) { backoff_ = base; }

protected:
    virtual std::vector<std::string> chat_once(const ChatRequest& request) = 0;

private:
    BackendProfile profile_;
    CallLimits limits_;
    std::atomic<std::size_t> calls_{0};
    InFlightGate gate_;
    std::chrono::milliseconds backoff_{100};
};

// Text-embedding client contract. The base class normalizes every vector to
// unit Euclidean norm and rejects inconsistent widths.
class EmbedClient {
public:
    explicit EmbedClient(BackendProfile profile, CallLimits limits = {});
    virtual ~EmbedClient() = default;

    // One unit vector per input text, same order.
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

    const BackendProfile& profile() const { return profile_; }
    std::size_t calls() const { return calls_.load(); }
    void set_backoff(std::chrono::milliseconds base) { backoff_ = base; }

protected:
    virtual std::vector<std::vector<double>> embed_once(
        const std::vector<std::string>& texts) = 0;

private:
    BackendProfile profile_;
    CallLimits limits_;
    std::atomic<std::size_t> calls_{0};
    InFlightGate gate_;
    std::chrono::milliseconds backoff_{100};
};

double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace fence
