#include "fence/backends.hpp"

#include <cmath>
#include <optional>
#include <thread>

#include "fence/hash.hpp"
#include "fence/text.hpp"

namespace fence {

std::string_view to_string(BackendRole role) {
    switch (role) {
        case BackendRole::instruction_model: return "instruction_model";
        case BackendRole::evaluator: return "evaluator";
        case BackendRole::generator: return "generator";
        case BackendRole::embedder: return "embedder";
    }
    return "instruction_model";
}

std::optional<BackendRole> parse_backend_role(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "instruction_model") return BackendRole::instruction_model;
    if (v == "evaluator") return BackendRole::evaluator;
    if (v == "generator") return BackendRole::generator;
    if (v == "embedder") return BackendRole::embedder;
    return std::nullopt;
}

void validate(const BackendProfile& profile) {
    if (profile.retry_limit < 0 || profile.retry_limit > 10) {
        throw ConfigError("retry_limit must be in [0, 10], got " +
                          std::to_string(profile.retry_limit));
    }
    if (profile.request_timeout.count() < 0) {
        throw ConfigError("request_timeout must be non-negative");
    }
}

std::uint64_t request_fingerprint(BackendRole role, const ChatRequest& request) {
    // \x1f separators keep field boundaries unambiguous; to_string(double)
    // gives a fixed six-decimal form.
    std::uint64_t h = fnv1a64(to_string(role));
    h = fnv1a64("\x1f", h);
    h = fnv1a64(request.system_prompt, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(request.user_prompt, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(request.temperature), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(request.num_samples), h);
    return h;
}

InFlightGate::InFlightGate(int slots) : free_(slots > 0 ? slots : 1) {}

void InFlightGate::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
}

void InFlightGate::release() {
    {
        std::lock_guard lock(mutex_);
        ++free_;
    }
    cv_.notify_one();
}

namespace {

class GateHold {
public:
    explicit GateHold(InFlightGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateHold() { gate_.release(); }
    GateHold(const GateHold&) = delete;
    GateHold& operator=(const GateHold&) = delete;

private:
    InFlightGate& gate_;
};

// Reserves one slot against the budget; calls() counts issued calls only.
template <typename Counter>
void charge_budget(Counter& calls, std::size_t max_calls, std::string_view role) {
    std::size_t prev = calls.fetch_add(1);
    if (max_calls != 0 && prev >= max_calls) {
        calls.fetch_sub(1);
        throw BudgetExceeded("call budget " + std::to_string(max_calls) +
                             " exhausted for role " + std::string(role));
    }
}

template <typename Fn>
auto with_retries(Fn&& attempt, int retry_limit, std::chrono::milliseconds backoff) {
    for (int tries = 0;; ++tries) {
        try {
            return attempt();
        } catch (const TransportError&) {
            if (tries >= retry_limit) throw;
            if (backoff.count() > 0) {
                std::this_thread::sleep_for(backoff * (1 << tries));
            }
        }
    }
}

}  // namespace

ChatClient::ChatClient(BackendProfile profile, CallLimits limits)
    : profile_(std::move(profile)), limits_(limits), gate_(limits.max_in_flight) {
    validate(profile_);
}

std::vector<std::string> ChatClient::chat(const ChatRequest& request) {
    if (profile_.role == BackendRole::embedder) {
        throw PreconditionError("chat() is not available on the embedder role");
    }
    if (request.num_samples < 1) {
        throw PreconditionError("num_samples must be >= 1");
    }
    GateHold hold(gate_);
    charge_budget(calls_, limits_.max_calls, to_string(profile_.role));
    auto completions = with_retries([&] { return chat_once(request); },
                                    profile_.retry_limit, backoff_);
    if (completions.size() != static_cast<std::size_t>(request.num_samples)) {
        throw TransportError("backend returned " + std::to_string(completions.size()) +
                             " completions, expected " +
                             std::to_string(request.num_samples));
    }
    return completions;
}

EmbedClient::EmbedClient(BackendProfile profile, CallLimits limits)
    : profile_(std::move(profile)), limits_(limits), gate_(limits.max_in_flight) {
    validate(profile_);
}

std::vector<std::vector<double>> EmbedClient::embed(const std::vector<std::string>& texts) {
    if (profile_.role != BackendRole::embedder) {
        throw PreconditionError("embed() requires the embedder role");
    }
    if (texts.empty()) {
        throw PreconditionError("embed() requires at least one text");
    }
    GateHold hold(gate_);
    charge_budget(calls_, limits_.max_calls, to_string(profile_.role));
    auto vectors = with_retries([&] { return embed_once(texts); },
                                profile_.retry_limit, backoff_);
    if (vectors.size() != texts.size()) {
        throw DimensionMismatch("backend returned " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::size_t width = vectors.empty() ? 0 : vectors.front().size();
    for (auto& v : vectors) {
        if (v.size() != width || v.empty()) {
            throw DimensionMismatch("inconsistent embedding widths");
        }
        double norm_sq = 0.0;
        for (double x : v) norm_sq += x * x;
        if (norm_sq <= 0.0 || !std::isfinite(norm_sq)) {
            throw DimensionMismatch("embedding with zero or non-finite norm");
        }
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : v) x *= inv;
    }
    return vectors;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t n = std::min(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace fence
