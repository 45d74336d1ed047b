#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/preference.hpp"

namespace fence {

// Per-response fact tally. pct is undefined for refused/zero-claim rows.
struct ResponseRow {
    std::string prompt_id;
    std::string response_id;
    long num_facts = 0;
    long num_errors = 0;
    std::optional<double> pct_facts;
    bool refused = false;
    std::string group;  // metadata bucket, empty when ungrouped
};

struct GroupAggregate {
    long responses = 0;
    double mean_facts = 0.0;
    double mean_errors = 0.0;
    std::optional<double> mean_pct;  // over rows with a defined pct
    double refusal_rate = 0.0;
};

struct TopicTally {
    long facts = 0;
    long errors = 0;
};

struct FactualityReport {
    std::vector<ResponseRow> rows;
    GroupAggregate aggregate;
    std::map<std::string, GroupAggregate> groups;
    std::map<std::string, TopicTally> topics;
    std::vector<std::string> warnings;
};

// Tallies facts/errors per judged response; groups by the prompt -> bucket
// map when one is supplied (prompts without a bucket land in a warning).
FactualityReport build_factuality_report(
    std::span<const PromptBatch> batches,
    const std::map<std::string, std::string>& prompt_groups = {});

// One instruction-model call per claim against the fixed topic list; tallies
// supported/unsupported claims per topic into report.topics.
void classify_topics(FactualityReport& report, ChatClient& instruction,
                     std::span<const PromptBatch> batches,
                     std::span<const std::string> topics);

// {prompt_id -> bucket} from a JSONL file of {prompt_id, popularity_bucket}.
std::map<std::string, std::string> load_group_metadata(const std::string& path);

std::string report_to_json(const FactualityReport& report);

// Per-response rows as CSV: prompt_id, response_id, num_facts, num_errors,
// pct_facts (blank when undefined), refused, group.
std::string report_to_csv(const FactualityReport& report);

}  // namespace fence
