#include "fence/report.hpp"

#include <nlohmann/json.hpp>

#include "fence/prompts.hpp"
#include "fence/serialize.hpp"

namespace fence {

using nlohmann::ordered_json;

namespace {

GroupAggregate aggregate_rows(std::span<const ResponseRow* const> rows) {
    GroupAggregate agg;
    agg.responses = static_cast<long>(rows.size());
    if (rows.empty()) return agg;
    double facts = 0.0;
    double errors = 0.0;
    double pct_sum = 0.0;
    long pct_rows = 0;
    long refused = 0;
    for (const ResponseRow* row : rows) {
        facts += static_cast<double>(row->num_facts);
        errors += static_cast<double>(row->num_errors);
        if (row->pct_facts) {
            pct_sum += *row->pct_facts;
            ++pct_rows;
        }
        if (row->refused) ++refused;
    }
    agg.mean_facts = facts / static_cast<double>(rows.size());
    agg.mean_errors = errors / static_cast<double>(rows.size());
    if (pct_rows > 0) agg.mean_pct = pct_sum / static_cast<double>(pct_rows);
    agg.refusal_rate = static_cast<double>(refused) / static_cast<double>(rows.size());
    return agg;
}

}  // namespace

FactualityReport build_factuality_report(
    std::span<const PromptBatch> batches,
    const std::map<std::string, std::string>& prompt_groups) {
    FactualityReport report;
    bool grouping = !prompt_groups.empty();
    for (const PromptBatch& batch : batches) {
        std::string group;
        if (grouping) {
            auto it = prompt_groups.find(batch.prompt_id);
            if (it != prompt_groups.end()) {
                group = it->second;
            } else {
                report.warnings.push_back("no group metadata for prompt " + batch.prompt_id +
                                          "; grouping skipped for it");
            }
        }
        for (const CandidateResponse& candidate : batch.candidates) {
            ResponseRow row;
            row.prompt_id = batch.prompt_id;
            row.response_id = candidate.id;
            row.refused = candidate.refused;
            row.group = group;
            for (const ClaimVerdict& verdict : candidate.verdicts) {
                if (verdict.judgment.label == JudgmentLabel::Supported) ++row.num_facts;
                else ++row.num_errors;
            }
            if (!candidate.refused && row.num_facts + row.num_errors > 0) {
                row.pct_facts = static_cast<double>(row.num_facts) /
                                static_cast<double>(row.num_facts + row.num_errors);
            }
            report.rows.push_back(std::move(row));
        }
    }

    std::vector<const ResponseRow*> all;
    std::map<std::string, std::vector<const ResponseRow*>> by_group;
    for (const ResponseRow& row : report.rows) {
        all.push_back(&row);
        if (!row.group.empty()) by_group[row.group].push_back(&row);
    }
    report.aggregate = aggregate_rows(all);
    for (const auto& [group, rows] : by_group) {
        report.groups[group] = aggregate_rows(rows);
    }
    return report;
}

void classify_topics(FactualityReport& report, ChatClient& instruction,
                     std::span<const PromptBatch> batches,
                     std::span<const std::string> topics) {
    if (topics.empty()) return;
    for (const std::string& topic : topics) report.topics[topic];
    for (const PromptBatch& batch : batches) {
        for (const CandidateResponse& candidate : batch.candidates) {
            for (const ClaimVerdict& verdict : candidate.verdicts) {
                std::string completion =
                    instruction.chat(prompts::topic_request(verdict.claim, topics)).front();
                for (const std::string& topic : prompts::parse_topics(completion, topics)) {
                    if (verdict.judgment.label == JudgmentLabel::Supported) {
                        ++report.topics[topic].facts;
                    } else {
                        ++report.topics[topic].errors;
                    }
                }
            }
        }
    }
}

std::map<std::string, std::string> load_group_metadata(const std::string& path) {
    std::map<std::string, std::string> groups;
    for (const std::string& line : read_jsonl_file(path)) {
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed metadata record: " + std::string(e.what()));
        }
        std::string bucket = j.contains("popularity_bucket")
                                 ? j["popularity_bucket"].get<std::string>()
                                 : j.value("group", "");
        groups[j.value("prompt_id", "")] = bucket;
    }
    return groups;
}

std::string report_to_csv(const FactualityReport& report) {
    std::string out = "prompt_id,response_id,num_facts,num_errors,pct_facts,refused,group\n";
    auto quote = [](const std::string& field) {
        if (field.find_first_of(",\"\n") == std::string::npos) return field;
        std::string quoted = "\"";
        for (char c : field) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + "\"";
    };
    char buffer[32];
    for (const ResponseRow& row : report.rows) {
        out += quote(row.prompt_id) + "," + quote(row.response_id) + ",";
        out += std::to_string(row.num_facts) + "," + std::to_string(row.num_errors) + ",";
        if (row.pct_facts) {
            std::snprintf(buffer, sizeof(buffer), "%.6f", *row.pct_facts);
            out += buffer;
        }
        out += ",";
        out += row.refused ? "true" : "false";
        out += "," + quote(row.group) + "\n";
    }
    return out;
}

std::string report_to_json(const FactualityReport& report) {
    auto aggregate_json = [](const GroupAggregate& agg) {
        ordered_json j;
        j["responses"] = agg.responses;
        j["mean_facts"] = agg.mean_facts;
        j["mean_errors"] = agg.mean_errors;
        if (agg.mean_pct) j["mean_pct_facts"] = *agg.mean_pct;
        else j["mean_pct_facts"] = nullptr;
        j["refusal_rate"] = agg.refusal_rate;
        return j;
    };

    ordered_json j;
    j["per_response"] = ordered_json::array();
    for (const ResponseRow& row : report.rows) {
        ordered_json r;
        r["prompt_id"] = row.prompt_id;
        r["response_id"] = row.response_id;
        r["num_facts"] = row.num_facts;
        r["num_errors"] = row.num_errors;
        if (row.pct_facts) r["pct_facts"] = *row.pct_facts;
        else r["pct_facts"] = nullptr;
        r["refused"] = row.refused;
        if (!row.group.empty()) r["group"] = row.group;
        j["per_response"].push_back(std::move(r));
    }
    j["aggregate"] = aggregate_json(report.aggregate);
    j["groups"] = ordered_json::object();
    for (const auto& [group, agg] : report.groups) {
        j["groups"][group] = aggregate_json(agg);
    }
    if (!report.topics.empty()) {
        j["topics"] = ordered_json::object();
        for (const auto& [topic, tally] : report.topics) {
            double denom = static_cast<double>(tally.facts + tally.errors);
            ordered_json t;
            t["facts"] = tally.facts;
            t["errors"] = tally.errors;
            if (denom > 0) t["pct_facts"] = static_cast<double>(tally.facts) / denom;
            else t["pct_facts"] = nullptr;
            j["topics"][topic] = std::move(t);
        }
    }
    if (!report.warnings.empty()) j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

}  // namespace fence
