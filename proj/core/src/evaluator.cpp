#include "fence/evaluator.hpp"

#include <atomic>
#include <cstdio>

#include "fence/parallel.hpp"
#include "fence/prompts.hpp"

namespace fence {

double balanced_accuracy(const ConfusionCounts& counts) {
    if (counts.tp < 0 || counts.tn < 0 || counts.fp < 0 || counts.fn < 0) {
        throw PreconditionError("confusion counts must be non-negative");
    }
    long positives = counts.tp + counts.fn;
    long negatives = counts.tn + counts.fp;
    if (positives < 1 || negatives < 1) {
        throw DegenerateDataset("balanced accuracy needs both classes present (" +
                                std::to_string(positives) + " positives, " +
                                std::to_string(negatives) + " negatives)");
    }
    double recall_pos = static_cast<double>(counts.tp) / static_cast<double>(positives);
    double recall_neg = static_cast<double>(counts.tn) / static_cast<double>(negatives);
    return 0.5 * (recall_pos + recall_neg);
}

Judgment judge(ChatClient& evaluator, const Claim& claim,
               std::span<const EvidenceDocument> docs, int token_budget) {
    if (docs.empty()) throw PreconditionError("judge requires at least one document");
    ChatRequest request = prompts::judgment_request(claim, docs, 1, 0.0, token_budget);
    std::string completion = evaluator.chat(request).front();
    try {
        return prompts::parse_judgment(completion);
    } catch (const ParseFailure&) {
    }
    std::string retry = evaluator.chat(prompts::judgment_retry_request(request)).front();
    try {
        return prompts::parse_judgment(retry);
    } catch (const ParseFailure&) {
        // Conservative fallback: unparseable means not verified.
        return Judgment{"", JudgmentLabel::Unverified, retry, true};
    }
}

BenchmarkReport run_benchmark(ChatClient& evaluator,
                              std::span<const BenchmarkRecord> records,
                              int workers, int token_budget) {
    struct RowResult {
        std::string subset;
        BinaryLabel predicted = BinaryLabel::Factual;
        BinaryLabel gt = BinaryLabel::Factual;
        bool parse_failed = false;
    };
    std::vector<RowResult> rows(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const BenchmarkRecord& record = records[i];
        Judgment j = judge(evaluator, record.claim, record.documents, token_budget);
        rows[i] = {record.subset, map_to_binary(j.label), record.gt, j.parse_failed};
    });

    BenchmarkReport report;
    for (const RowResult& row : rows) {
        SubsetResult& subset = report.per_subset[row.subset];
        if (row.parse_failed) ++report.parse_failures;
        bool predicted_positive = row.predicted == BinaryLabel::Factual;
        bool actually_positive = row.gt == BinaryLabel::Factual;
        if (predicted_positive && actually_positive) ++subset.counts.tp;
        else if (predicted_positive && !actually_positive) ++subset.counts.fp;
        else if (!predicted_positive && actually_positive) ++subset.counts.fn;
        else ++subset.counts.tn;
    }

    double sum = 0.0;
    long scored = 0;
    for (auto& [name, subset] : report.per_subset) {
        try {
            subset.bacc = balanced_accuracy(subset.counts);
            sum += *subset.bacc;
            ++scored;
        } catch (const DegenerateDataset& e) {
            subset.note = e.what();
        }
    }
    if (scored > 0) report.average = sum / static_cast<double>(scored);
    return report;
}

std::string render_report_table(const BenchmarkReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %6s %6s %6s %6s %8s\n", "subset", "tp",
                  "tn", "fp", "fn", "bacc");
    out += line;
    for (const auto& [name, subset] : report.per_subset) {
        if (subset.bacc) {
            std::snprintf(line, sizeof(line), "%-24s %6ld %6ld %6ld %6ld %8.4f\n",
                          name.c_str(), subset.counts.tp, subset.counts.tn,
                          subset.counts.fp, subset.counts.fn, *subset.bacc);
        } else {
            std::snprintf(line, sizeof(line), "%-24s %6ld %6ld %6ld %6ld %8s\n",
                          name.c_str(), subset.counts.tp, subset.counts.tn,
                          subset.counts.fp, subset.counts.fn, "degen");
        }
        out += line;
    }
    if (report.average) {
        std::snprintf(line, sizeof(line), "%-24s %34s %8.4f\n", "average", "", *report.average);
        out += line;
    }
    if (report.parse_failures > 0) {
        std::snprintf(line, sizeof(line), "parse failures: %ld\n", report.parse_failures);
        out += line;
    }
    return out;
}

}  // namespace fence
