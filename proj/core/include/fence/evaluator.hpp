#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/model.hpp"

namespace fence {

struct ConfusionCounts {
    long tp = 0;
    long tn = 0;
    long fp = 0;
    long fn = 0;

    long total() const { return tp + tn + fp + fn; }
};

// Mean of the two per-class recalls, positive class = Factual.
// Throws DegenerateDataset when a class is absent.
double balanced_accuracy(const ConfusionCounts& counts);

struct BenchmarkRecord {
    std::string id;
    std::string subset;
    Claim claim;
    std::vector<EvidenceDocument> documents;
    BinaryLabel gt = BinaryLabel::Factual;
};

struct SubsetResult {
    ConfusionCounts counts;
    std::optional<double> bacc;  // absent for degenerate subsets
    std::string note;
};

struct BenchmarkReport {
    std::map<std::string, SubsetResult> per_subset;
    std::optional<double> average;  // unweighted mean over subsets with a BAcc
    long parse_failures = 0;
};

// One deterministic completion over the rendered documents and claim, parsed
// into critique + label. An unparseable completion is retried once with a
// format reminder; a second failure falls back to Unverified with an empty
// critique and parse_failed set, so batch runs stay total.
Judgment judge(ChatClient& evaluator, const Claim& claim,
               std::span<const EvidenceDocument> docs, int token_budget = 6000);

// Judges every record, bridges ternary predictions to binary, tallies
// confusion per subset, and averages BAcc over non-degenerate subsets.
BenchmarkReport run_benchmark(ChatClient& evaluator,
                              std::span<const BenchmarkRecord> records,
                              int workers = 4, int token_budget = 6000);

std::string render_report_table(const BenchmarkReport& report);

}  // namespace fence
