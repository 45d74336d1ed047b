#pragma once

#include <string>
#include <vector>

#include "fence/augment.hpp"
#include "fence/evaluator.hpp"
#include "fence/model.hpp"
#include "fence/revision.hpp"

namespace fence {

// JSON Lines converters. Readers throw IoError on malformed records.

std::string to_json_line(const CandidateResponse& response);
CandidateResponse candidate_from_json_line(const std::string& line);

// Input records look like {id, claim, document:{title,text}, label, dataset};
// augmented output adds {critique, augmented_label, documents:[...]}. The
// reader accepts both.
std::string to_json_line(const JudgmentExample& example);
JudgmentExample example_from_json_line(const std::string& line);

std::string to_json_line(const RevisionTrace& trace);

// {id, subset, claim, document, label in {1,0}}; document may be a string,
// a {title,text} object, or an array of either.
BenchmarkRecord benchmark_record_from_json_line(const std::string& line);

std::string stats_to_json(const AugmentationStats& stats);

std::string report_to_json(const BenchmarkReport& report);

std::vector<std::string> read_jsonl_file(const std::string& path);

}  // namespace fence
