#include "fence/serialize.hpp"

#include <fstream>

#include "fence/hash.hpp"
#include "json_convert.hpp"

namespace fence {

using nlohmann::ordered_json;

namespace {

ordered_json parse_line(const std::string& line, const char* what) {
    try {
        return ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed ") + what + " record: " + e.what());
    }
}

}  // namespace

ordered_json lineage_to_json(const Lineage& lineage) {
    ordered_json j;
    j["kind"] = lineage.kind == Lineage::Kind::original ? "original" : "revised";
    j["sample_index"] = lineage.sample_index;
    if (lineage.kind == Lineage::Kind::revised) {
        j["parent"] = lineage.parent_id;
        j["round"] = lineage.round;
    }
    return j;
}

Lineage lineage_from_json(const ordered_json& j) {
    Lineage lineage;
    lineage.kind = j.value("kind", "original") == "revised" ? Lineage::Kind::revised
                                                            : Lineage::Kind::original;
    lineage.sample_index = j.value("sample_index", 0);
    lineage.parent_id = j.value("parent", "");
    lineage.round = j.value("round", 0);
    return lineage;
}

ordered_json claim_to_json(const Claim& claim) {
    ordered_json j;
    j["id"] = claim.id;
    j["text"] = claim.text;
    if (claim.origin) {
        j["origin"] = {{"response_id", claim.origin->response_id},
                       {"passage_index", claim.origin->passage_index},
                       {"claim_index", claim.origin->claim_index}};
    }
    return j;
}

Claim claim_from_json(const ordered_json& j) {
    Claim claim;
    claim.id = j.value("id", "");
    claim.text = j.value("text", "");
    if (j.contains("origin")) {
        const auto& o = j["origin"];
        claim.origin = ClaimOrigin{o.value("response_id", ""), o.value("passage_index", 0),
                                   o.value("claim_index", 0)};
    }
    return claim;
}

ordered_json document_to_json(const EvidenceDocument& doc) {
    ordered_json j;
    j["title"] = doc.title;
    j["text"] = doc.body;
    j["origin"] = std::string(to_string(doc.origin));
    j["chunk_index"] = doc.chunk_index;
    if (doc.retrieval_score) j["score"] = *doc.retrieval_score;
    return j;
}

EvidenceDocument document_from_json(const ordered_json& j) {
    EvidenceDocument doc;
    doc.title = j.value("title", "");
    doc.body = j.contains("text") ? j.value("text", "") : j.value("body", "");
    doc.origin = parse_doc_origin(j.value("origin", "dataset")).value_or(DocOrigin::dataset);
    doc.chunk_index = j.value("chunk_index", 0);
    if (j.contains("score") && !j["score"].is_null()) {
        doc.retrieval_score = j["score"].get<double>();
    }
    return doc;
}

ordered_json verdict_to_json(const ClaimVerdict& verdict) {
    ordered_json j;
    j["claim"] = claim_to_json(verdict.claim);
    j["label"] = std::string(to_string(verdict.judgment.label));
    j["critique"] = verdict.judgment.critique;
    j["raw_output"] = verdict.judgment.raw_output;
    if (verdict.judgment.parse_failed) j["parse_failed"] = true;
    if (verdict.familiarity) j["familiarity"] = std::string(to_string(*verdict.familiarity));
    j["action"] = std::string(to_string(verdict.action));
    if (verdict.flag != VerdictFlag::none) j["flag"] = std::string(to_string(verdict.flag));
    return j;
}

ClaimVerdict verdict_from_json(const ordered_json& j) {
    ClaimVerdict verdict;
    verdict.claim = claim_from_json(j.value("claim", ordered_json::object()));
    verdict.judgment.label =
        parse_judgment_label(j.value("label", "unverified")).value_or(JudgmentLabel::Unverified);
    verdict.judgment.critique = j.value("critique", "");
    verdict.judgment.raw_output = j.value("raw_output", "");
    verdict.judgment.parse_failed = j.value("parse_failed", false);
    if (j.contains("familiarity")) {
        std::string f = j["familiarity"].get<std::string>();
        if (f == "true") verdict.familiarity = FamiliarityVerdict::True;
        else if (f == "false") verdict.familiarity = FamiliarityVerdict::False;
        else verdict.familiarity = FamiliarityVerdict::Unknown;
    }
    verdict.action = parse_verdict_action(j.value("action", "keep")).value_or(VerdictAction::keep);
    verdict.flag = parse_verdict_flag(j.value("flag", "none")).value_or(VerdictFlag::none);
    return verdict;
}

ordered_json candidate_to_json(const CandidateResponse& response) {
    ordered_json j;
    j["id"] = response.id;
    j["prompt_id"] = response.prompt_id;
    j["lineage"] = lineage_to_json(response.lineage);
    j["passages"] = ordered_json::array();
    for (const Passage& passage : response.passages) {
        ordered_json p;
        p["index"] = passage.index;
        p["text"] = passage.text;
        if (passage.removed) p["removed"] = true;
        j["passages"].push_back(std::move(p));
    }
    j["verdicts"] = ordered_json::array();
    for (const ClaimVerdict& verdict : response.verdicts) {
        j["verdicts"].push_back(verdict_to_json(verdict));
    }
    if (response.score) j["score"] = *response.score;
    j["refused"] = response.refused;
    return j;
}

CandidateResponse candidate_from_json(const ordered_json& j) {
    CandidateResponse response;
    response.id = j.value("id", "");
    response.prompt_id = j.value("prompt_id", "");
    response.lineage = lineage_from_json(j.value("lineage", ordered_json::object()));
    for (const auto& p : j.value("passages", ordered_json::array())) {
        response.passages.push_back(
            {p.value("index", 0), p.value("text", ""), p.value("removed", false)});
    }
    for (const auto& v : j.value("verdicts", ordered_json::array())) {
        response.verdicts.push_back(verdict_from_json(v));
    }
    if (j.contains("score") && !j["score"].is_null()) {
        response.score = j["score"].get<double>();
    }
    response.refused = j.value("refused", false);
    return response;
}

std::string to_json_line(const CandidateResponse& response) {
    return candidate_to_json(response).dump();
}

CandidateResponse candidate_from_json_line(const std::string& line) {
    return candidate_from_json(parse_line(line, "candidate"));
}

std::string to_json_line(const JudgmentExample& example) {
    ordered_json j;
    j["id"] = example.id;
    j["claim"] = example.claim.text;
    for (const EvidenceDocument& doc : example.documents) {
        if (doc.origin == DocOrigin::dataset) {
            j["document"] = {{"title", doc.title}, {"text", doc.body}};
            break;
        }
    }
    j["label"] = to_string(example.gt_label);
    j["dataset"] = example.provenance;
    if (example.critique) j["critique"] = *example.critique;
    if (example.augmented_label) {
        j["augmented_label"] = std::string(to_string(*example.augmented_label));
    }
    j["documents"] = ordered_json::array();
    for (const EvidenceDocument& doc : example.documents) {
        j["documents"].push_back(document_to_json(doc));
    }
    if (example.judge_raw_output) j["judge_raw_output"] = *example.judge_raw_output;
    if (example.judge_fingerprint) j["judge_fingerprint"] = to_hex(*example.judge_fingerprint);
    return j.dump();
}

JudgmentExample example_from_json_line(const std::string& line) {
    ordered_json j = parse_line(line, "judgment example");
    JudgmentExample example;
    example.id = j.value("id", "");
    if (example.id.empty()) throw IoError("judgment example without id");
    example.claim.text = j.value("claim", "");
    example.claim.id = make_claim_id(example.id, 0, 0, example.claim.text);
    example.provenance = j.value("dataset", "");

    auto gt = parse_ground_truth(j.contains("label") && j["label"].is_number_integer()
                                     ? std::to_string(j["label"].get<long>())
                                     : j.value("label", ""));
    if (!gt) throw IoError("judgment example " + example.id + " has no parseable label");
    example.gt_label = *gt;

    if (j.contains("documents") && !j["documents"].empty()) {
        for (const auto& d : j["documents"]) {
            example.documents.push_back(document_from_json(d));
        }
    } else if (j.contains("document")) {
        EvidenceDocument doc = document_from_json(j["document"]);
        doc.origin = DocOrigin::dataset;
        example.documents.push_back(std::move(doc));
    }

    if (j.contains("critique")) example.critique = j["critique"].get<std::string>();
    if (j.contains("augmented_label")) {
        example.augmented_label = parse_judgment_label(j["augmented_label"].get<std::string>());
    }
    if (j.contains("judge_raw_output")) {
        example.judge_raw_output = j["judge_raw_output"].get<std::string>();
    }
    return example;
}

std::string to_json_line(const RevisionTrace& trace) {
    ordered_json j;
    j["response_id"] = trace.response_id;
    j["prompt_id"] = trace.prompt_id;
    j["round"] = trace.round;
    if (trace.truncated) j["truncated"] = true;
    j["verdicts"] = ordered_json::array();
    for (const ClaimVerdict& verdict : trace.verdicts) {
        j["verdicts"].push_back(verdict_to_json(verdict));
    }
    j["passages"] = ordered_json::array();
    for (const PassageTrace& passage : trace.passages) {
        j["passages"].push_back({{"index", passage.index},
                                 {"before", passage.before},
                                 {"after", passage.after},
                                 {"modified", passage.modified}});
    }
    return j.dump();
}

BenchmarkRecord benchmark_record_from_json_line(const std::string& line) {
    ordered_json j = parse_line(line, "benchmark");
    BenchmarkRecord record;
    record.id = j.contains("id") && j["id"].is_number_integer()
                    ? std::to_string(j["id"].get<long>())
                    : j.value("id", "");
    record.subset = j.value("subset", "default");
    record.claim.text = j.value("claim", "");
    record.claim.id = make_claim_id(record.id, 0, 0, record.claim.text);

    auto add_document = [&](const ordered_json& d) {
        if (d.is_string()) {
            record.documents.push_back(
                {"document", d.get<std::string>(), DocOrigin::dataset, 0, std::nullopt});
        } else {
            record.documents.push_back(document_from_json(d));
        }
    };
    if (j.contains("document")) {
        if (j["document"].is_array()) {
            for (const auto& d : j["document"]) add_document(d);
        } else {
            add_document(j["document"]);
        }
    }
    if (record.documents.empty()) {
        throw IoError("benchmark record " + record.id + " has no document");
    }

    if (!j.contains("label") || !j["label"].is_number_integer()) {
        throw IoError("benchmark record " + record.id + " needs an integer label in {1,0}");
    }
    long label = j["label"].get<long>();
    if (label != 0 && label != 1) {
        throw IoError("benchmark record " + record.id + " has label outside {1,0}");
    }
    record.gt = label == 1 ? BinaryLabel::Factual : BinaryLabel::NonFactual;
    return record;
}

std::string stats_to_json(const AugmentationStats& stats) {
    ordered_json j;
    j["total"] = stats.total;
    j["critique_kept"] = stats.critique_kept;
    j["critique_discarded"] = stats.critique_discarded;
    j["tooldoc_kept"] = stats.tooldoc_kept;
    j["tooldoc_skipped"] = stats.tooldoc_skipped;
    return j.dump(2) + "\n";
}

std::string report_to_json(const BenchmarkReport& report) {
    ordered_json j;
    j["per_subset"] = ordered_json::object();
    for (const auto& [name, subset] : report.per_subset) {
        ordered_json s;
        s["tp"] = subset.counts.tp;
        s["tn"] = subset.counts.tn;
        s["fp"] = subset.counts.fp;
        s["fn"] = subset.counts.fn;
        if (subset.bacc) s["bacc"] = *subset.bacc;
        else s["bacc"] = nullptr;
        if (!subset.note.empty()) s["note"] = subset.note;
        j["per_subset"][name] = std::move(s);
    }
    if (report.average) j["average"] = *report.average;
    else j["average"] = nullptr;
    j["parse_failures"] = report.parse_failures;
    return j.dump(2) + "\n";
}

std::vector<std::string> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace fence
