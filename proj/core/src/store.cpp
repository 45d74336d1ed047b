#include "fence/store.hpp"

#include <fstream>

#include "fence/hash.hpp"
#include "fence/serialize.hpp"
#include "fence/text.hpp"
#include "json_convert.hpp"

namespace fence {

using nlohmann::ordered_json;

std::string make_prompt_id(const std::string& prompt_text) {
    return "p" + to_hex(fnv1a64(collapse_ws(prompt_text)));
}

std::vector<std::string> read_prompt_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open prompt file: " + path.string());
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(in, line)) {
        std::string prompt = std::string(trim(line));
        if (!prompt.empty()) prompts.push_back(std::move(prompt));
    }
    return prompts;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary);
        if (!out) throw IoError("cannot open " + temp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(temp, ec);
            throw IoError("write to " + temp.string() + " failed");
        }
    }
    std::filesystem::rename(temp, path);
}

CandidateStore::CandidateStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_ / "candidates");
    std::filesystem::create_directories(dir_ / "traces");
    read_manifest();
}

void CandidateStore::read_manifest() {
    std::ifstream in(dir_ / "manifest.json");
    if (!in) return;
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed store manifest: " + std::string(e.what()));
    }
    ordered_json prompts = manifest.value("prompts", ordered_json::object());
    for (const auto& [prompt_id, entry] : prompts.items()) {
        entries_.emplace_back(prompt_id, entry.value("prompt", ""),
                              entry.value("num_candidates", 0L));
    }
}

void CandidateStore::write_manifest() const {
    ordered_json manifest;
    manifest["prompts"] = ordered_json::object();
    for (const auto& [prompt_id, prompt_text, count] : entries_) {
        manifest["prompts"][prompt_id] = {{"prompt", prompt_text},
                                          {"num_candidates", count}};
    }
    write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

bool CandidateStore::completed(const std::string& prompt_id) const {
    for (const auto& [id, text, count] : entries_) {
        if (id == prompt_id) return true;
    }
    return false;
}

void CandidateStore::save_prompt(const std::string& prompt_id, const std::string& prompt_text,
                                 std::span<const CandidateResponse> candidates,
                                 std::span<const RevisionTrace> traces) {
    std::string candidate_lines;
    for (const CandidateResponse& candidate : candidates) {
        candidate_lines += to_json_line(candidate) + "\n";
    }
    std::string trace_lines;
    for (const RevisionTrace& trace : traces) {
        trace_lines += to_json_line(trace) + "\n";
    }
    write_file_atomic(dir_ / "candidates" / (prompt_id + ".jsonl"), candidate_lines);
    write_file_atomic(dir_ / "traces" / (prompt_id + ".jsonl"), trace_lines);

    for (auto& [id, text, count] : entries_) {
        if (id == prompt_id) {
            text = prompt_text;
            count = static_cast<long>(candidates.size());
            write_manifest();
            return;
        }
    }
    entries_.emplace_back(prompt_id, prompt_text, static_cast<long>(candidates.size()));
    write_manifest();
}

PromptBatch CandidateStore::load_prompt(const std::string& prompt_id) const {
    PromptBatch batch;
    batch.prompt_id = prompt_id;
    for (const auto& [id, text, count] : entries_) {
        if (id == prompt_id) batch.prompt = text;
    }
    auto path = dir_ / "candidates" / (prompt_id + ".jsonl");
    for (const std::string& line : read_jsonl_file(path.string())) {
        batch.candidates.push_back(candidate_from_json_line(line));
    }
    return batch;
}

std::vector<PromptBatch> CandidateStore::load_all() const {
    std::vector<PromptBatch> batches;
    batches.reserve(entries_.size());
    for (const auto& [prompt_id, text, count] : entries_) {
        batches.push_back(load_prompt(prompt_id));
    }
    return batches;
}

}  // namespace fence
