#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fence/preference.hpp"
#include "fence/revision.hpp"

namespace fence {

// Directory of JSONL files keyed by prompt id, plus a manifest. A prompt's
// files appear under their final names only after a completed save, so
// interrupted runs resume by skipping completed prompts.
//
//   <dir>/manifest.json
//   <dir>/candidates/<prompt_id>.jsonl
//   <dir>/traces/<prompt_id>.jsonl
class CandidateStore {
public:
    explicit CandidateStore(std::filesystem::path dir);

    bool completed(const std::string& prompt_id) const;

    void save_prompt(const std::string& prompt_id, const std::string& prompt_text,
                     std::span<const CandidateResponse> candidates,
                     std::span<const RevisionTrace> traces);

    PromptBatch load_prompt(const std::string& prompt_id) const;
    std::vector<PromptBatch> load_all() const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    void write_manifest() const;
    void read_manifest();

    std::filesystem::path dir_;
    // (prompt_id, prompt_text, num_candidates); insertion order preserved.
    std::vector<std::tuple<std::string, std::string, long>> entries_;
};

// Stable id for a prompt: "p" + content hash, so re-runs are idempotent.
std::string make_prompt_id(const std::string& prompt_text);

std::vector<std::string> read_prompt_file(const std::filesystem::path& path);

// Writes content to path via a temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fence
