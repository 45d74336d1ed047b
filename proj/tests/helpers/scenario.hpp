#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fence/evidence.hpp"
#include "fence/mock.hpp"
#include "fence/revision.hpp"

namespace fence::testing {

// One MockBook plus the standard mocked clients and a search-fixture-backed
// retriever. The scripting helpers compute the same prompts the pipeline
// computes, so scenarios stay byte-exact without hand-writing fingerprints.
class MockRig {
public:
    explicit MockRig(std::filesystem::path root, RetrievalConfig config = {});
    ~MockRig();
    MockRig(const MockRig&) = delete;
    MockRig& operator=(const MockRig&) = delete;

    MockBook& book() { return *book_; }
    std::shared_ptr<MockBook> book_ptr() { return book_; }

    ChatClient& instruction() { return *instruction_; }
    ChatClient& evaluator() { return *evaluator_; }
    ChatClient& generator() { return *generator_; }
    EmbedClient& embedder() { return *embedder_; }
    EvidenceRetriever& retriever() { return *retriever_; }
    RevisionClients clients();

    // Fresh clients and retriever over the same book and fixtures: zeroed
    // call counters and a cold provider cache, like a new process.
    void reset_clients();

    const std::filesystem::path& search_fixture_dir() const { return search_dir_; }

    // ---- scripting -----------------------------------------------------

    void script_generation(const std::string& prompt, int n, double temperature,
                           std::vector<std::string> responses);
    void script_decompose(const std::string& passage_text, std::vector<std::string> claims);
    // scripts the search-query generation and writes the fixture the query hits
    void script_search(const std::string& claim_text, const std::string& query,
                       std::vector<std::pair<std::string, std::string>> title_snippets);
    // runs retrieval exactly as the pipeline will and scripts the verdict;
    // returns the documents the judge will see
    std::vector<EvidenceDocument> script_judgment(const std::string& claim_text,
                                                  JudgmentLabel label,
                                                  const std::string& critique,
                                                  BackendRole role = BackendRole::evaluator);
    // judgment against explicit documents (no retrieval), e.g. dataset docs
    void script_judgment_docs(const std::string& claim_text,
                              const std::vector<EvidenceDocument>& docs, JudgmentLabel label,
                              const std::string& critique, int num_samples = 1,
                              double temperature = 0.0,
                              BackendRole role = BackendRole::evaluator);
    void script_familiarity(const std::string& claim_text, const std::string& answer);
    void script_edit(const std::string& passage_before, const std::string& claim_text,
                     const std::string& critique, const std::string& passage_after);
    void script_remove(const std::string& passage_before, const std::string& claim_text,
                       const std::string& passage_after);
    void script_continuation(const std::string& prompt, const std::string& prefix_text,
                             const std::string& next_passage);

    static Claim claim_of(const std::string& text);

private:
    std::filesystem::path root_;
    std::filesystem::path search_dir_;
    RetrievalConfig config_;
    std::shared_ptr<MockBook> book_;
    std::unique_ptr<MockChatClient> instruction_;
    std::unique_ptr<MockChatClient> evaluator_;
    std::unique_ptr<MockChatClient> generator_;
    std::unique_ptr<MockEmbedClient> embedder_;
    std::vector<std::shared_ptr<EvidenceProvider>> providers_;
    std::unique_ptr<EvidenceRetriever> retriever_;
};

// The fully mocked two-prompt, N=2, k=2, one-round scenario the end-to-end
// golden test drives through the CLI. Creates prompts.txt, fence.conf,
// mock_script.json and search fixtures under root.
struct E2EScenario {
    std::filesystem::path root;
    std::filesystem::path config_path;
    std::filesystem::path prompts_path;
    std::filesystem::path script_path;
};

E2EScenario write_e2e_scenario(const std::filesystem::path& root);

}  // namespace fence::testing
