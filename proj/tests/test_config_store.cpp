#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fence/config.hpp"
#include "fence/serialize.hpp"
#include "fence/store.hpp"

using namespace fence;

TEST_CASE("parse_config: defaults and key overrides") {
    PipelineConfig config = parse_config(
        "# comment line\n"
        "n = 5\n"
        "k = 3\n"
        "seed = 42\n"
        "out_dir = /tmp/fence-out\n"
        "profile.evaluator.model = judge-8b\n"
        "profile.evaluator.endpoint = http://localhost:9000/v1\n"
        "budget.evaluator = 1000\n"
        "retrieval.chunk_size = 256\n"
        "revision.max_rounds = 2\n"
        "topics = early life, career, awards\n");
    CHECK(config.n_candidates == 5);
    CHECK(config.top_k == 3);
    CHECK(config.seed == 42);
    CHECK(config.out_dir == std::filesystem::path("/tmp/fence-out"));
    CHECK(config.evaluator.model_name == "judge-8b");
    CHECK(config.evaluator.endpoint == "http://localhost:9000/v1");
    CHECK(config.budget_evaluator == 1000);
    CHECK(config.retrieval.chunk_size == 256);
    CHECK(config.revision.max_rounds == 2);
    CHECK(config.topics == std::vector<std::string>{"early life", "career", "awards"});
    validate(config);
}

TEST_CASE("parse_config: unknown keys and malformed lines are rejected") {
    CHECK_THROWS_AS(parse_config("nonsense_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line without equals\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n = not_a_number\n"), ConfigError);
}

TEST_CASE("validate: rejects every invariant violation before any backend call") {
    PipelineConfig config = parse_config("n = 2\nk = 5\n");
    CHECK_THROWS_AS(validate(config), ConfigError);  // k > 2N

    config = parse_config("n = 0\n");
    CHECK_THROWS_AS(validate(config), ConfigError);

    config = parse_config("revision.max_rounds = 0\n");
    CHECK_THROWS_AS(validate(config), ConfigError);

    config = parse_config("retrieval.rerank_top_n = 0\n");
    CHECK_THROWS_AS(validate(config), ConfigError);

    config = parse_config("profile.generator.retry_limit = 11\n");
    CHECK_THROWS_AS(validate(config), ConfigError);
}

TEST_CASE("parse_config: environment variables fill endpoint gaps") {
    setenv("FENCE_LLM_ENDPOINT", "http://llm.test/v1", 1);
    setenv("FENCE_EMBED_ENDPOINT", "http://embed.test/v1", 1);
    setenv("FENCE_WIKI_SNAPSHOT_DIR", "/snapshots/wiki", 1);
    PipelineConfig config = parse_config("profile.generator.endpoint = http://gen.test\n");
    CHECK(config.instruction.endpoint == "http://llm.test/v1");
    CHECK(config.generator.endpoint == "http://gen.test");  // explicit wins
    CHECK(config.embedder.endpoint == "http://embed.test/v1");
    CHECK(config.providers.wiki_snapshot_dir == "/snapshots/wiki");
    unsetenv("FENCE_LLM_ENDPOINT");
    unsetenv("FENCE_EMBED_ENDPOINT");
    unsetenv("FENCE_WIKI_SNAPSHOT_DIR");
}

TEST_CASE("judgment example serialization: input format round trip") {
    std::string line = R"({"id":"xs-17","claim":"The plant opened in 1994.",)"
                       R"("document":{"title":"News","text":"The plant opened in 1996."},)"
                       R"("label":"non-factual","dataset":"xsum-h"})";
    JudgmentExample example = example_from_json_line(line);
    CHECK(example.id == "xs-17");
    CHECK(example.claim.text == "The plant opened in 1994.");
    REQUIRE(example.documents.size() == 1);
    CHECK(example.documents[0].origin == DocOrigin::dataset);
    CHECK(std::get<BinaryLabel>(example.gt_label) == BinaryLabel::NonFactual);
    CHECK(example.provenance == "xsum-h");

    example.critique = "The document says 1996.";
    example.augmented_label = JudgmentLabel::Contradictory;
    JudgmentExample reloaded = example_from_json_line(to_json_line(example));
    CHECK(reloaded.critique == example.critique);
    CHECK(reloaded.augmented_label == JudgmentLabel::Contradictory);
    CHECK(reloaded.documents.size() == 1);
    CHECK(validate(reloaded));
}

TEST_CASE("judgment example serialization: numeric labels and missing fields") {
    JudgmentExample numeric = example_from_json_line(
        R"({"id":"n1","claim":"c","document":{"title":"t","text":"d"},"label":1,"dataset":"s"})");
    CHECK(std::get<BinaryLabel>(numeric.gt_label) == BinaryLabel::Factual);

    CHECK_THROWS_AS(example_from_json_line(R"({"claim":"no id","label":1})"), IoError);
    CHECK_THROWS_AS(example_from_json_line(R"({"id":"x","claim":"c","label":"weird"})"),
                    IoError);
    CHECK_THROWS_AS(example_from_json_line("not json at all"), IoError);
}

TEST_CASE("benchmark record serialization: string, object and array documents") {
    BenchmarkRecord from_string = benchmark_record_from_json_line(
        R"({"id":"b1","subset":"wice","claim":"c","document":"plain text","label":1})");
    REQUIRE(from_string.documents.size() == 1);
    CHECK(from_string.documents[0].body == "plain text");
    CHECK(from_string.gt == BinaryLabel::Factual);

    BenchmarkRecord from_array = benchmark_record_from_json_line(
        R"({"id":"b2","subset":"wice","claim":"c",)"
        R"("document":[{"title":"t1","text":"d1"},{"title":"t2","text":"d2"}],"label":0})");
    CHECK(from_array.documents.size() == 2);
    CHECK(from_array.gt == BinaryLabel::NonFactual);

    CHECK_THROWS_AS(benchmark_record_from_json_line(
                        R"({"id":"b3","subset":"s","claim":"c","document":"d","label":2})"),
                    IoError);
    CHECK_THROWS_AS(benchmark_record_from_json_line(
                        R"({"id":"b4","subset":"s","claim":"c","label":1})"),
                    IoError);
}

TEST_CASE("candidate serialization: full round trip") {
    CandidateResponse response;
    response.id = "p1.s0.r1";
    response.prompt_id = "p1";
    response.lineage = {Lineage::Kind::revised, 0, "p1.s0", 1};
    response.passages = {{0, "First passage.", false}, {1, "", true}};
    ClaimVerdict verdict;
    verdict.claim = {"cid", "claim text", ClaimOrigin{"p1.s0", 0, 0}};
    verdict.judgment = {"critique text", JudgmentLabel::Contradictory, "raw", false};
    verdict.familiarity = FamiliarityVerdict::False;
    verdict.action = VerdictAction::edit;
    response.verdicts = {verdict};
    response.score = 0.5;

    CandidateResponse reloaded = candidate_from_json_line(to_json_line(response));
    CHECK(reloaded.id == response.id);
    CHECK(reloaded.lineage.kind == Lineage::Kind::revised);
    CHECK(reloaded.lineage.parent_id == "p1.s0");
    CHECK(reloaded.lineage.round == 1);
    REQUIRE(reloaded.passages.size() == 2);
    CHECK(reloaded.passages[1].removed);
    REQUIRE(reloaded.verdicts.size() == 1);
    CHECK(reloaded.verdicts[0].judgment.label == JudgmentLabel::Contradictory);
    CHECK(reloaded.verdicts[0].familiarity == FamiliarityVerdict::False);
    CHECK(reloaded.verdicts[0].action == VerdictAction::edit);
    CHECK(reloaded.verdicts[0].claim.origin->passage_index == 0);
    CHECK(reloaded.score == 0.5);
}

TEST_CASE("candidate store: save, resume and reload") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fence_store_test";
    fs::remove_all(dir);

    CandidateStore store(dir);
    CHECK_FALSE(store.completed("p1"));

    CandidateResponse candidate;
    candidate.id = "p1.s0";
    candidate.prompt_id = "p1";
    candidate.passages = {{0, "text", false}};
    candidate.score = 1.0;
    RevisionTrace trace;
    trace.response_id = "p1.s0";
    trace.prompt_id = "p1";
    trace.round = 1;

    std::vector<CandidateResponse> candidates = {candidate};
    std::vector<RevisionTrace> traces = {trace};
    store.save_prompt("p1", "the prompt", candidates, traces);
    CHECK(store.completed("p1"));

    // a new store instance over the same directory sees the completed prompt
    CandidateStore reopened(dir);
    CHECK(reopened.completed("p1"));
    auto batches = reopened.load_all();
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].prompt == "the prompt");
    REQUIRE(batches[0].candidates.size() == 1);
    CHECK(batches[0].candidates[0].id == "p1.s0");
    CHECK(fs::exists(dir / "traces" / "p1.jsonl"));
    fs::remove_all(dir);
}

TEST_CASE("make_prompt_id: stable under whitespace normalization") {
    CHECK(make_prompt_id("Tell me a bio of X.") == make_prompt_id("Tell me a bio of X."));
    CHECK(make_prompt_id("Tell me a bio of X.") == make_prompt_id("Tell  me a bio\tof X."));
    CHECK(make_prompt_id("a") != make_prompt_id("b"));
    CHECK(make_prompt_id("x").front() == 'p');
}

TEST_CASE("read_prompt_file: skips blank lines, errors on missing file") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "fence_prompts.txt";
    {
        std::ofstream out(path);
        out << "first prompt\n\n  \nsecond prompt\n";
    }
    auto prompts = read_prompt_file(path);
    CHECK(prompts == std::vector<std::string>{"first prompt", "second prompt"});
    fs::remove(path);
    CHECK_THROWS_AS(read_prompt_file(path), IoError);
}

TEST_CASE("write_file_atomic: no temp file survives a successful write") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "fence_atomic.txt";
    write_file_atomic(path, "payload");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "payload");
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    fs::remove(path);
}

TEST_CASE("parse_config: negative budgets and seeds are rejected") {
    CHECK_THROWS_AS(parse_config("budget.evaluator = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = -3\n"), ConfigError);
}
