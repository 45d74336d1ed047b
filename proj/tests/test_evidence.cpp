#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fence/evidence.hpp"
#include "fence/mock.hpp"
#include "fence/prompts.hpp"
#include "fence/text.hpp"

using namespace fence;

namespace {

BackendProfile instruction_profile() {
    return {BackendRole::instruction_model, "mock:", "m", 2, std::chrono::milliseconds{1000}};
}

BackendProfile embed_profile() {
    return {BackendRole::embedder, "mock:", "m", 2, std::chrono::milliseconds{1000}};
}

std::string random_words(std::mt19937& rng, std::size_t count) {
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> space(0, 3);
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i > 0) {
            out += ' ';
            // occasionally multiple spaces, tabs, newlines
            int extra = space(rng);
            if (extra == 1) out += "  ";
            if (extra == 2) out += '\t';
            if (extra == 3) out += '\n';
        }
        int l = len(rng);
        for (int c = 0; c < l; ++c) out += static_cast<char>('a' + rng() % 26);
    }
    return out;
}

EvidenceDocument doc(const std::string& title, const std::string& body,
                     DocOrigin origin = DocOrigin::search) {
    return {title, body, origin, 0, std::nullopt};
}

}  // namespace

TEST_CASE("chunk_text: 1000-token text at size 512 gives chunks of 512 and 488") {
    std::mt19937 rng(3);
    std::string text = random_words(rng, 1000);
    auto chunks = chunk_text(text, 512);
    REQUIRE(chunks.size() == 2);
    CHECK(count_ws_tokens(chunks[0]) == 512);
    CHECK(count_ws_tokens(chunks[1]) == 488);
}

TEST_CASE("chunk_text: short input is one chunk, empty input is none") {
    std::mt19937 rng(4);
    std::string text = random_words(rng, 10);
    auto chunks = chunk_text(text, 512);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0] == collapse_ws(text));
    CHECK(chunk_text("", 512).empty());
    CHECK_THROWS_AS(chunk_text("x", 0), PreconditionError);
}

TEST_CASE("chunk_text: joining chunks reproduces the collapsed input") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> count(0, 300);
    std::uniform_int_distribution<int> size(1, 64);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text = random_words(rng, count(rng));
        int chunk_size = size(rng);
        auto chunks = chunk_text(text, chunk_size);
        for (const std::string& chunk : chunks) {
            CHECK(count_ws_tokens(chunk) <= static_cast<std::size_t>(chunk_size));
        }
        CHECK(collapse_ws(join(chunks, " ")) == collapse_ws(text));
    }
}

TEST_CASE("gen_search_query: extracts the query line") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c1", "Chadwick Boseman was born on November 29, 1977.", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(claim),
              {"Chadwick Boseman date of birth"});
    MockChatClient instruction(instruction_profile(), book);
    CHECK(gen_search_query(instruction, claim) == "Chadwick Boseman date of birth");
}

TEST_CASE("gen_search_query: SEARCH QUERY prefix and blank completions") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c2", "Some statement.", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(claim),
              {"SEARCH QUERY: some statement evidence"});
    MockChatClient instruction(instruction_profile(), book);
    CHECK(gen_search_query(instruction, claim) == "some statement evidence");

    Claim blank{"c3", "Another statement.", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(blank), {"\n  \n"});
    CHECK_THROWS_AS(gen_search_query(instruction, blank), ParseFailure);
}

TEST_CASE("gen_wiki_titles: dedups while preserving order") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c4", "claim text", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::wiki_titles_request(claim),
              {"- A\n- B\n- A\n"});
    MockChatClient instruction(instruction_profile(), book);
    auto titles = gen_wiki_titles(instruction, claim);
    CHECK(titles == std::vector<std::string>{"A", "B"});
}

TEST_CASE("gen_kg_entities: pass-through and empty-list failure") {
    auto book = std::make_shared<MockBook>();
    MockChatClient instruction(instruction_profile(), book);

    Claim claim{"c5", "entity claim", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::kg_entities_request(claim),
              {"X\nY"});
    CHECK(gen_kg_entities(instruction, claim) == std::vector<std::string>{"X", "Y"});

    Claim empty{"c6", "no entities", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::kg_entities_request(empty), {"NONE"});
    CHECK_THROWS_AS(gen_kg_entities(instruction, empty), ParseFailure);
}

TEST_CASE("rerank: orders by cosine similarity and keeps scores") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c7", "the claim", std::nullopt};
    book->add_embedding("the claim", {1.0, 0.0});
    book->add_embedding("body one", {0.9, std::sqrt(1 - 0.81)});   // cos 0.9
    book->add_embedding("body two", {0.2, std::sqrt(1 - 0.04)});   // cos 0.2
    book->add_embedding("body three", {0.5, std::sqrt(1 - 0.25)}); // cos 0.5
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/true);

    std::vector<EvidenceDocument> docs = {doc("d1", "body one"), doc("d2", "body two"),
                                          doc("d3", "body three")};
    auto top = rerank(embedder, claim, docs, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].title == "d1");
    CHECK(top[1].title == "d3");
    CHECK(*top[0].retrieval_score == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(*top[1].retrieval_score == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(embedder.calls() == 1);  // one batched embed call

    auto all = rerank(embedder, claim, {docs.begin(), docs.begin() + 2}, 5);
    CHECK(all.size() == 2);
}

TEST_CASE("rerank: identical embeddings preserve input order for same origin") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c8", "tie claim", std::nullopt};
    book->add_embedding("tie claim", {1.0, 0.0});
    for (const char* body : {"alpha", "beta", "gamma"}) {
        book->add_embedding(body, {0.5, 0.5});
    }
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/true);
    std::vector<EvidenceDocument> docs = {doc("a", "alpha"), doc("b", "beta"),
                                          doc("c", "gamma")};
    auto top = rerank(embedder, claim, docs, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].title == "a");
    CHECK(top[1].title == "b");
    CHECK(top[2].title == "c");
}

TEST_CASE("rerank: ties across origins break by origin declaration order") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c9", "origin tie", std::nullopt};
    book->add_embedding("origin tie", {1.0, 0.0});
    book->add_embedding("same body a", {0.7, std::sqrt(1 - 0.49)});
    book->add_embedding("same body b", {0.7, std::sqrt(1 - 0.49)});
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/true);
    std::vector<EvidenceDocument> docs = {doc("search doc", "same body a", DocOrigin::search),
                                          doc("dataset doc", "same body b", DocOrigin::dataset)};
    auto top = rerank(embedder, claim, docs, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].title == "dataset doc");  // dataset precedes search
    CHECK(top[1].title == "search doc");
}

TEST_CASE("rerank: matches the full-sort-then-truncate oracle on random sets") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> n_docs(0, 12);
    std::uniform_int_distribution<int> top_n(1, 6);
    std::uniform_int_distribution<int> origin(0, 3);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);

    for (int trial = 0; trial < 300; ++trial) {
        auto book = std::make_shared<MockBook>();
        Claim claim{"cr", "oracle claim", std::nullopt};
        book->add_embedding("oracle claim", {1.0, 0.0});

        int n = n_docs(rng);
        std::vector<EvidenceDocument> docs;
        std::vector<double> sims;
        for (int i = 0; i < n; ++i) {
            std::string body = "body " + std::to_string(trial) + "-" + std::to_string(i);
            double x = coord(rng);
            // a quarter of docs share the same similarity to force ties
            if (i % 4 == 0) x = 0.25;
            double y = std::sqrt(std::max(0.0, 1.0 - x * x));
            book->add_embedding(body, {x, y});
            docs.push_back({"t" + std::to_string(i), body,
                            static_cast<DocOrigin>(origin(rng)), 0, std::nullopt});
            sims.push_back(x);
        }
        MockEmbedClient embedder(embed_profile(), book, /*strict=*/true);
        int k = top_n(rng);
        auto ranked = rerank(embedder, claim, docs, k);

        // oracle: full stable sort of indices, then truncate
        std::vector<std::size_t> order(docs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (sims[a] != sims[b]) return sims[a] > sims[b];
            if (docs[a].origin != docs[b].origin) return docs[a].origin < docs[b].origin;
            return a < b;
        });
        std::size_t expect = std::min<std::size_t>(static_cast<std::size_t>(k), docs.size());
        REQUIRE(ranked.size() == expect);
        for (std::size_t i = 0; i < expect; ++i) {
            CHECK(ranked[i].body == docs[order[i]].body);
            if (i > 0) CHECK(*ranked[i - 1].retrieval_score >= *ranked[i].retrieval_score);
        }
    }
}

namespace {

// Counts fetches; optionally fails every call.
class ProbeProvider final : public EvidenceProvider {
public:
    ProbeProvider(ProviderKind kind, std::vector<EvidenceDocument> docs, bool fail = false)
        : kind_(kind), docs_(std::move(docs)), fail_(fail) {}
    ProviderKind kind() const override { return kind_; }
    std::vector<EvidenceDocument> fetch(const std::string&, const RetrievalConfig&) override {
        ++fetches;
        if (fail_) throw TransportError("scripted provider failure");
        return docs_;
    }
    int fetches = 0;

private:
    ProviderKind kind_;
    std::vector<EvidenceDocument> docs_;
    bool fail_;
};

}  // namespace

TEST_CASE("retrieve_evidence: one provider down still yields the live provider's docs") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c10", "resilient claim", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(claim),
              {"resilient query"});
    book->add(BackendRole::instruction_model, prompts::kg_entities_request(claim),
              {"Resilient Entity"});
    MockChatClient instruction(instruction_profile(), book);
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/false);

    auto live = std::make_shared<ProbeProvider>(
        ProviderKind::search,
        std::vector<EvidenceDocument>{doc("live", "live doc body", DocOrigin::search)});
    auto dead = std::make_shared<ProbeProvider>(ProviderKind::knowledge_graph,
                                                std::vector<EvidenceDocument>{}, true);
    EvidenceRetriever retriever(instruction, embedder, {live, dead}, RetrievalConfig{});

    auto docs = retriever.retrieve(claim);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].title == "live");
    CHECK(docs[0].origin == DocOrigin::search);
}

TEST_CASE("retrieve_evidence: every provider empty raises AllProvidersFailed") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c11", "hopeless claim", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(claim),
              {"hopeless query"});
    MockChatClient instruction(instruction_profile(), book);
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/false);

    auto empty = std::make_shared<ProbeProvider>(ProviderKind::search,
                                                 std::vector<EvidenceDocument>{});
    EvidenceRetriever retriever(instruction, embedder, {empty}, RetrievalConfig{});
    CHECK_THROWS_AS(retriever.retrieve(claim), AllProvidersFailed);
}

TEST_CASE("retrieve_evidence: repeated query hits the cache, one outbound call") {
    auto book = std::make_shared<MockBook>();
    Claim claim{"c12", "cached claim", std::nullopt};
    book->add(BackendRole::instruction_model, prompts::search_query_request(claim),
              {"cached query"});
    MockChatClient instruction(instruction_profile(), book);
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/false);

    auto provider = std::make_shared<ProbeProvider>(
        ProviderKind::search,
        std::vector<EvidenceDocument>{doc("hit", "cached body", DocOrigin::search)});
    EvidenceRetriever retriever(instruction, embedder, {provider}, RetrievalConfig{});

    auto first = retriever.retrieve(claim);
    auto second = retriever.retrieve(claim);
    CHECK(provider->fetches == 1);
    CHECK(retriever.provider_fetches() == 1);
    REQUIRE(first.size() == second.size());
    CHECK(first[0].body == second[0].body);
}

TEST_CASE("fixture providers: search fixtures chunk page content and keep snippets") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fence_search_fixture";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / (sanitize_key("my query") + ".json"));
        out << R"([{"title":"T1","url":"http://x","snippet":"short snippet",
                    "page_content":"one two three four five six"}])";
    }
    FixtureSearchProvider provider(dir);
    RetrievalConfig config;
    config.chunk_size = 3;
    auto docs = provider.fetch("my query", config);
    REQUIRE(docs.size() == 3);  // snippet + 2 chunks
    CHECK(docs[0].body == "short snippet");
    CHECK(docs[1].body == "one two three");
    CHECK(docs[2].body == "four five six");
    CHECK(docs[2].chunk_index == 1);
    for (const auto& d : docs) CHECK(d.origin == DocOrigin::search);

    CHECK_THROWS_AS(provider.fetch("unknown query", config), TransportError);
    fs::remove_all(dir);
}

TEST_CASE("fixture providers: kg renders entity attributes to flat text") {
    KgEntity entity;
    entity.name = "Chadwick Boseman";
    entity.description = "American actor";
    entity.detailed_description = "Known for portraying historical figures.";
    entity.attributes = {{"Born", "November 29, 1976, Anderson, SC"}};
    std::string text = render_kg_entity(entity);
    CHECK(text ==
          "Chadwick Boseman: American actor. Known for portraying historical figures. "
          "Chadwick Boseman Born: November 29, 1976, Anderson, SC.");
}

TEST_CASE("wiki snapshot provider: ranks page names by embedding similarity") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fence_wiki_fixture";
    fs::remove_all(dir);
    fs::create_directories(dir / "pages");
    {
        std::ofstream titles(dir / "titles.txt");
        titles << "Alpha Page\nBeta Page\n";
        std::ofstream alpha(dir / "pages" / (sanitize_key("Alpha Page") + ".txt"));
        alpha << "alpha page body";
        std::ofstream beta(dir / "pages" / (sanitize_key("Beta Page") + ".txt"));
        beta << "beta page body";
    }
    auto book = std::make_shared<MockBook>();
    book->add_embedding("Alpha Page", {1.0, 0.0});
    book->add_embedding("Beta Page", {0.0, 1.0});
    book->add_embedding("alpha", {0.9, std::sqrt(1 - 0.81)});
    MockEmbedClient embedder(embed_profile(), book, /*strict=*/true);

    WikiSnapshotProvider provider(dir, embedder);
    RetrievalConfig config;
    config.wiki_pages_per_title = 1;
    auto docs = provider.fetch("alpha", config);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].title == "Alpha Page");
    CHECK(docs[0].body == "alpha page body");
    CHECK(docs[0].origin == DocOrigin::encyclopedia);
    fs::remove_all(dir);
}

TEST_CASE("sanitize_key: lowercases and folds punctuation runs") {
    CHECK(sanitize_key("Kenneth Morgan Stancil") == "kenneth_morgan_stancil");
    CHECK(sanitize_key("  weird -- key?! ") == "weird_key");
    CHECK(sanitize_key("") == "_");
}

TEST_CASE("strip_html: drops tags and script blocks, decodes entities") {
    std::string html =
        "<html><head><script>var x=1;</script><style>p{}</style></head>"
        "<body><p>Tom &amp; Jerry</p> <div>were here</div></body></html>";
    CHECK(strip_html(html) == "Tom & Jerry were here");
}
