#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "fence/evaluator.hpp"
#include "fence/evidence.hpp"
#include "fence/mock.hpp"
#include "fence/preference.hpp"

namespace {

std::string make_text(std::size_t tokens) {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> word_len(2, 10);
    std::ostringstream out;
    for (std::size_t i = 0; i < tokens; ++i) {
        if (i > 0) out << ' ';
        int len = word_len(rng);
        for (int c = 0; c < len; ++c) out << static_cast<char>('a' + rng() % 26);
    }
    return out.str();
}

void BM_ChunkText(benchmark::State& state) {
    const std::string text = make_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto chunks = fence::chunk_text(text, 512);
        benchmark::DoNotOptimize(chunks);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Rerank(benchmark::State& state) {
    auto book = std::make_shared<fence::MockBook>();
    fence::MockEmbedClient embedder(
        {fence::BackendRole::embedder, "mock:", "m", 2, std::chrono::milliseconds{1000}},
        book, false, 64);
    fence::Claim claim{"c1", "some claim under test", std::nullopt};
    std::vector<fence::EvidenceDocument> docs;
    for (int i = 0; i < state.range(0); ++i) {
        docs.push_back({"doc " + std::to_string(i), make_text(40), fence::DocOrigin::search,
                        0, std::nullopt});
    }
    for (auto _ : state) {
        auto top = fence::rerank(embedder, claim, docs, 5);
        benchmark::DoNotOptimize(top);
    }
}

void BM_BuildPreferencePairs(benchmark::State& state) {
    std::vector<fence::CandidateResponse> candidates;
    for (int i = 0; i < state.range(0); ++i) {
        fence::CandidateResponse c;
        c.id = "c" + std::to_string(i);
        c.lineage.sample_index = i;
        fence::ClaimVerdict v;
        v.judgment.label = fence::JudgmentLabel::Supported;
        c.verdicts = {v};
        c.score = static_cast<double>(i) / static_cast<double>(state.range(0));
        candidates.push_back(std::move(c));
    }
    for (auto _ : state) {
        auto pairs = fence::build_preference_pairs(candidates, 3);
        benchmark::DoNotOptimize(pairs);
    }
}

void BM_BalancedAccuracy(benchmark::State& state) {
    fence::ConfusionCounts counts{311, 287, 96, 42};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fence::balanced_accuracy(counts));
    }
}

}  // namespace

BENCHMARK(BM_ChunkText)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Rerank)->Arg(16)->Arg(64);
BENCHMARK(BM_BuildPreferencePairs)->Arg(10)->Arg(40);
BENCHMARK(BM_BalancedAccuracy);
BENCHMARK_MAIN();
