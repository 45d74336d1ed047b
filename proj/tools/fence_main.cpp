// fence: factuality-evaluation pipelines over pluggable model backends.
//
//   fence augment      attach critiques + tool documents to judgment datasets
//   fence bench        run a judgment benchmark and report balanced accuracy
//   fence generate     sample, revise, judge and score candidate responses
//   fence build-prefs  emit SFT targets and DPO preference pairs
//   fence report       fact/error tallies with popularity and topic breakdowns

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <iostream>
#include <memory>

#include "fence/augment.hpp"
#include "fence/config.hpp"
#include "fence/evaluator.hpp"
#include "fence/http_clients.hpp"
#include "fence/mock.hpp"
#include "fence/parallel.hpp"
#include "fence/preference.hpp"
#include "fence/prompts.hpp"
#include "fence/report.hpp"
#include "fence/revision.hpp"
#include "fence/serialize.hpp"
#include "fence/store.hpp"

namespace fence {
namespace {

struct CommonArgs {
    std::string config_path;
    std::string input_path;
    std::string out_dir;
    std::string mock_script;
    bool dry_run = false;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pipeline config file");
    cmd->add_option("--input", args.input_path, "input path")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "run seed (recorded in outputs)");
    cmd->add_option("--mock-script", args.mock_script, "scripted-mock file; forces mock backends");
    cmd->add_flag("--dry-run", args.dry_run, "compute and print, write nothing");
}

PipelineConfig resolve_config(const CommonArgs& args) {
    PipelineConfig config =
        args.config_path.empty() ? parse_config("") : load_config(args.config_path);
    if (!args.mock_script.empty()) config.mock_script = args.mock_script;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    validate(config);
    return config;
}

// Every backend the pipelines touch, built once per command. Members are
// declared in dependency order; the retriever must die first.
struct Clients {
    std::shared_ptr<MockBook> book;
    std::unique_ptr<ChatClient> instruction;
    std::unique_ptr<ChatClient> evaluator;
    std::unique_ptr<ChatClient> generator;
    std::unique_ptr<EmbedClient> embedder;
    std::vector<std::shared_ptr<EvidenceProvider>> providers;
    std::unique_ptr<EvidenceRetriever> retriever;

    RevisionClients revision() const {
        return {instruction.get(), evaluator.get(), generator.get(), retriever.get()};
    }
};

Clients build_clients(const PipelineConfig& config) {
    Clients clients;
    bool mocked = !config.mock_script.empty();
    if (mocked) clients.book = MockBook::load_file(config.mock_script);

    auto chat_limits = [&](std::size_t budget) {
        return CallLimits{budget, config.max_in_flight};
    };
    auto make_chat = [&](const BackendProfile& profile,
                         std::size_t budget) -> std::unique_ptr<ChatClient> {
        if (mocked) {
            return std::make_unique<MockChatClient>(profile, clients.book,
                                                    config.strict_mock, chat_limits(budget));
        }
        if (profile.endpoint.empty()) {
            throw ConfigError("no endpoint for role " + std::string(to_string(profile.role)) +
                              " (set profile.<role>.endpoint or FENCE_LLM_ENDPOINT)");
        }
        return std::make_unique<HttpChatClient>(profile, config.api_key, chat_limits(budget));
    };

    clients.instruction = make_chat(config.instruction, config.budget_instruction);
    clients.evaluator = make_chat(config.evaluator, config.budget_evaluator);
    clients.generator = make_chat(config.generator, config.budget_generator);
    if (mocked) {
        clients.embedder = std::make_unique<MockEmbedClient>(
            config.embedder, clients.book, /*strict=*/false, /*fallback_dim=*/8,
            chat_limits(config.budget_embedder));
    } else {
        if (config.embedder.endpoint.empty()) {
            throw ConfigError("no embedder endpoint (set profile.embedder.endpoint or "
                              "FENCE_EMBED_ENDPOINT)");
        }
        clients.embedder = std::make_unique<HttpEmbedClient>(
            config.embedder, config.api_key, chat_limits(config.budget_embedder));
    }

    const ProviderSettings& p = config.providers;
    if (p.has_search()) {
        if (!p.search_fixture_dir.empty()) {
            clients.providers.push_back(
                std::make_shared<FixtureSearchProvider>(p.search_fixture_dir));
        } else {
            clients.providers.push_back(
                std::make_shared<HttpSearchProvider>(p.search_endpoint, p.search_api_key));
        }
    }
    if (p.has_wiki()) {
        if (!p.wiki_snapshot_dir.empty()) {
            clients.providers.push_back(
                std::make_shared<WikiSnapshotProvider>(p.wiki_snapshot_dir, *clients.embedder));
        } else {
            clients.providers.push_back(std::make_shared<HttpWikiProvider>(p.wiki_endpoint));
        }
    }
    if (p.has_kg()) {
        if (!p.kg_fixture_dir.empty()) {
            clients.providers.push_back(std::make_shared<FixtureKgProvider>(p.kg_fixture_dir));
        } else {
            clients.providers.push_back(
                std::make_shared<HttpKgProvider>(p.kg_endpoint, p.kg_api_key));
        }
    }
    if (!clients.providers.empty()) {
        clients.retriever = std::make_unique<EvidenceRetriever>(
            *clients.instruction, *clients.embedder, clients.providers, config.retrieval);
    }
    return clients;
}

int cmd_augment(const CommonArgs& args, bool no_critiques, bool no_tool_docs) {
    PipelineConfig config = resolve_config(args);
    Clients clients = build_clients(config);

    std::vector<JudgmentExample> dataset;
    for (const std::string& line : read_jsonl_file(args.input_path)) {
        dataset.push_back(example_from_json_line(line));
    }

    AugmentOptions options;
    options.critique_candidates = config.critique_candidates;
    options.with_critiques = !no_critiques;
    options.with_tool_docs = !no_tool_docs && clients.retriever != nullptr;
    options.workers = config.workers;
    options.token_budget = config.token_budget;
    BuildResult result =
        build_eval_train_set(*clients.instruction, clients.retriever.get(), dataset, options);

    std::cout << stats_to_json(result.stats);
    if (args.dry_run) return 0;

    std::filesystem::create_directories(config.out_dir);
    std::string lines;
    for (const JudgmentExample& example : result.examples) {
        lines += to_json_line(example) + "\n";
    }
    write_file_atomic(config.out_dir / "train.jsonl", lines);
    write_file_atomic(config.out_dir / "stats.json", stats_to_json(result.stats));
    std::cout << "wrote " << result.examples.size() << " examples to "
              << (config.out_dir / "train.jsonl").string() << "\n";
    return 0;
}

int cmd_bench(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    Clients clients = build_clients(config);

    std::vector<BenchmarkRecord> records;
    for (const std::string& line : read_jsonl_file(args.input_path)) {
        records.push_back(benchmark_record_from_json_line(line));
    }
    if (records.empty()) throw PreconditionError("benchmark input is empty");

    BenchmarkReport report =
        run_benchmark(*clients.evaluator, records, config.workers, config.token_budget);
    std::cout << render_report_table(report);
    if (args.dry_run) return 0;

    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "report.json", report_to_json(report));
    write_file_atomic(config.out_dir / "report.txt", render_report_table(report));
    return 0;
}

int cmd_generate(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    Clients clients = build_clients(config);
    if (clients.retriever == nullptr) {
        throw ConfigError("generate needs at least one evidence provider configured");
    }

    std::vector<std::string> prompts = read_prompt_file(args.input_path);
    if (prompts.empty()) throw PreconditionError("prompt file is empty");

    std::filesystem::create_directories(config.out_dir);
    CandidateStore store(config.out_dir);
    RevisionClients revision_clients = clients.revision();

    long failures = 0;
    for (const std::string& prompt : prompts) {
        std::string prompt_id = make_prompt_id(prompt);
        if (store.completed(prompt_id)) {
            std::cout << prompt_id << ": already complete, skipped\n";
            continue;
        }
        try {
            auto texts = clients.generator->chat(prompts::generation_request(
                prompt, config.n_candidates, config.sample_temperature));

            std::vector<CandidateResponse> originals;
            for (int s = 0; s < config.n_candidates; ++s) {
                CandidateResponse original;
                original.id = prompt_id + ".s" + std::to_string(s);
                original.prompt_id = prompt_id;
                original.lineage = Lineage{Lineage::Kind::original, s, "", 0};
                original.passages = passages_from_text(texts[static_cast<std::size_t>(s)]);
                originals.push_back(std::move(original));
            }

            // Chains revise in parallel across samples; within a chain,
            // rounds are strictly sequential.
            std::vector<std::vector<CandidateResponse>> chains(originals.size());
            std::vector<std::vector<RevisionTrace>> chain_traces(originals.size());
            parallel_for(originals.size(), config.workers, [&](std::size_t s) {
                const CandidateResponse* previous = &originals[s];
                for (int round = 1; round <= config.revision.max_rounds; ++round) {
                    RevisionTrace trace;
                    CandidateResponse revised = revise_response(
                        *previous, prompt, config.revision, revision_clients, &trace,
                        config.token_budget);
                    chain_traces[s].push_back(std::move(trace));
                    chains[s].push_back(std::move(revised));
                    previous = &chains[s].back();
                }
            });

            std::vector<CandidateResponse> candidates = std::move(originals);
            std::vector<RevisionTrace> traces;
            for (std::size_t s = 0; s < chains.size(); ++s) {
                for (CandidateResponse& revised : chains[s]) {
                    candidates.push_back(std::move(revised));
                }
                for (RevisionTrace& trace : chain_traces[s]) {
                    traces.push_back(std::move(trace));
                }
            }

            parallel_for(candidates.size(), config.workers, [&](std::size_t i) {
                evaluate_response(candidates[i], revision_clients, config.token_budget);
                score_response(candidates[i]);
            });

            if (!args.dry_run) {
                store.save_prompt(prompt_id, prompt, candidates, traces);
            }
            std::cout << prompt_id << ": " << candidates.size() << " candidates\n";
        } catch (const BudgetExceeded& e) {
            std::cerr << prompt_id << ": " << e.what() << "; aborting run\n";
            return 1;
        } catch (const FenceError& e) {
            ++failures;
            std::cerr << prompt_id << ": failed: " << e.what() << "\n";
        }
    }
    if (failures > 0) {
        std::cerr << failures << " of " << prompts.size() << " prompts failed\n";
    }
    return failures == static_cast<long>(prompts.size()) ? 1 : 0;
}

int cmd_build_prefs(const CommonArgs& args, bool include_intermediate) {
    PipelineConfig config = resolve_config(args);

    CandidateStore store(args.input_path);
    std::vector<PromptBatch> batches = store.load_all();
    if (!include_intermediate) {
        // Pool the N originals plus the final revision of each chain (2N),
        // where "final" is the deepest round actually present in the store.
        for (PromptBatch& batch : batches) {
            std::map<int, int> last_round;
            for (const CandidateResponse& candidate : batch.candidates) {
                if (candidate.lineage.kind == Lineage::Kind::revised) {
                    int& round = last_round[candidate.lineage.sample_index];
                    round = std::max(round, candidate.lineage.round);
                }
            }
            std::vector<CandidateResponse> pool;
            for (const CandidateResponse& candidate : batch.candidates) {
                bool is_final =
                    candidate.lineage.kind == Lineage::Kind::original ||
                    candidate.lineage.round == last_round[candidate.lineage.sample_index];
                if (is_final) pool.push_back(candidate);
            }
            batch.candidates = std::move(pool);
        }
    }
    for (PromptBatch& batch : batches) {
        for (CandidateResponse& candidate : batch.candidates) {
            if (!candidate.score) score_response(candidate);
        }
    }

    if (args.dry_run) {
        for (const PromptBatch& batch : batches) {
            auto pairs = build_preference_pairs(batch.candidates, config.top_k);
            std::cout << batch.prompt_id << ": " << batch.candidates.size()
                      << " candidates, " << pairs.size() << " pairs\n";
        }
        return 0;
    }

    std::filesystem::create_directories(config.out_dir);
    EmitManifest manifest = emit_training_files(batches, config.top_k, config.out_dir);
    std::cout << "wrote " << manifest.total_sft_lines << " sft lines, "
              << manifest.total_dpo_lines << " dpo lines for "
              << manifest.per_prompt.size() << " prompts\n";
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& metadata_path,
               bool with_topics) {
    PipelineConfig config = resolve_config(args);

    CandidateStore store(args.input_path);
    std::vector<PromptBatch> batches = store.load_all();

    std::map<std::string, std::string> groups;
    if (!metadata_path.empty()) groups = load_group_metadata(metadata_path);

    FactualityReport report = build_factuality_report(batches, groups);
    if (with_topics) {
        if (config.topics.empty()) {
            throw ConfigError("--topics requires a 'topics' list in the config");
        }
        Clients clients = build_clients(config);
        classify_topics(report, *clients.instruction, batches, config.topics);
    }
    for (const std::string& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }

    std::cout << report_to_json(report);
    if (args.dry_run) return 0;
    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "factuality_report.json", report_to_json(report));
    write_file_atomic(config.out_dir / "factuality_report.csv", report_to_csv(report));
    return 0;
}

}  // namespace
}  // namespace fence

int main(int argc, char** argv) {
    CLI::App app{"factuality evaluation and training-data pipelines"};
    app.require_subcommand(1);

    fence::CommonArgs augment_args, bench_args, generate_args, prefs_args, report_args;
    bool include_intermediate = false;
    bool no_critiques = false;
    bool no_tool_docs = false;
    std::string metadata_path;
    bool with_topics = false;

    CLI::App* augment = app.add_subcommand("augment", "build evaluator training data");
    fence::add_common(augment, augment_args);
    augment->add_flag("--no-critiques", no_critiques, "skip the critique augmentation path");
    augment->add_flag("--no-tool-docs", no_tool_docs, "skip the tool-document path");
    fence::add_common(app.add_subcommand("bench", "run a judgment benchmark"), bench_args);
    fence::add_common(app.add_subcommand("generate", "sample, revise and score candidates"),
                      generate_args);
    CLI::App* prefs = app.add_subcommand("build-prefs", "emit SFT and DPO files");
    fence::add_common(prefs, prefs_args);
    prefs->add_flag("--include-intermediate", include_intermediate,
                    "pool every revision round, not just the final one");
    CLI::App* report = app.add_subcommand("report", "fact/error tallies and breakdowns");
    fence::add_common(report, report_args);
    report->add_option("--metadata", metadata_path, "prompt_id -> bucket JSONL");
    report->add_flag("--topics", with_topics, "classify claims into config topics");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("augment")) {
            return fence::cmd_augment(augment_args, no_critiques, no_tool_docs);
        }
        if (app.got_subcommand("bench")) return fence::cmd_bench(bench_args);
        if (app.got_subcommand("generate")) return fence::cmd_generate(generate_args);
        if (app.got_subcommand("build-prefs")) {
            return fence::cmd_build_prefs(prefs_args, include_intermediate);
        }
        if (app.got_subcommand("report")) {
            return fence::cmd_report(report_args, metadata_path, with_topics);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
