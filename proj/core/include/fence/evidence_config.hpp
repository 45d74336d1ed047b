#pragma once

namespace fence {

// Tool-retrieval knobs. Defaults match the pipeline constants: 5 search
// results per query, 512-token chunks, top-3 encyclopedia pages per name,
// top-1 knowledge-graph hit, and 5 documents after reranking.
struct RetrievalConfig {
    int search_results_per_query = 5;
    int chunk_size = 512;  // whitespace tokens
    int wiki_pages_per_title = 3;
    int kg_results = 1;
    int rerank_top_n = 5;
};

}  // namespace fence
