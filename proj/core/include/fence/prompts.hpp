#pragma once

#include <span>
#include <string>
#include <vector>

#include "fence/backends.hpp"
#include "fence/model.hpp"

namespace fence::prompts {

// ---- builders ---------------------------------------------------------------
// Every pipeline step goes through one of these, so a request is always
// byte-reproducible from its inputs and mock scripts can be computed ahead.

ChatRequest search_query_request(const Claim& claim);
ChatRequest wiki_titles_request(const Claim& claim);
ChatRequest kg_entities_request(const Claim& claim);

// Shared judgment prompt: numbered documents, then the claim, then the
// two-line CRITIQUE/LABEL format demand. Documents render in the given order
// and are truncated to token_budget whitespace tokens, dropping the
// lowest-ranked (last) documents first.
ChatRequest judgment_request(const Claim& claim, std::span<const EvidenceDocument> docs,
                             int num_samples = 1, double temperature = 0.0,
                             int token_budget = 6000);
// Second attempt after an unparseable judgment; distinct fingerprint.
ChatRequest judgment_retry_request(const ChatRequest& original);

ChatRequest decompose_request(const std::string& passage_text);
ChatRequest familiarity_request(const Claim& claim);
ChatRequest edit_request(const std::string& passage_text, const Claim& claim,
                         const std::string& critique);
ChatRequest remove_request(const std::string& passage_text, const Claim& claim);
ChatRequest continuation_request(const std::string& prompt,
                                 const std::string& answer_so_far);
ChatRequest generation_request(const std::string& prompt, int num_samples,
                               double temperature);
ChatRequest topic_request(const Claim& claim, std::span<const std::string> topics);

std::string render_documents(std::span<const EvidenceDocument> docs, int token_budget);

// ---- parsers ----------------------------------------------------------------

// One query string; a "SEARCH QUERY:" line wins, otherwise the first
// non-empty line. Throws ParseFailure when the completion is blank.
std::string parse_search_query(const std::string& completion);

// One name per line, bullets and numbering stripped, deduplicated with order
// preserved. Throws ParseFailure when nothing remains.
std::vector<std::string> parse_name_list(const std::string& completion);

// Strict two-line "CRITIQUE: ..." / "LABEL: ..." form. Throws ParseFailure.
Judgment parse_judgment(const std::string& completion);

// Case-insensitive true/false/unknown; anything else is Unknown.
FamiliarityVerdict parse_familiarity(const std::string& completion);

// One claim sentence per line; "NONE" lines are dropped; a blank completion
// is a ParseFailure, an explicit NONE is a legitimate empty list.
std::vector<std::string> parse_claim_lines(const std::string& completion);

// Topics from the allowed list actually mentioned, in list order.
std::vector<std::string> parse_topics(const std::string& completion,
                                      std::span<const std::string> allowed);

}  // namespace fence::prompts
