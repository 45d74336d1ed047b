#include "fence/prompts.hpp"

#include <algorithm>
#include <unordered_set>

#include "fence/errors.hpp"
#include "fence/text.hpp"

namespace fence::prompts {

namespace {

constexpr const char* kSearchQuerySystem =
    "You are given a STATEMENT. Your task is to write one SEARCH QUERY to find "
    "evidence supporting or disproving the STATEMENT. Reply with the query only.";

constexpr const char* kWikiTitlesSystem =
    "You are given a STATEMENT. Your task is to generate a list of possible "
    "encyclopedia page names whose articles could verify the STATEMENT. Write "
    "one page name per line.";

constexpr const char* kKgEntitiesSystem =
    "You are given a STATEMENT. Your task is to generate a list of entities "
    "mentioned in the STATEMENT to look up in a knowledge graph. Write one "
    "entity per line.";

constexpr const char* kJudgmentSystem =
    "You are a fact-checking assistant. Decide whether the CLAIM is supported "
    "by the DOCUMENTS. Respond with exactly two lines:\n"
    "CRITIQUE: <one short paragraph explaining which parts of the documents "
    "support or contradict the claim>\n"
    "LABEL: <supported|contradictory|unverified>";

constexpr const char* kDecomposeSystem =
    "Decompose the PASSAGE into independent factual claims. Write one claim "
    "per line as a full self-contained sentence. If the passage contains no "
    "factual claims, write NONE.";

constexpr const char* kEditSystem =
    "Rewrite the PASSAGE so the false information described in the CRITIQUE is "
    "corrected. Keep everything else unchanged. Reply with the rewritten "
    "passage only.";

constexpr const char* kRemoveSystem =
    "Rewrite the PASSAGE with the information in the FALSE CLAIM removed. Keep "
    "everything else unchanged. Reply with the rewritten passage only. If "
    "nothing remains, reply with an empty message.";

constexpr const char* kContinuationSystem =
    "Continue the answer to the PROMPT. The answer so far is given. Write only "
    "the next passage as one paragraph. If the answer is already complete, "
    "reply with an empty message.";

constexpr const char* kTopicSystem =
    "You are given a CLAIM and a list of TOPICS. Reply with every topic the "
    "claim covers, one per line, or NONE if none apply.";

constexpr const char* kFormatReminder =
    "\n\nYour previous reply was not in the required format. Respond with "
    "exactly two lines:\nCRITIQUE: <one short paragraph>\n"
    "LABEL: <supported|contradictory|unverified>";

std::string statement_user(const Claim& claim) {
    return "STATEMENT: " + claim.text;
}

// Strips "- ", "* ", "3. ", "3) " style lead-ins.
std::string strip_bullet(std::string_view line) {
    std::string_view s = trim(line);
    if (!s.empty() && (s.front() == '-' || s.front() == '*')) {
        s = trim(s.substr(1));
    } else {
        std::size_t i = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
            s = trim(s.substr(i + 1));
        }
    }
    return std::string(s);
}

}  // namespace

ChatRequest search_query_request(const Claim& claim) {
    if (trim(claim.text).empty()) throw PreconditionError("claim text is empty");
    return {kSearchQuerySystem, statement_user(claim), 0.0, 1, 128};
}

ChatRequest wiki_titles_request(const Claim& claim) {
    if (trim(claim.text).empty()) throw PreconditionError("claim text is empty");
    return {kWikiTitlesSystem, statement_user(claim), 0.0, 1, 256};
}

ChatRequest kg_entities_request(const Claim& claim) {
    if (trim(claim.text).empty()) throw PreconditionError("claim text is empty");
    return {kKgEntitiesSystem, statement_user(claim), 0.0, 1, 256};
}

std::string render_documents(std::span<const EvidenceDocument> docs, int token_budget) {
    std::string out;
    long remaining = token_budget;
    int index = 1;
    for (const EvidenceDocument& doc : docs) {
        std::string header = "[Doc " + std::to_string(index) + "] Title: " + doc.title +
                             "\nText: ";
        long cost = static_cast<long>(count_ws_tokens(header)) +
                    static_cast<long>(count_ws_tokens(doc.body));
        if (cost > remaining) {
            if (index == 1) {
                // Never emit an empty prompt: keep the first document, clipped.
                auto tokens = ws_tokens(doc.body);
                std::size_t keep = remaining > 8 ? static_cast<std::size_t>(remaining - 8)
                                                 : std::size_t{1};
                keep = std::min(keep, tokens.size());
                tokens.resize(keep);
                out += header + join(tokens, " ") + "\n\n";
            }
            break;
        }
        out += header + doc.body + "\n\n";
        remaining -= cost;
        ++index;
    }
    return out;
}

ChatRequest judgment_request(const Claim& claim, std::span<const EvidenceDocument> docs,
                             int num_samples, double temperature, int token_budget) {
    if (docs.empty()) throw PreconditionError("judgment requires at least one document");
    std::string user = "DOCUMENTS:\n" + render_documents(docs, token_budget) +
                       "CLAIM: " + claim.text;
    return {kJudgmentSystem, std::move(user), temperature, num_samples, 512};
}

ChatRequest judgment_retry_request(const ChatRequest& original) {
    ChatRequest retry = original;
    retry.user_prompt += kFormatReminder;
    return retry;
}

ChatRequest decompose_request(const std::string& passage_text) {
    if (trim(passage_text).empty()) throw PreconditionError("passage text is empty");
    return {kDecomposeSystem, "PASSAGE:\n" + passage_text, 0.0, 1, 512};
}

ChatRequest familiarity_request(const Claim& claim) {
    // Evidence-free probe; the wording of the question is fixed.
    return {"", claim.text + "\n\nIs this claim factual? Answer true, false, or unknown.",
            0.0, 1, 8};
}

ChatRequest edit_request(const std::string& passage_text, const Claim& claim,
                         const std::string& critique) {
    std::string user = "PASSAGE:\n" + passage_text + "\n\nFALSE CLAIM: " + claim.text +
                       "\n\nCRITIQUE: " + critique;
    return {kEditSystem, std::move(user), 0.0, 1, 1024};
}

ChatRequest remove_request(const std::string& passage_text, const Claim& claim) {
    std::string user = "PASSAGE:\n" + passage_text + "\n\nFALSE CLAIM: " + claim.text;
    return {kRemoveSystem, std::move(user), 0.0, 1, 1024};
}

ChatRequest continuation_request(const std::string& prompt,
                                 const std::string& answer_so_far) {
    if (trim(answer_so_far).empty()) throw PreconditionError("continuation prefix is empty");
    std::string user = "PROMPT: " + prompt + "\n\nANSWER SO FAR:\n" + answer_so_far +
                       "\n\nNEXT PASSAGE:";
    return {kContinuationSystem, std::move(user), 0.0, 1, 1024};
}

ChatRequest generation_request(const std::string& prompt, int num_samples,
                               double temperature) {
    return {"", prompt, temperature, num_samples, 2048};
}

ChatRequest topic_request(const Claim& claim, std::span<const std::string> topics) {
    std::string list;
    for (std::size_t i = 0; i < topics.size(); ++i) {
        if (i > 0) list += ", ";
        list += topics[i];
    }
    return {kTopicSystem, "TOPICS: " + list + "\nCLAIM: " + claim.text, 0.0, 1, 64};
}

std::string parse_search_query(const std::string& completion) {
    for (const std::string& raw : split_lines(completion)) {
        std::string line = std::string(trim(raw));
        if (line.empty()) continue;
        constexpr std::string_view kPrefix = "SEARCH QUERY:";
        if (line.size() > kPrefix.size() &&
            iequals(std::string_view(line).substr(0, kPrefix.size()), kPrefix)) {
            std::string rest = std::string(trim(std::string_view(line).substr(kPrefix.size())));
            if (!rest.empty()) return rest;
            continue;
        }
        return line;
    }
    throw ParseFailure("no query line found in completion");
}

std::vector<std::string> parse_name_list(const std::string& completion) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const std::string& raw : split_lines(completion)) {
        std::string name = strip_bullet(raw);
        if (name.empty() || iequals(name, "none")) continue;
        if (seen.insert(name).second) names.push_back(std::move(name));
    }
    if (names.empty()) throw ParseFailure("no names found in completion");
    return names;
}

Judgment parse_judgment(const std::string& completion) {
    std::string_view text = completion;
    auto find_marker = [&](std::string_view marker, std::size_t from) {
        return text.find(marker, from);
    };
    std::size_t critique_at = find_marker("CRITIQUE:", 0);
    if (critique_at == std::string_view::npos) {
        throw ParseFailure("missing CRITIQUE: line");
    }
    std::size_t label_at = find_marker("LABEL:", critique_at);
    if (label_at == std::string_view::npos) {
        throw ParseFailure("missing LABEL: line");
    }
    std::string critique = std::string(
        trim(text.substr(critique_at + 9, label_at - (critique_at + 9))));
    std::string label_text = std::string(trim(text.substr(label_at + 6)));
    // Tolerate trailing punctuation and prose after the label word.
    std::size_t end = 0;
    while (end < label_text.size() &&
           std::isalpha(static_cast<unsigned char>(label_text[end]))) {
        ++end;
    }
    auto label = parse_judgment_label(label_text.substr(0, end));
    if (!label) throw ParseFailure("unknown label: " + label_text.substr(0, 32));
    if (critique.empty()) throw ParseFailure("empty critique");
    return Judgment{std::move(critique), *label, completion, false};
}

FamiliarityVerdict parse_familiarity(const std::string& completion) {
    std::string_view s = trim(completion);
    std::size_t end = 0;
    while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
    std::string word = to_lower(s.substr(0, end));
    if (word == "true") return FamiliarityVerdict::True;
    if (word == "false") return FamiliarityVerdict::False;
    return FamiliarityVerdict::Unknown;
}

std::vector<std::string> parse_claim_lines(const std::string& completion) {
    if (trim(completion).empty()) throw ParseFailure("empty decomposition");
    std::vector<std::string> claims;
    for (const std::string& raw : split_lines(completion)) {
        std::string line = strip_bullet(raw);
        if (line.empty() || iequals(line, "none")) continue;
        claims.push_back(std::move(line));
    }
    return claims;
}

std::vector<std::string> parse_topics(const std::string& completion,
                                      std::span<const std::string> allowed) {
    std::string lower = to_lower(completion);
    std::vector<std::string> matched;
    for (const std::string& topic : allowed) {
        if (lower.find(to_lower(topic)) != std::string::npos) {
            matched.push_back(topic);
        }
    }
    return matched;
}

}  // namespace fence::prompts
