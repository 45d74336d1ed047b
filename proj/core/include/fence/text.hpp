#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fence {

std::string_view trim(std::string_view s);

std::string to_lower(std::string_view s);

// Split on any run of whitespace; no empty tokens.
std::vector<std::string> ws_tokens(std::string_view s);

std::size_t count_ws_tokens(std::string_view s);

// Tokens re-joined with single spaces.
std::string collapse_ws(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Blank-line delimited paragraphs, each trimmed and non-empty.
std::vector<std::string> split_paragraphs(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);

}  // namespace fence
