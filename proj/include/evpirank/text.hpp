#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evpirank {

// Lowercased alphanumeric tokens. ASCII letters are folded; bytes >= 0x80 are
// kept as token characters so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

// Raw whitespace-separated tokens, case preserved.
std::vector<std::string> whitespace_tokens(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

std::string to_lower_ascii(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace evpirank
