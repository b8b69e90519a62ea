// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcsi::text {

bool is_space(char c);

std::string_view trim(std::string_view s);

/// Whitespace-delimited tokens, as views into `s`.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Sentence length in words: number of whitespace-separated tokens.
std::size_t word_count(std::string_view s);

/// Trims and collapses every whitespace run to one ASCII space.
std::string normalize_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

/// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so
/// UTF-8 words are kept whole. Shared by ROUGE and the hashed featurizer.
std::vector<std::string> word_tokens(std::string_view s, bool lowercase = true);

/// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t codepoint_count(std::string_view s);

/// Byte offset just past the first `n` code points.
std::size_t codepoint_prefix_bytes(std::string_view s, std::size_t n);

}  // namespace tcsi::text
