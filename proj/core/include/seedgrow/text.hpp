#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace seedgrow {

/// Pluggable tokenizer seam. The default is `tokenize`.
using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Collapses newlines, tabs and other control or invisible characters into single
/// spaces and trims the ends. Everything else, punctuation included, is kept.
std::string normalize_text(std::string_view text);

/// ASCII-lowercases and splits on whitespace and punctuation (ASCII and the common
/// Unicode whitespace/punctuation blocks). No stemming, no stopwords.
/// Non-ASCII letters are kept verbatim inside tokens.
std::vector<std::string> tokenize(std::string_view text);

/// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

} // namespace seedgrow
