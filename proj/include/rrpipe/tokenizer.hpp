#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rrpipe {

struct AnalyzerOptions {
  bool remove_stopwords = true;

  bool operator==(const AnalyzerOptions&) const = default;
};

inline constexpr std::string_view kStopwordListId = "stopwords-en-v1";

/// Lowercases, splits on every non-alphanumeric code point, drops empty
/// tokens and (optionally) stopwords. No stemming. Invalid UTF-8 bytes act as
/// separators.
std::vector<std::string> tokenize(std::string_view text, const AnalyzerOptions& options = {});

bool is_stopword(std::string_view term);

/// Code point classification used by the tokenizer. Exact for ASCII, Latin,
/// Greek and Cyrillic; everything else outside known punctuation and symbol
/// blocks counts as a word character.
bool is_word_codepoint(char32_t cp);
char32_t to_lower_codepoint(char32_t cp);

}  // namespace rrpipe
