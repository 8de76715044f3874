#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace topictax {

struct PreprocessRules {
  std::unordered_set<std::string> stopwords;
  size_t min_token_len = 3;
  bool drop_numeric = true;

  // English list plus the bundled publication-noise list.
  static PreprocessRules defaults();
  void add_stopwords(std::string_view list_text);
};

// Parses a stopword list: one surface form per line, '#' starts a comment.
std::vector<std::string> parse_word_list(std::string_view text);

std::string_view bundled_english_stopwords();
std::string_view bundled_publication_stopwords();
std::string_view bundled_verb_lexicon();

// Lowercases and splits on anything that is not [a-z0-9_]. Non-ASCII bytes
// are separators.
std::vector<std::string> word_tokens(std::string_view text);

// Porter stem applied until it stops changing, so stemming is idempotent.
// Underscore-joined tokens (merged collocations) are stemmed per part.
std::string stem_token(std::string_view token);

// Lowercase, strip special characters, drop stopwords, short and numeric
// tokens, stem the survivors. Filters apply to both surface form and stem.
std::vector<std::string> preprocess_tokens(std::string_view text, const PreprocessRules& rules);

// Splits on '.', '!' or '?' followed by whitespace. A period ending a run of
// single-letter initials ("E.g.", "J.") does not end a sentence.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace topictax
