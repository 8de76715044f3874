#include "topictax/text.h"

#include <algorithm>
#include <cctype>

#include "topictax/porter.h"

namespace topictax {
namespace {

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_numeric(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](char c) { return (c >= '0' && c <= '9') || c == '_'; });
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// "J", "E.g", "U.S": single letters separated by periods. Leading brackets
// and quotes are ignored.
bool is_initials(std::string_view word) {
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) {
    word.remove_prefix(1);
  }
  if (word.empty()) return false;
  for (size_t i = 0; i < word.size(); ++i) {
    bool alpha = std::isalpha(static_cast<unsigned char>(word[i])) != 0;
    if (i % 2 == 0 ? !alpha : word[i] != '.') return false;
  }
  return word.size() % 2 == 1;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> parse_word_list(std::string_view text) {
  std::vector<std::string> words;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      std::string w(line);
      std::transform(w.begin(), w.end(), w.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      words.push_back(std::move(w));
    }
    pos = nl + 1;
  }
  return words;
}

PreprocessRules PreprocessRules::defaults() {
  PreprocessRules rules;
  rules.add_stopwords(bundled_english_stopwords());
  rules.add_stopwords(bundled_publication_stopwords());
  return rules;
}

void PreprocessRules::add_stopwords(std::string_view list_text) {
  for (auto& w : parse_word_list(list_text)) stopwords.insert(std::move(w));
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    auto c = static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(raw)));
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string stem_token(std::string_view token) {
  if (token.find('_') != std::string_view::npos) {
    std::string out;
    size_t pos = 0;
    while (pos <= token.size()) {
      size_t us = token.find('_', pos);
      if (us == std::string_view::npos) us = token.size();
      if (us > pos) {
        if (!out.empty()) out.push_back('_');
        out += stem_token(token.substr(pos, us - pos));
      }
      pos = us + 1;
    }
    return out;
  }
  std::string current(token);
  for (;;) {
    std::string next = porter_stem(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::vector<std::string> preprocess_tokens(std::string_view text, const PreprocessRules& rules) {
  std::vector<std::string> out;
  auto rejected = [&](const std::string& t) {
    return t.size() < rules.min_token_len || (rules.drop_numeric && is_numeric(t)) ||
           rules.stopwords.contains(t);
  };
  for (const auto& token : word_tokens(text)) {
    if (rejected(token)) continue;
    std::string stem = stem_token(token);
    if (rejected(stem)) continue;
    out.push_back(std::move(stem));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  size_t start = 0;
  size_t word_start = 0;
  auto emit = [&](size_t end) {
    std::string_view s = trim(text.substr(start, end - start));
    if (!s.empty()) sentences.emplace_back(s);
    start = end;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (is_space(c)) {
      word_start = i + 1;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && !is_space(text[i + 1])) continue;
    if (c == '.' && is_initials(text.substr(word_start, i - word_start))) continue;
    emit(i + 1);
  }
  emit(text.size());
  return sentences;
}

}  // namespace topictax
