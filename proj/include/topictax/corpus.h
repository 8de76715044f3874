#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topictax/text.h"

namespace topictax {

using TokenId = uint32_t;

struct DocumentRecord {
  std::string id;
  std::string title;
  std::string abstract;
};

// One abstract sentence. `words` are lowercased surface tokens (stopwords
// kept) and `stems` their canonical forms, both used for relation
// extraction; `tokens` is the modeled token stream after all filtering.
struct Sentence {
  uint32_t doc = 0;
  std::vector<TokenId> tokens;
  std::vector<std::string> words;
  std::vector<std::string> stems;
};

struct StagedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> words;
};

struct StagedDocument {
  std::string id;
  std::vector<StagedSentence> sentences;
};

// Mutable intermediate between raw records and the immutable Corpus.
struct Staging {
  std::vector<DocumentRecord> records;
  std::vector<StagedDocument> docs;
  bool preprocessed = false;

  size_t total_tokens() const;
};

struct BigramPolicy {
  uint32_t min_count = 5;
  double threshold = 10.0;
  // Emit the merged token after the pair instead of replacing it.
  bool keep_unigrams = false;

  void validate() const;
};

struct BigramStats {
  size_t merges = 0;
  size_t distinct_bigrams = 0;
};

// Collocation score (count(ab) - min_count) * N / (count(a) * count(b)).
double bigram_score(uint64_t count_ab, uint64_t count_a, uint64_t count_b, uint64_t total,
                    uint32_t min_count);

// Row-compressed document-term counts.
struct SparseCounts {
  std::vector<size_t> row_ptr{0};
  std::vector<TokenId> cols;
  std::vector<uint32_t> vals;

  size_t rows() const { return row_ptr.size() - 1; }
  std::span<const TokenId> row_cols(size_t r) const {
    return {cols.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  std::span<const uint32_t> row_vals(size_t r) const {
    return {vals.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
};

// Immutable token corpus. Vocabulary ids follow lexicographic token order.
class Corpus {
 public:
  size_t num_docs() const { return docs_.size(); }
  size_t vocab_size() const { return vocab_.size(); }
  uint64_t total_tokens() const { return total_tokens_; }

  const std::string& doc_id(size_t d) const { return ids_[d]; }
  std::span<const std::string> doc_ids() const { return ids_; }
  std::span<const TokenId> doc(size_t d) const { return docs_[d]; }
  std::span<const std::vector<TokenId>> docs() const { return docs_; }
  std::span<const Sentence> sentences() const { return sentences_; }
  std::span<const std::string> vocabulary() const { return vocab_; }
  const std::string& token(TokenId id) const { return vocab_[id]; }
  // Returns vocab_size() when the token is unknown.
  TokenId find(std::string_view token) const;
  const SparseCounts& doc_term() const { return doc_term_; }
  // Column sums of doc_term.
  std::span<const uint64_t> term_frequency() const { return term_frequency_; }
  std::span<const uint32_t> document_frequency() const { return document_frequency_; }

  // Same vocabulary, the given documents in the given order. Sentences of
  // the kept documents are carried over with their doc index remapped.
  Corpus subset(std::span<const size_t> doc_indices) const;

  // Builds directly from tokenized documents (one sentence per document),
  // with no frequency filtering. Intended for synthetic inputs.
  static Corpus from_token_docs(const std::vector<std::string>& ids,
                                const std::vector<std::vector<std::string>>& docs);

  friend Corpus build_doc_term_matrix(const Staging& staging, uint32_t min_doc_freq);
  friend Corpus load_corpus_json(const std::filesystem::path& path);

 private:
  void finalize();

  std::vector<std::string> ids_;
  std::vector<std::vector<TokenId>> docs_;
  std::vector<Sentence> sentences_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  SparseCounts doc_term_;
  std::vector<uint64_t> term_frequency_;
  std::vector<uint32_t> document_frequency_;
  uint64_t total_tokens_ = 0;
};

// Validates ids (nonempty, unique) and keeps input order.
Staging ingest_corpus(std::vector<DocumentRecord> records);

// JSON-lines reader: one {id, title, abstract} object per line. Blank lines
// are skipped. Errors carry the 1-based line number.
std::vector<DocumentRecord> read_jsonl(std::istream& in);
std::vector<DocumentRecord> read_jsonl(const std::filesystem::path& path);

// Sentence-splits every abstract and preprocesses each sentence.
void preprocess_staging(Staging& staging, const PreprocessRules& rules);

// Greedy left-to-right merge of adjacent pairs within sentences whose score
// reaches the threshold. Counts come from the unmerged token streams.
BigramStats detect_bigrams(Staging& staging, const BigramPolicy& policy);

// Drops tokens seen in fewer than min_doc_freq documents. Throws StageError
// ("corpus degenerate") when nothing survives.
Corpus build_doc_term_matrix(const Staging& staging, uint32_t min_doc_freq = 2);

void save_corpus_json(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus_json(const std::filesystem::path& path);

}  // namespace topictax
