#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "topictax/corpus.h"
#include "topictax/models.h"

namespace topictax {

struct PerplexityResult {
  double perplexity = 0.0;
  double log_likelihood_per_word = 0.0;
  uint64_t tokens = 0;
};

// exp(-LL / N) over held-out documents, with theta folded in per document.
// LSI models have no fold-in; their topic_marginal stands in for theta.
// Token ids >= V are skipped.
PerplexityResult perplexity(const TopicModel& model, std::span<const std::vector<TokenId>> docs,
                            const InferenceOptions& options = {});

// Boolean sliding-window co-occurrence over a tracked word set. A document
// shorter than the window is a single window; empty documents contribute
// none.
class CooccurrenceStats {
 public:
  CooccurrenceStats(const Corpus& corpus, std::span<const TokenId> words, size_t window,
                    double epsilon = 1e-12);

  size_t window() const { return window_; }
  double epsilon() const { return epsilon_; }
  uint64_t total_windows() const { return total_windows_; }
  std::span<const TokenId> words() const { return words_; }
  // Counts by position in words().
  uint64_t count(size_t i) const { return pair_counts_[i * words_.size() + i]; }
  uint64_t pair_count(size_t i, size_t j) const { return pair_counts_[i * words_.size() + j]; }
  // log((P(ab) + eps) / (P(a) P(b))) / -log(P(ab) + eps); 0 if a marginal is 0.
  double npmi(size_t i, size_t j) const;

 private:
  size_t window_;
  double epsilon_;
  std::vector<TokenId> words_;
  std::vector<uint64_t> pair_counts_;  // symmetric, diagonal holds counts
  uint64_t total_windows_ = 0;
};

struct CoherenceResult {
  double score = 0.0;
  std::vector<double> per_topic;
  // Topics with fewer than two top words present in the corpus; they score 0.
  std::vector<bool> flagged;
};

// C_v: one-vs-all segmentation of each topic's top words, NPMI context
// vectors, cosine against the summed vector, arithmetic means. Top words are
// matched to the corpus by token string.
CoherenceResult coherence_cv(const TopicModel& model, const Corpus& corpus, size_t top_n = 10,
                             size_t window = 110);

struct EvalCell {
  std::string algorithm;
  int k = 0;
  double coherence = 0.0;
  double perplexity = 0.0;
  double log_likelihood_per_word = 0.0;
  bool failed = false;
  std::string error;
};

// One trainable configuration and the model family it belongs to. Stage 1
// ranks configurations; stage 2 sweeps every configuration of the winning
// family.
struct GridVariant {
  std::string name;
  std::string family;
};

struct SelectionGrid {
  std::vector<GridVariant> variants;
  int k_pilot = 10;
  std::vector<int> k_values;  // stage-2 sweep, ascending

  static std::vector<int> k_range(int lo, int hi);
  void validate() const;
};

struct SelectionResult {
  std::string best_family;
  std::string best_variant;
  int k_best = 0;
  EvalCell best_cell;
  std::vector<EvalCell> stage1;  // variant order
  std::vector<EvalCell> stage2;  // variant order, then ascending k
};

using CellEvaluator = std::function<EvalCell(const GridVariant& variant, int k)>;

// Two-stage selection over an arbitrary cell evaluator. Cells run on up to
// `jobs` threads and merge by (variant, k). Failed cells are excluded with a
// warning. Ties on coherence go to the smaller K, then to variant order.
SelectionResult select_model(const SelectionGrid& grid, const CellEvaluator& evaluate, int jobs = 1);

struct GridTraining {
  LdaConfig lda;
  LsiConfig lsi;
  InferenceOptions inference;
  size_t top_n = 10;
  size_t window = 110;
  double heldout_fraction = 0.1;
  uint64_t split_seed = 1;
};

// Variants "lda", "bilda" (family LDA) and "lsi" (family LSI).
std::vector<GridVariant> default_variants();

// Held-out document indices: a seeded shuffle, the first ceil(f * D) docs
// (at least one when D > 1), returned sorted.
std::vector<size_t> heldout_split(size_t num_docs, double fraction, uint64_t seed);

// Trains `variant` at k on the training split of its corpus (the bigram
// corpus for "bilda"), scores C_v against the full corpus and perplexity on
// the held-out split.
EvalCell evaluate_cell(const GridVariant& variant, int k, const Corpus& unigram,
                       const Corpus* bigram, const GridTraining& training);

SelectionResult run_selection_grid(const Corpus& unigram, const Corpus* bigram,
                                   const SelectionGrid& grid, const GridTraining& training,
                                   int jobs = 1);

// Trains the selected model on the full corpus of its variant.
TopicModel train_variant(const std::string& variant, int k, const Corpus& corpus,
                         const GridTraining& training);

// eval_grid.csv rows: algorithm,k,coherence,perplexity,log_likelihood_per_word
std::string eval_grid_csv(const std::vector<EvalCell>& cells);

}  // namespace topictax
