#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "topictax/corpus.h"
#include "topictax/linalg.h"

namespace topictax {

enum class ModelKind { kLda, kBiLda, kLsi };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct LdaConfig {
  int num_topics = 10;
  double alpha = 0.1;
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 200;
  int sample_lag = 10;
  uint64_t seed = 1;

  void validate() const;
};

struct LsiConfig {
  int num_topics = 10;
  int oversampling = 10;
  int power_iters = 2;
  uint64_t seed = 1;

  void validate() const;
};

// Fold-in schedule for documents outside the training set.
struct InferenceOptions {
  int iterations = 100;
  int burn_in = 50;
  int sample_lag = 5;
  uint64_t seed = 1;
};

struct TopicModel {
  ModelKind kind = ModelKind::kLda;
  std::variant<LdaConfig, LsiConfig> config;
  std::vector<std::string> vocab;
  linalg::Matrix phi;    // K x V, rows sum to 1
  linalg::Matrix theta;  // D x K, rows sum to 1
  std::vector<double> topic_marginal;
  // LSI only.
  std::vector<double> singular_values;
  std::vector<bool> zero_components;

  size_t num_topics() const { return phi.rows(); }
  size_t vocab_size() const { return phi.cols(); }
  double alpha() const;
};

// p(t) = sum_d N_d theta[d][t] / sum_d N_d. Uniform if the corpus is empty.
std::vector<double> token_weighted_marginal(const linalg::Matrix& theta, const Corpus& corpus);

// Collapsed Gibbs sampling. Documents are swept in doc-id order, each with
// its own RNG stream keyed by (seed, doc id), so the result does not depend
// on input order. phi/theta are posterior means averaged over the samples
// taken every sample_lag sweeps after burn_in.
TopicModel train_lda(const Corpus& corpus, const LdaConfig& config,
                     ModelKind kind = ModelKind::kLda);

// TF-IDF (natural-log idf, L2-normalized rows) and randomized truncated SVD.
// Topics are absolute right-singular loadings normalized to sum 1.
TopicModel train_lsi(const Corpus& corpus, const LsiConfig& config);

linalg::Matrix tfidf_matrix(const Corpus& corpus);

// Term ids in decreasing phi[t][.]; ties go to the lexicographically smaller
// token. n is clamped to V.
std::vector<TokenId> top_terms(const TopicModel& model, size_t topic, size_t n);

// Fold-in Gibbs with phi frozen. Ids >= V are skipped; an empty document
// yields the uniform prior mean. The RNG stream is keyed by the document
// content, so identical documents always get identical results.
std::vector<double> infer_doc_topics(const TopicModel& model, std::span<const TokenId> doc,
                                     const InferenceOptions& options = {});

void save_model_json(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model_json(const std::filesystem::path& path);

}  // namespace topictax
