#pragma once

#include <string>
#include <vector>

#include "topictax/corpus.h"
#include "topictax/linalg.h"
#include "topictax/models.h"

namespace topictax {

// Per-term statistics over the model vocabulary.
struct TermTable {
  std::vector<double> frequency;  // corpus count, matched by token string
  std::vector<double> p_w;        // sum_t phi[t][w] p(t)
  linalg::Matrix p_t_given_w;     // V x K, rows sum to 1
  std::vector<double> saliency;
};

// saliency(w) = frequency(w) * sum_t p(t|w) ln(p(t|w) / p(t)) with
// p(t|w) proportional to phi[t][w] p(t) and p(t) the model's topic marginal.
// A term with p(w) = 0 gets p(t|w) = p(t) and saliency 0.
TermTable term_saliency(const TopicModel& model, const Corpus& corpus);

// Marginal term probability p(w) = sum_t phi[t][w] p(t).
double term_marginal(const TopicModel& model, TokenId w);

enum class RelevanceForm {
  kLinear,  // lambda p(w|t) + (1 - lambda) p(w|t) / p(w)
  kLog,     // lambda ln p(w|t) + (1 - lambda) ln(p(w|t) / p(w))
};

// Throws ValidationError("term absent from corpus") when p(w) = 0.
double term_relevance(const TopicModel& model, TokenId w, size_t topic, double lambda,
                      RelevanceForm form = RelevanceForm::kLinear);

struct ConceptScore {
  std::string term;
  TokenId id = 0;
  double saliency = 0.0;
  double relevance = 0.0;
  double p_w_given_t = 0.0;
  double lift = 0.0;
};

struct TopicSummary {
  size_t topic = 0;
  std::vector<ConceptScore> concepts;
  std::string label;
  // Fewer than n distinct concepts were available.
  bool short_list = false;
};

struct ConceptOptions {
  double lambda = 0.33;
  size_t n = 10;
  size_t pool = 30;
  RelevanceForm form = RelevanceForm::kLinear;
};

// Per topic: the support is every term with lift >= 1; the pool is the
// top max(pool, n) supported terms by saliency, ranked by relevance. A term
// selected by several topics stays with the topic where its relevance is
// highest (lower index on ties); the others move down their pools until
// every list is distinct.
std::vector<TopicSummary> select_topic_concepts(const TopicModel& model, const Corpus& corpus,
                                                const ConceptOptions& options = {});

struct TopicMapData {
  linalg::Matrix coords;  // K x 2
  std::vector<double> proportions;
  linalg::Matrix distance;  // K x K Jensen-Shannon divergences, natural log
};

// Natural-log Jensen-Shannon divergence, in [0, ln 2].
double jensen_shannon(std::span<const double> p, std::span<const double> q);

// Classical MDS of a distance matrix into 2-D: double centering of the
// squared distances, top two eigenpairs, coordinates v * sqrt(max(lambda, 0)).
linalg::Matrix classical_mds(const linalg::Matrix& distance);

TopicMapData topic_map(const TopicModel& model);

}  // namespace topictax
