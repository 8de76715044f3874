#include "topictax/terms.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topictax/errors.h"
#include "topictax/log.h"

namespace topictax {

double term_marginal(const TopicModel& model, TokenId w) {
  double p = 0.0;
  for (size_t t = 0; t < model.num_topics(); ++t) p += model.phi(t, w) * model.topic_marginal[t];
  return p;
}

TermTable term_saliency(const TopicModel& model, const Corpus& corpus) {
  const size_t k = model.num_topics();
  const size_t v = model.vocab_size();
  const auto& pt = model.topic_marginal;
  TermTable table;
  table.frequency.assign(v, 0.0);
  table.p_w.assign(v, 0.0);
  table.saliency.assign(v, 0.0);
  table.p_t_given_w = linalg::Matrix(v, k);
  auto tf = corpus.term_frequency();
  for (size_t w = 0; w < v; ++w) {
    TokenId c = corpus.find(model.vocab[w]);
    if (c < corpus.vocab_size()) table.frequency[w] = static_cast<double>(tf[c]);
    const double pw = term_marginal(model, static_cast<TokenId>(w));
    table.p_w[w] = pw;
    auto post = table.p_t_given_w.row(w);
    if (pw == 0.0) {
      std::copy(pt.begin(), pt.end(), post.begin());
      continue;
    }
    double s = 0.0;
    for (size_t t = 0; t < k; ++t) s += (post[t] = model.phi(t, w) * pt[t]);
    double kl = 0.0;
    for (size_t t = 0; t < k; ++t) {
      post[t] /= s;
      if (post[t] > 0.0) kl += post[t] * std::log(post[t] / pt[t]);
    }
    table.saliency[w] = table.frequency[w] * std::max(kl, 0.0);
  }
  return table;
}

double term_relevance(const TopicModel& model, TokenId w, size_t topic, double lambda,
                      RelevanceForm form) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must be in [0, 1]");
  if (topic >= model.num_topics() || w >= model.vocab_size()) throw ValidationError("relevance index out of range");
  const double pw = term_marginal(model, w);
  if (pw == 0.0) throw ValidationError("term absent from corpus");
  const double pwt = model.phi(topic, w);
  if (form == RelevanceForm::kLog) {
    return lambda * std::log(pwt) + (1.0 - lambda) * std::log(pwt / pw);
  }
  return lambda * pwt + (1.0 - lambda) * pwt / pw;
}

std::vector<TopicSummary> select_topic_concepts(const TopicModel& model, const Corpus& corpus,
                                                const ConceptOptions& options) {
  const size_t k = model.num_topics();
  const size_t v = model.vocab_size();
  if (v < options.n) throw ValidationError("vocabulary smaller than the concept count");
  TermTable table = term_saliency(model, corpus);
  const size_t pool_size = std::max(options.pool, options.n);

  // Relevance-ranked candidate pools.
  std::vector<std::vector<ConceptScore>> pools(k);
  for (size_t t = 0; t < k; ++t) {
    std::vector<TokenId> support;
    for (TokenId w = 0; w < v; ++w) {
      if (table.p_w[w] > 0.0 && model.phi(t, w) >= table.p_w[w]) support.push_back(w);
    }
    auto by_saliency = [&](TokenId a, TokenId b) {
      if (table.saliency[a] != table.saliency[b]) return table.saliency[a] > table.saliency[b];
      return model.vocab[a] < model.vocab[b];
    };
    size_t keep = std::min(pool_size, support.size());
    std::partial_sort(support.begin(), support.begin() + static_cast<long>(keep), support.end(), by_saliency);
    support.resize(keep);
    for (TokenId w : support) {
      ConceptScore s;
      s.term = model.vocab[w];
      s.id = w;
      s.saliency = table.saliency[w];
      s.relevance = term_relevance(model, w, t, options.lambda, options.form);
      s.p_w_given_t = model.phi(t, w);
      s.lift = model.phi(t, w) / table.p_w[w];
      pools[t].push_back(std::move(s));
    }
    std::stable_sort(pools[t].begin(), pools[t].end(), [](const ConceptScore& a, const ConceptScore& b) {
      if (a.relevance != b.relevance) return a.relevance > b.relevance;
      return a.term < b.term;
    });
  }

  // lost[t][i]: pool entry i of topic t went to another topic.
  std::vector<std::vector<bool>> lost(k);
  for (size_t t = 0; t < k; ++t) lost[t].assign(pools[t].size(), false);
  auto current = [&](size_t t) {
    std::vector<size_t> picks;
    for (size_t i = 0; i < pools[t].size() && picks.size() < options.n; ++i) {
      if (!lost[t][i]) picks.push_back(i);
    }
    return picks;
  };
  for (bool changed = true; changed;) {
    changed = false;
    // term id -> (topic, pool index) of every current holder
    std::vector<std::vector<std::pair<size_t, size_t>>> holders(v);
    for (size_t t = 0; t < k; ++t) {
      for (size_t i : current(t)) holders[pools[t][i].id].push_back({t, i});
    }
    for (const auto& h : holders) {
      if (h.size() < 2) continue;
      size_t win = 0;
      for (size_t j = 1; j < h.size(); ++j) {
        if (pools[h[j].first][h[j].second].relevance > pools[h[win].first][h[win].second].relevance) win = j;
      }
      for (size_t j = 0; j < h.size(); ++j) {
        if (j == win) continue;
        lost[h[j].first][h[j].second] = true;
        changed = true;
      }
    }
  }

  std::vector<TopicSummary> out(k);
  for (size_t t = 0; t < k; ++t) {
    out[t].topic = t;
    for (size_t i : current(t)) out[t].concepts.push_back(pools[t][i]);
    out[t].short_list = out[t].concepts.size() < options.n;
    if (out[t].short_list) {
      log::warn("topic " + std::to_string(t) + ": only " + std::to_string(out[t].concepts.size()) +
                " distinct concepts available");
    }
  }
  return out;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("jensen_shannon: length mismatch");
  double js = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double a = p[i] > 0.0 ? p[i] * std::log(p[i] / m) : 0.0;
    const double b = q[i] > 0.0 ? q[i] * std::log(q[i] / m) : 0.0;
    js += 0.5 * (a + b);
  }
  return std::clamp(js, 0.0, std::log(2.0));
}

linalg::Matrix classical_mds(const linalg::Matrix& distance) {
  const size_t n = distance.rows();
  linalg::Matrix coords(n, 2);
  if (n < 2) return coords;
  linalg::Matrix b(n, n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double d2 = distance(i, j) * distance(i, j);
      b(i, j) = d2;
      row_mean[i] += d2;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
  }
  auto eig = linalg::jacobi_eigen(b);
  for (size_t c = 0; c < 2 && c < n; ++c) {
    const double scale = std::sqrt(std::max(eig.values[c], 0.0));
    for (size_t i = 0; i < n; ++i) coords(i, c) = eig.vectors(c, i) * scale;
  }
  return coords;
}

TopicMapData topic_map(const TopicModel& model) {
  const size_t k = model.num_topics();
  if (k == 0) throw ValidationError("topic map needs at least one topic");
  TopicMapData map;
  map.distance = linalg::Matrix(k, k);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      map.distance(i, j) = map.distance(j, i) = jensen_shannon(model.phi.row(i), model.phi.row(j));
    }
  }
  map.coords = classical_mds(map.distance);
  map.proportions = model.topic_marginal;
  return map;
}

}  // namespace topictax
