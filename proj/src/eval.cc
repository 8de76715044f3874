#include "topictax/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "topictax/errors.h"
#include "topictax/log.h"
#include "topictax/parallel.h"

namespace topictax {

PerplexityResult perplexity(const TopicModel& model, std::span<const std::vector<TokenId>> docs,
                            const InferenceOptions& options) {
  const size_t k = model.num_topics();
  const size_t v = model.vocab_size();
  // Extended precision keeps exp(-mean log p) within rounding of the exact
  // geometric mean, e.g. a uniform model over V words scores exactly V.
  long double ll = 0.0L;
  uint64_t n = 0;
  for (const auto& doc : docs) {
    std::vector<double> theta = model.kind == ModelKind::kLsi ? model.topic_marginal
                                                              : infer_doc_topics(model, doc, options);
    long double doc_ll = 0.0L;
    for (TokenId w : doc) {
      if (w >= v) continue;
      double p = 0.0;
      for (size_t t = 0; t < k; ++t) p += theta[t] * model.phi(t, w);
      doc_ll += std::log(static_cast<long double>(p));
      ++n;
    }
    ll += doc_ll;
  }
  if (n == 0) throw ValidationError("no in-vocabulary tokens");
  PerplexityResult r;
  r.tokens = n;
  const long double mean = ll / static_cast<long double>(n);
  r.log_likelihood_per_word = static_cast<double>(mean);
  r.perplexity = static_cast<double>(std::exp(-mean));
  return r;
}

CooccurrenceStats::CooccurrenceStats(const Corpus& corpus, std::span<const TokenId> words,
                                     size_t window, double epsilon)
    : window_(window), epsilon_(epsilon), words_(words.begin(), words.end()) {
  if (window == 0) throw ValidationError("coherence window must be positive");
  const size_t m = words_.size();
  pair_counts_.assign(m * m, 0);
  std::vector<int32_t> local(corpus.vocab_size(), -1);
  for (size_t i = 0; i < m; ++i) {
    if (words_[i] >= corpus.vocab_size()) throw ValidationError("tracked word outside vocabulary");
    if (local[words_[i]] >= 0) throw ValidationError("tracked words must be distinct");
    local[words_[i]] = static_cast<int32_t>(i);
  }

  std::vector<uint32_t> in_window(m, 0);
  std::vector<uint32_t> present;
  std::vector<size_t> where(m, 0);
  auto add = [&](TokenId w) {
    int32_t i = local[w];
    if (i < 0) return;
    if (in_window[i]++ == 0) {
      where[i] = present.size();
      present.push_back(static_cast<uint32_t>(i));
    }
  };
  auto remove = [&](TokenId w) {
    int32_t i = local[w];
    if (i < 0) return;
    if (--in_window[i] == 0) {
      uint32_t last = present.back();
      present[where[i]] = last;
      where[last] = where[i];
      present.pop_back();
    }
  };
  auto record = [&] {
    ++total_windows_;
    for (size_t a = 0; a < present.size(); ++a) {
      const size_t i = present[a];
      ++pair_counts_[i * m + i];
      for (size_t b = a + 1; b < present.size(); ++b) {
        const size_t j = present[b];
        ++pair_counts_[i * m + j];
        ++pair_counts_[j * m + i];
      }
    }
  };

  for (const auto& doc : corpus.docs()) {
    if (doc.empty()) continue;
    const size_t span = std::min(window, doc.size());
    for (size_t p = 0; p < span; ++p) add(doc[p]);
    record();
    for (size_t p = span; p < doc.size(); ++p) {
      remove(doc[p - span]);
      add(doc[p]);
      record();
    }
    for (size_t p = doc.size() - span; p < doc.size(); ++p) remove(doc[p]);
  }
}

double CooccurrenceStats::npmi(size_t i, size_t j) const {
  if (total_windows_ == 0) return 0.0;
  const double total = static_cast<double>(total_windows_);
  const double pa = static_cast<double>(count(i)) / total;
  const double pb = static_cast<double>(count(j)) / total;
  if (pa == 0.0 || pb == 0.0) return 0.0;
  const double pab = static_cast<double>(pair_count(i, j)) / total + epsilon_;
  const double den = -std::log(pab);
  if (den == 0.0) return 1.0;
  return std::log(pab / (pa * pb)) / den;
}

CoherenceResult coherence_cv(const TopicModel& model, const Corpus& corpus, size_t top_n,
                             size_t window) {
  const size_t k = model.num_topics();
  std::vector<std::vector<TokenId>> topic_words(k);
  std::vector<TokenId> tracked;
  for (size_t t = 0; t < k; ++t) {
    for (TokenId id : top_terms(model, t, top_n)) {
      TokenId c = corpus.find(model.vocab[id]);
      if (c >= corpus.vocab_size()) continue;
      topic_words[t].push_back(c);
      tracked.push_back(c);
    }
  }
  std::sort(tracked.begin(), tracked.end());
  tracked.erase(std::unique(tracked.begin(), tracked.end()), tracked.end());
  CooccurrenceStats stats(corpus, tracked, window);
  auto pos = [&](TokenId c) {
    return static_cast<size_t>(std::lower_bound(tracked.begin(), tracked.end(), c) - tracked.begin());
  };

  CoherenceResult result;
  result.per_topic.assign(k, 0.0);
  result.flagged.assign(k, false);
  for (size_t t = 0; t < k; ++t) {
    const size_t m = topic_words[t].size();
    if (m < 2) {
      result.flagged[t] = true;
      log::warn("coherence: topic " + std::to_string(t) + " has fewer than 2 usable top words");
      continue;
    }
    std::vector<size_t> idx(m);
    for (size_t a = 0; a < m; ++a) idx[a] = pos(topic_words[t][a]);
    std::vector<double> vecs(m * m);
    std::vector<double> sum(m, 0.0);
    for (size_t a = 0; a < m; ++a) {
      for (size_t b = 0; b < m; ++b) {
        vecs[a * m + b] = stats.npmi(idx[a], idx[b]);
        sum[b] += vecs[a * m + b];
      }
    }
    double sum_norm = 0.0;
    for (double x : sum) sum_norm += x * x;
    sum_norm = std::sqrt(sum_norm);
    double acc = 0.0;
    for (size_t a = 0; a < m; ++a) {
      double dot = 0.0, norm = 0.0;
      for (size_t b = 0; b < m; ++b) {
        dot += vecs[a * m + b] * sum[b];
        norm += vecs[a * m + b] * vecs[a * m + b];
      }
      norm = std::sqrt(norm);
      if (norm > 0.0 && sum_norm > 0.0) acc += std::clamp(dot / (norm * sum_norm), -1.0, 1.0);
    }
    result.per_topic[t] = acc / static_cast<double>(m);
  }
  result.score = k == 0 ? 0.0
                        : std::accumulate(result.per_topic.begin(), result.per_topic.end(), 0.0) /
                              static_cast<double>(k);
  return result;
}

std::vector<int> SelectionGrid::k_range(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

void SelectionGrid::validate() const {
  if (variants.empty()) throw ValidationError("selection grid: empty algorithm set");
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (v.name.empty() || v.family.empty()) throw ValidationError("selection grid: unnamed variant");
    if (!names.insert(v.name).second) throw ValidationError("selection grid: duplicate variant " + v.name);
  }
  if (k_pilot < 1) throw ValidationError("selection grid: k_pilot must be >= 1");
  if (k_values.empty()) throw ValidationError("selection grid: empty K range");
  for (size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 1 || (i > 0 && k_values[i] <= k_values[i - 1])) {
      throw ValidationError("selection grid: K values must be positive and ascending");
    }
  }
}

namespace {

EvalCell run_cell(const CellEvaluator& evaluate, const GridVariant& variant, int k) {
  EvalCell cell;
  try {
    cell = evaluate(variant, k);
    if (!std::isfinite(cell.coherence)) throw StageError("non-finite coherence");
  } catch (const std::exception& e) {
    cell = EvalCell{};
    cell.failed = true;
    cell.error = e.what();
    log::warn("grid cell " + variant.name + " K=" + std::to_string(k) + " failed: " + e.what());
  }
  cell.algorithm = variant.name;
  cell.k = k;
  return cell;
}

// Index of the best successful cell: highest coherence, then smaller K, then
// earlier position. -1 when every cell failed.
long best_index(const std::vector<EvalCell>& cells) {
  long best = -1;
  for (size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (c.failed) continue;
    if (best < 0) {
      best = static_cast<long>(i);
      continue;
    }
    const auto& b = cells[static_cast<size_t>(best)];
    if (c.coherence > b.coherence || (c.coherence == b.coherence && c.k < b.k)) {
      best = static_cast<long>(i);
    }
  }
  return best;
}

}  // namespace

SelectionResult select_model(const SelectionGrid& grid, const CellEvaluator& evaluate, int jobs) {
  grid.validate();
  SelectionResult result;
  result.stage1.resize(grid.variants.size());
  parallel_for(grid.variants.size(), jobs, [&](size_t i) {
    result.stage1[i] = run_cell(evaluate, grid.variants[i], grid.k_pilot);
  });
  long s1 = best_index(result.stage1);
  if (s1 < 0) throw StageError("selection stage 1: every cell failed");
  result.best_family = grid.variants[static_cast<size_t>(s1)].family;

  struct Slot {
    size_t variant;
    int k;
    long reuse;
  };
  std::vector<Slot> slots;
  for (size_t v = 0; v < grid.variants.size(); ++v) {
    if (grid.variants[v].family != result.best_family) continue;
    for (int k : grid.k_values) slots.push_back({v, k, k == grid.k_pilot ? static_cast<long>(v) : -1});
  }
  result.stage2.resize(slots.size());
  std::vector<size_t> pending;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].reuse >= 0) {
      result.stage2[i] = result.stage1[static_cast<size_t>(slots[i].reuse)];
    } else {
      pending.push_back(i);
    }
  }
  parallel_for(pending.size(), jobs, [&](size_t p) {
    const Slot& s = slots[pending[p]];
    result.stage2[pending[p]] = run_cell(evaluate, grid.variants[s.variant], s.k);
  });
  long s2 = best_index(result.stage2);
  if (s2 < 0) throw StageError("selection stage 2: every cell failed");
  result.best_cell = result.stage2[static_cast<size_t>(s2)];
  result.best_variant = result.best_cell.algorithm;
  result.k_best = result.best_cell.k;
  return result;
}

std::vector<GridVariant> default_variants() {
  return {{"lda", "LDA"}, {"bilda", "LDA"}, {"lsi", "LSI"}};
}

std::vector<size_t> heldout_split(size_t num_docs, double fraction, uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("held-out fraction must be in [0, 1)");
  std::vector<size_t> order(num_docs);
  std::iota(order.begin(), order.end(), 0);
  // Explicit Fisher-Yates: std::shuffle's draw sequence is library-specific.
  std::mt19937_64 rng(seed);
  for (size_t i = num_docs; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  size_t n = static_cast<size_t>(std::ceil(fraction * static_cast<double>(num_docs)));
  if (num_docs > 1) n = std::clamp<size_t>(n, 1, num_docs - 1);
  else n = 0;
  order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

TopicModel train_variant(const std::string& variant, int k, const Corpus& corpus,
                         const GridTraining& training) {
  if (variant == "lda" || variant == "bilda") {
    LdaConfig cfg = training.lda;
    cfg.num_topics = k;
    return train_lda(corpus, cfg, variant == "lda" ? ModelKind::kLda : ModelKind::kBiLda);
  }
  if (variant == "lsi") {
    LsiConfig cfg = training.lsi;
    cfg.num_topics = k;
    return train_lsi(corpus, cfg);
  }
  throw ValidationError("unknown algorithm \"" + variant + "\"");
}

EvalCell evaluate_cell(const GridVariant& variant, int k, const Corpus& unigram, const Corpus* bigram,
                       const GridTraining& training) {
  const Corpus* corpus = &unigram;
  if (variant.name == "bilda") {
    if (bigram == nullptr) throw ValidationError("bilda requires a bigram corpus");
    corpus = bigram;
  }
  auto held = heldout_split(corpus->num_docs(), training.heldout_fraction, training.split_seed);
  std::vector<size_t> train_idx;
  std::vector<std::vector<TokenId>> held_docs;
  for (size_t d = 0, h = 0; d < corpus->num_docs(); ++d) {
    if (h < held.size() && held[h] == d) {
      held_docs.emplace_back(corpus->doc(d).begin(), corpus->doc(d).end());
      ++h;
    } else {
      train_idx.push_back(d);
    }
  }
  Corpus train = corpus->subset(train_idx);
  if (held_docs.empty()) {
    for (const auto& d : train.docs()) held_docs.push_back(d);
  }
  TopicModel model = train_variant(variant.name, k, train, training);

  EvalCell cell;
  cell.algorithm = variant.name;
  cell.k = k;
  cell.coherence = coherence_cv(model, *corpus, training.top_n, training.window).score;
  auto p = perplexity(model, held_docs, training.inference);
  cell.perplexity = p.perplexity;
  cell.log_likelihood_per_word = p.log_likelihood_per_word;
  log::info("cell " + variant.name + " K=" + std::to_string(k) + " C_v=" + std::to_string(cell.coherence));
  return cell;
}

SelectionResult run_selection_grid(const Corpus& unigram, const Corpus* bigram, const SelectionGrid& grid,
                                   const GridTraining& training, int jobs) {
  return select_model(
      grid,
      [&](const GridVariant& v, int k) { return evaluate_cell(v, k, unigram, bigram, training); },
      jobs);
}

std::string eval_grid_csv(const std::vector<EvalCell>& cells) {
  std::string out = "algorithm,k,coherence,perplexity,log_likelihood_per_word\n";
  std::set<std::pair<std::string, int>> seen;
  char buf[128];
  for (const auto& c : cells) {
    if (!seen.insert({c.algorithm, c.k}).second) continue;
    out += c.algorithm + "," + std::to_string(c.k);
    if (c.failed) {
      out += ",,,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", c.coherence, c.perplexity,
                  c.log_likelihood_per_word);
    out += buf;
  }
  return out;
}

}  // namespace topictax
