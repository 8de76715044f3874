#include "topictax/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "topictax/errors.h"
#include "topictax/random.h"
#include "topictax/simd.h"

namespace topictax {
namespace {

using linalg::Matrix;
using nlohmann::json;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int32_t uniform_topic(std::mt19937_64& rng, size_t k) {
  return static_cast<int32_t>(uniform01(rng) * static_cast<double>(k));
}

// In-place prefix sum, then inverse-CDF draw.
int32_t draw(std::span<double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double& w : weights) {
    total += w;
    w = total;
  }
  double u = uniform01(rng) * total;
  for (size_t k = 0; k < weights.size(); ++k) {
    if (u < weights[k]) return static_cast<int32_t>(k);
  }
  return static_cast<int32_t>(weights.size() - 1);
}

void normalize_rows(Matrix& m) {
  for (size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double s = std::accumulate(row.begin(), row.end(), 0.0);
    if (s > 0.0) {
      for (double& x : row) x /= s;
    } else {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    }
  }
}

bool take_sample(int sweep, int iterations, int burn_in, int lag, int samples_so_far) {
  if (sweep > burn_in && (sweep - burn_in) % lag == 0) return true;
  return sweep == iterations && samples_so_far == 0;
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLda:
      return "lda";
    case ModelKind::kBiLda:
      return "bilda";
    case ModelKind::kLsi:
      return "lsi";
  }
  return "lda";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lda") return ModelKind::kLda;
  if (name == "bilda") return ModelKind::kBiLda;
  if (name == "lsi") return ModelKind::kLsi;
  throw ValidationError("unknown model kind \"" + std::string(name) + "\"");
}

void LdaConfig::validate() const {
  if (num_topics < 1) throw ValidationError("LDA: K must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ValidationError("LDA: alpha and beta must be > 0");
  if (burn_in < 0 || iterations <= burn_in) {
    throw ValidationError("LDA: need iterations > burn_in >= 0");
  }
  if (sample_lag < 1) throw ValidationError("LDA: sample_lag must be >= 1");
}

void LsiConfig::validate() const {
  if (num_topics < 1) throw ValidationError("LSI: K must be >= 1");
  if (oversampling < 0 || power_iters < 0) {
    throw ValidationError("LSI: oversampling and power_iters must be >= 0");
  }
}

double TopicModel::alpha() const {
  if (const auto* cfg = std::get_if<LdaConfig>(&config)) return cfg->alpha;
  return 0.1;
}

std::vector<double> token_weighted_marginal(const Matrix& theta, const Corpus& corpus) {
  const size_t k = theta.cols();
  std::vector<double> p(k, 0.0);
  double total = 0.0;
  for (size_t d = 0; d < std::min(theta.rows(), corpus.num_docs()); ++d) {
    double n = static_cast<double>(corpus.doc(d).size());
    if (n == 0.0) continue;
    for (size_t t = 0; t < k; ++t) p[t] += n * theta(d, t);
    total += n;
  }
  if (total == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
    return p;
  }
  double s = 0.0;
  for (double& x : p) {
    x /= total;
    s += x;
  }
  for (double& x : p) x /= s;
  return p;
}

TopicModel train_lda(const Corpus& corpus, const LdaConfig& config, ModelKind kind) {
  config.validate();
  if (kind == ModelKind::kLsi) throw ValidationError("train_lda cannot build an LSI model");
  const size_t k = static_cast<size_t>(config.num_topics);
  const size_t v = corpus.vocab_size();
  const size_t num_docs = corpus.num_docs();
  if (corpus.total_tokens() == 0) throw ValidationError("LDA: corpus has no tokens");
  if (k > v) throw ValidationError("K exceeds vocabulary");

  const auto& kern = simd::kernels();
  const double alpha = config.alpha;
  const double beta = config.beta;
  const double vbeta = static_cast<double>(v) * beta;

  std::vector<int32_t> doc_topic(num_docs * k, 0);
  std::vector<int32_t> word_topic(v * k, 0);
  std::vector<int32_t> topic_total(k, 0);
  std::vector<std::vector<int32_t>> z(num_docs);
  std::vector<std::mt19937_64> rngs;
  rngs.reserve(num_docs);

  std::vector<size_t> order(num_docs);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return corpus.doc_id(a) < corpus.doc_id(b); });

  for (size_t d = 0; d < num_docs; ++d) rngs.emplace_back(stream_seed(config.seed, corpus.doc_id(d)));
  for (size_t d : order) {
    auto doc = corpus.doc(d);
    z[d].resize(doc.size());
    for (size_t i = 0; i < doc.size(); ++i) {
      int32_t t = uniform_topic(rngs[d], k);
      z[d][i] = t;
      ++doc_topic[d * k + t];
      ++word_topic[doc[i] * k + t];
      ++topic_total[t];
    }
  }

  Matrix phi_acc(k, v);
  Matrix theta_acc(num_docs, k);
  int samples = 0;
  std::vector<double> weights(k);

  for (int sweep = 1; sweep <= config.iterations; ++sweep) {
    for (size_t d : order) {
      auto doc = corpus.doc(d);
      int32_t* nd = &doc_topic[d * k];
      auto& rng = rngs[d];
      for (size_t i = 0; i < doc.size(); ++i) {
        const TokenId w = doc[i];
        int32_t* nw = &word_topic[w * k];
        int32_t old = z[d][i];
        --nd[old];
        --nw[old];
        --topic_total[old];
        kern.gibbs_weights(nd, nw, topic_total.data(), alpha, beta, vbeta, weights.data(), k);
        int32_t t = draw(weights, rng);
        z[d][i] = t;
        ++nd[t];
        ++nw[t];
        ++topic_total[t];
      }
    }
    if (!take_sample(sweep, config.iterations, config.burn_in, config.sample_lag, samples)) continue;
    ++samples;
    for (size_t t = 0; t < k; ++t) {
      double denom = topic_total[t] + vbeta;
      auto row = phi_acc.row(t);
      for (size_t w = 0; w < v; ++w) row[w] += (word_topic[w * k + t] + beta) / denom;
    }
    for (size_t d = 0; d < num_docs; ++d) {
      double denom = static_cast<double>(corpus.doc(d).size()) + static_cast<double>(k) * alpha;
      for (size_t t = 0; t < k; ++t) theta_acc(d, t) += (doc_topic[d * k + t] + alpha) / denom;
    }
  }

  normalize_rows(phi_acc);
  normalize_rows(theta_acc);

  TopicModel model;
  model.kind = kind;
  model.config = config;
  model.vocab.assign(corpus.vocabulary().begin(), corpus.vocabulary().end());
  model.phi = std::move(phi_acc);
  model.theta = std::move(theta_acc);
  model.topic_marginal = token_weighted_marginal(model.theta, corpus);
  return model;
}

Matrix tfidf_matrix(const Corpus& corpus) {
  const size_t num_docs = corpus.num_docs();
  Matrix x(num_docs, corpus.vocab_size());
  auto df = corpus.document_frequency();
  const auto& dt = corpus.doc_term();
  for (size_t d = 0; d < num_docs; ++d) {
    auto cols = dt.row_cols(d);
    auto vals = dt.row_vals(d);
    double norm2 = 0.0;
    for (size_t i = 0; i < cols.size(); ++i) {
      double idf = std::log(static_cast<double>(num_docs) / static_cast<double>(df[cols[i]]));
      double val = static_cast<double>(vals[i]) * idf;
      x(d, cols[i]) = val;
      norm2 += val * val;
    }
    if (norm2 > 0.0) {
      double inv = 1.0 / std::sqrt(norm2);
      for (TokenId c : cols) x(d, c) *= inv;
    }
  }
  return x;
}

TopicModel train_lsi(const Corpus& corpus, const LsiConfig& config) {
  config.validate();
  const size_t k = static_cast<size_t>(config.num_topics);
  const size_t num_docs = corpus.num_docs();
  const size_t v = corpus.vocab_size();
  if (num_docs == 0 || v == 0) throw ValidationError("LSI: empty corpus");
  if (k > std::min(num_docs, v)) throw ValidationError("LSI: K exceeds min(D, V)");

  Matrix x = tfidf_matrix(corpus);
  linalg::SvdOptions opts;
  opts.rank = k;
  opts.oversampling = static_cast<size_t>(config.oversampling);
  opts.power_iters = config.power_iters;
  opts.seed = config.seed;
  linalg::TruncatedSvd svd = linalg::truncated_svd(x, opts);

  TopicModel model;
  model.kind = ModelKind::kLsi;
  model.config = config;
  model.vocab.assign(corpus.vocabulary().begin(), corpus.vocabulary().end());
  model.singular_values = svd.singular_values;
  model.zero_components.assign(k, false);
  model.phi = Matrix(k, v);
  model.theta = Matrix(num_docs, k);
  for (size_t t = 0; t < k; ++t) {
    bool zero = svd.singular_values[t] == 0.0;
    model.zero_components[t] = zero;
    for (size_t w = 0; w < v; ++w) model.phi(t, w) = zero ? 1.0 : std::abs(svd.right(t, w));
    for (size_t d = 0; d < num_docs; ++d) {
      model.theta(d, t) = std::abs(svd.left(t, d)) * svd.singular_values[t];
    }
  }
  normalize_rows(model.phi);
  normalize_rows(model.theta);
  model.topic_marginal = token_weighted_marginal(model.theta, corpus);
  return model;
}

std::vector<TokenId> top_terms(const TopicModel& model, size_t topic, size_t n) {
  if (topic >= model.num_topics()) {
    throw ValidationError("topic index " + std::to_string(topic) + " out of range");
  }
  const size_t v = model.vocab_size();
  n = std::min(n, v);
  std::vector<TokenId> ids(v);
  std::iota(ids.begin(), ids.end(), 0);
  auto row = model.phi.row(topic);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](TokenId a, TokenId b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return model.vocab[a] < model.vocab[b];
                    });
  ids.resize(n);
  return ids;
}

std::vector<double> infer_doc_topics(const TopicModel& model, std::span<const TokenId> doc,
                                     const InferenceOptions& options) {
  if (model.kind == ModelKind::kLsi) throw ValidationError("inference undefined for LSI");
  const size_t k = model.num_topics();
  const size_t v = model.vocab_size();
  std::vector<TokenId> tokens;
  tokens.reserve(doc.size());
  for (TokenId t : doc) {
    if (t < v) tokens.push_back(t);
  }
  std::vector<double> theta(k, 1.0 / static_cast<double>(k));
  if (tokens.empty()) return theta;

  // Dense phi columns for the words this document uses.
  std::vector<TokenId> distinct = tokens;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> columns(distinct.size() * k);
  std::vector<size_t> slot(tokens.size());
  for (size_t j = 0; j < distinct.size(); ++j) {
    for (size_t t = 0; t < k; ++t) columns[j * k + t] = model.phi(t, distinct[j]);
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    slot[i] = static_cast<size_t>(std::lower_bound(distinct.begin(), distinct.end(), tokens[i]) -
                                  distinct.begin());
  }

  std::string key(reinterpret_cast<const char*>(tokens.data()), tokens.size() * sizeof(TokenId));
  std::mt19937_64 rng(stream_seed(options.seed, key));
  const auto& kern = simd::kernels();
  const double alpha = model.alpha();

  std::vector<int32_t> counts(k, 0);
  std::vector<int32_t> z(tokens.size());
  for (auto& zi : z) {
    zi = uniform_topic(rng, k);
    ++counts[static_cast<size_t>(zi)];
  }
  std::vector<double> acc(k, 0.0);
  std::vector<double> weights(k);
  int samples = 0;
  const int iterations = std::max(options.iterations, 1);
  const int burn_in = std::clamp(options.burn_in, 0, iterations - 1);
  const int lag = std::max(options.sample_lag, 1);
  for (int sweep = 1; sweep <= iterations; ++sweep) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      --counts[static_cast<size_t>(z[i])];
      kern.foldin_weights(counts.data(), &columns[slot[i] * k], alpha, weights.data(), k);
      z[i] = draw(weights, rng);
      ++counts[static_cast<size_t>(z[i])];
    }
    if (!take_sample(sweep, iterations, burn_in, lag, samples)) continue;
    ++samples;
    double denom = static_cast<double>(tokens.size()) + static_cast<double>(k) * alpha;
    for (size_t t = 0; t < k; ++t) acc[t] += (counts[t] + alpha) / denom;
  }
  double s = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (size_t t = 0; t < k; ++t) theta[t] = acc[t] / s;
  return theta;
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

Matrix matrix_from_json(const json& rows, size_t cols_hint) {
  size_t cols = rows.empty() ? cols_hint : rows.at(0).size();
  Matrix m(rows.size(), cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ValidationError("ragged matrix in model file");
    for (size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

}  // namespace

void save_model_json(const TopicModel& model, const std::filesystem::path& path) {
  json cfg;
  if (const auto* lda = std::get_if<LdaConfig>(&model.config)) {
    cfg = {{"K", lda->num_topics},      {"alpha", lda->alpha},   {"beta", lda->beta},
           {"iterations", lda->iterations}, {"burn_in", lda->burn_in},
           {"sample_lag", lda->sample_lag}, {"seed", lda->seed}};
  } else {
    const auto& lsi = std::get<LsiConfig>(model.config);
    cfg = {{"K", lsi.num_topics},
           {"oversampling", lsi.oversampling},
           {"power_iters", lsi.power_iters},
           {"seed", lsi.seed}};
  }
  json doc = {{"kind", model_kind_name(model.kind)},
              {"config", cfg},
              {"vocab", model.vocab},
              {"phi", matrix_json(model.phi)},
              {"theta", matrix_json(model.theta)},
              {"topic_marginal", model.topic_marginal}};
  if (model.kind == ModelKind::kLsi) {
    doc["singular_values"] = model.singular_values;
    doc["zero_components"] = model.zero_components;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

TopicModel load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  try {
    json doc = json::parse(in);
    TopicModel model;
    model.kind = parse_model_kind(doc.at("kind").get<std::string>());
    const json& cfg = doc.at("config");
    if (model.kind == ModelKind::kLsi) {
      LsiConfig lsi;
      lsi.num_topics = cfg.at("K");
      lsi.oversampling = cfg.at("oversampling");
      lsi.power_iters = cfg.at("power_iters");
      lsi.seed = cfg.at("seed");
      model.config = lsi;
      model.singular_values = doc.at("singular_values").get<std::vector<double>>();
      model.zero_components = doc.at("zero_components").get<std::vector<bool>>();
    } else {
      LdaConfig lda;
      lda.num_topics = cfg.at("K");
      lda.alpha = cfg.at("alpha");
      lda.beta = cfg.at("beta");
      lda.iterations = cfg.at("iterations");
      lda.burn_in = cfg.at("burn_in");
      lda.sample_lag = cfg.at("sample_lag");
      lda.seed = cfg.at("seed");
      model.config = lda;
    }
    model.vocab = doc.at("vocab").get<std::vector<std::string>>();
    model.phi = matrix_from_json(doc.at("phi"), model.vocab.size());
    model.theta = matrix_from_json(doc.at("theta"), model.phi.rows());
    model.topic_marginal = doc.at("topic_marginal").get<std::vector<double>>();
    if (model.phi.cols() != model.vocab.size() || model.topic_marginal.size() != model.phi.rows()) {
      throw ValidationError(path.string() + ": inconsistent model dimensions");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace topictax
