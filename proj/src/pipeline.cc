#include "topictax/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "topictax/errors.h"
#include "topictax/eval.h"
#include "topictax/log.h"
#include "topictax/taxo.h"

namespace topictax {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << bytes;
  if (!out) throw StageError("write failed: " + path.string());
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("not a boolean: \"" + v + "\"");
}

template <typename T>
T parse_number(const std::string& v) {
  try {
    return boost::lexical_cast<T>(v);
  } catch (const boost::bad_lexical_cast&) {
    throw ValidationError("not a number: \"" + v + "\"");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',') {
      auto b = cur.find_first_not_of(" \t"), e = cur.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(PipelineConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;  // null: left out of the snapshot
};

fs::path resolve(const std::string& v, const fs::path& base) {
  if (v.empty()) return {};
  fs::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
Key number_key(const char* section, const char* name, T PipelineConfig::*field) {
  return {section, name,
          [field](PipelineConfig& c, const std::string& v, const fs::path&) { c.*field = parse_number<T>(v); },
          [field](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*field);
            else return std::to_string(c.*field);
          }};
}

template <typename S, typename T>
Key nested_key(const char* section, const char* name, S PipelineConfig::*outer, T S::*field) {
  return {section, name,
          [outer, field](PipelineConfig& c, const std::string& v, const fs::path&) {
            if constexpr (std::is_same_v<T, bool>) c.*outer.*field = parse_bool(v);
            else c.*outer.*field = parse_number<T>(v);
          },
          [outer, field](const PipelineConfig& c) {
            if constexpr (std::is_same_v<T, bool>) return std::string((c.*outer).*field ? "true" : "false");
            else if constexpr (std::is_floating_point_v<T>) return fmt_double((c.*outer).*field);
            else return std::to_string((c.*outer).*field);
          }};
}

Key bool_key(const char* section, const char* name, bool PipelineConfig::*field) {
  return {section, name, [field](PipelineConfig& c, const std::string& v, const fs::path&) { c.*field = parse_bool(v); },
          [field](const PipelineConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

const std::vector<Key>& config_keys() {
  static const std::vector<Key> keys = {
      {"corpus", "path", [](PipelineConfig& c, const std::string& v, const fs::path& b) { c.corpus = resolve(v, b); },
       nullptr},
      {"corpus", "reference",
       [](PipelineConfig& c, const std::string& v, const fs::path& b) { c.reference = resolve(v, b); },
       [](const PipelineConfig& c) { return c.reference.empty() ? std::string() : sha256_file(c.reference); }},
      {"run", "seed", [](PipelineConfig& c, const std::string& v, const fs::path&) { c.seed = parse_number<uint64_t>(v); },
       [](const PipelineConfig& c) { return std::to_string(c.seed); }},
      {"run", "out_dir", [](PipelineConfig& c, const std::string& v, const fs::path& b) { c.out_dir = resolve(v, b); },
       nullptr},
      {"run", "jobs", [](PipelineConfig& c, const std::string& v, const fs::path&) { c.jobs = parse_number<int>(v); },
       nullptr},
      number_key("preprocess", "min_token_len", &PipelineConfig::min_token_len),
      bool_key("preprocess", "drop_numeric", &PipelineConfig::drop_numeric),
      {"preprocess", "stopwords",
       [](PipelineConfig& c, const std::string& v, const fs::path& b) { c.extra_stopwords = resolve(v, b); },
       [](const PipelineConfig& c) {
         return c.extra_stopwords.empty() ? std::string() : sha256_file(c.extra_stopwords);
       }},
      number_key("preprocess", "min_doc_freq", &PipelineConfig::min_doc_freq),
      bool_key("bigram", "enabled", &PipelineConfig::bigrams),
      nested_key("bigram", "min_count", &PipelineConfig::bigram, &BigramPolicy::min_count),
      nested_key("bigram", "threshold", &PipelineConfig::bigram, &BigramPolicy::threshold),
      nested_key("bigram", "keep_unigrams", &PipelineConfig::bigram, &BigramPolicy::keep_unigrams),
      nested_key("lda", "alpha", &PipelineConfig::lda, &LdaConfig::alpha),
      nested_key("lda", "beta", &PipelineConfig::lda, &LdaConfig::beta),
      nested_key("lda", "iterations", &PipelineConfig::lda, &LdaConfig::iterations),
      nested_key("lda", "burn_in", &PipelineConfig::lda, &LdaConfig::burn_in),
      nested_key("lda", "sample_lag", &PipelineConfig::lda, &LdaConfig::sample_lag),
      nested_key("lsi", "oversampling", &PipelineConfig::lsi, &LsiConfig::oversampling),
      nested_key("lsi", "power_iters", &PipelineConfig::lsi, &LsiConfig::power_iters),
      nested_key("inference", "iterations", &PipelineConfig::inference, &InferenceOptions::iterations),
      nested_key("inference", "burn_in", &PipelineConfig::inference, &InferenceOptions::burn_in),
      nested_key("inference", "sample_lag", &PipelineConfig::inference, &InferenceOptions::sample_lag),
      {"grid", "variants",
       [](PipelineConfig& c, const std::string& v, const fs::path&) { c.variants = split_list(v); },
       [](const PipelineConfig& c) {
         std::string out;
         for (const auto& v : c.variants) out += (out.empty() ? "" : ",") + v;
         return out;
       }},
      number_key("grid", "k_pilot", &PipelineConfig::k_pilot),
      number_key("grid", "k_min", &PipelineConfig::k_min),
      number_key("grid", "k_max", &PipelineConfig::k_max),
      number_key("grid", "heldout_fraction", &PipelineConfig::heldout_fraction),
      number_key("grid", "top_n", &PipelineConfig::top_n),
      number_key("grid", "window", &PipelineConfig::window),
      {"train", "variant", [](PipelineConfig& c, const std::string& v, const fs::path&) { c.train_variant = v; },
       [](const PipelineConfig& c) { return c.train_variant; }},
      number_key("train", "k", &PipelineConfig::train_k),
      number_key("terms", "lambda", &PipelineConfig::lambda),
      number_key("terms", "concepts", &PipelineConfig::concepts),
      number_key("terms", "pool", &PipelineConfig::pool),
      {"terms", "relevance",
       [](PipelineConfig& c, const std::string& v, const fs::path&) {
         if (v == "linear") c.relevance = RelevanceForm::kLinear;
         else if (v == "log") c.relevance = RelevanceForm::kLog;
         else throw ValidationError("relevance must be linear or log");
       },
       [](const PipelineConfig& c) { return std::string(c.relevance == RelevanceForm::kLog ? "log" : "linear"); }},
      bool_key("kg", "cross_topic_only", &PipelineConfig::cross_topic_only),
      nested_key("kg", "spring_length", &PipelineConfig::spring, &SpringOptions::spring_length),
      nested_key("kg", "max_iterations", &PipelineConfig::spring, &SpringOptions::max_iterations),
      nested_key("kg", "tolerance", &PipelineConfig::spring, &SpringOptions::tolerance),
      nested_key("kg", "padding", &PipelineConfig::spring, &SpringOptions::padding),
  };
  return keys;
}

GridTraining grid_training(const PipelineConfig& c) {
  GridTraining t;
  t.lda = c.lda;
  t.lda.seed = c.seed;
  t.lsi = c.lsi;
  t.lsi.seed = c.seed;
  t.inference = c.inference;
  t.inference.seed = c.seed;
  t.top_n = c.top_n;
  t.window = c.window;
  t.heldout_fraction = c.heldout_fraction;
  t.split_seed = c.seed;
  return t;
}

}  // namespace

void PipelineConfig::validate() const {
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  if (min_token_len < 1) throw ValidationError("min_token_len must be at least 1");
  if (bigrams) bigram.validate();
  LdaConfig l = lda;
  l.num_topics = std::max(k_pilot, 1);
  l.validate();
  LsiConfig s = lsi;
  s.num_topics = std::max(k_pilot, 1);
  s.validate();
  if (variants.empty()) throw ValidationError("no grid variants");
  std::set<std::string> known{"lda", "bilda", "lsi"}, seen;
  for (const auto& v : variants) {
    if (!known.count(v)) throw ValidationError("unknown grid variant \"" + v + "\"");
    if (!seen.insert(v).second) throw ValidationError("duplicate grid variant \"" + v + "\"");
    if (v == "bilda" && !bigrams) throw ValidationError("variant bilda needs [bigram] enabled = true");
  }
  if (!train_variant.empty() && !known.count(train_variant)) {
    throw ValidationError("unknown train variant \"" + train_variant + "\"");
  }
  if (train_variant == "bilda" && !bigrams) throw ValidationError("variant bilda needs [bigram] enabled = true");
  if (train_k < 0) throw ValidationError("train k must be nonnegative");
  if (k_min < 1 || k_max < k_min || k_pilot < 1) throw ValidationError("invalid K range");
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) throw ValidationError("heldout_fraction must be in [0, 1)");
  if (top_n < 2 || window < 1) throw ValidationError("top_n must be at least 2 and window at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must be in [0, 1]");
  if (concepts < 1) throw ValidationError("concepts must be at least 1");
  if (spring.max_iterations < 0 || !(spring.spring_length > 0.0) || !(spring.tolerance >= 0.0)) {
    throw ValidationError("invalid spring layout options");
  }
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  PipelineConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError("config: key \"" + section + "\" outside any section");
    }
    for (const auto& [name, value] : body) {
      auto it = std::find_if(config_keys().begin(), config_keys().end(),
                             [&](const Key& k) { return section == k.section && name == k.name; });
      if (it == config_keys().end()) throw ValidationError("config: unknown key [" + section + "] " + name);
      try {
        it->set(config, value.data(), base_dir);
      } catch (const ValidationError& e) {
        throw ValidationError("config: [" + section + "] " + name + ": " + e.what());
      }
    }
  }
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string config_text(const PipelineConfig& config) {
  std::string out, section;
  for (const auto& k : config_keys()) {
    if (!k.get) continue;
    if (section != k.section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(k.name) + " = " + k.get(config) + "\n";
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw StageError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::kIngest, Stage::kGrid, Stage::kTrain,   Stage::kTerms,
                                            Stage::kMap,    Stage::kKg,   Stage::kCompare, Stage::kReport};
  return stages;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kGrid: return "grid";
    case Stage::kTrain: return "train";
    case Stage::kTerms: return "terms";
    case Stage::kMap: return "map";
    case Stage::kKg: return "kg";
    case Stage::kCompare: return "compare";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : all_stages()) {
    if (stage_name(s) == name) return s;
  }
  throw ValidationError("unknown stage \"" + std::string(name) + "\"");
}

std::vector<std::string> stage_outputs(Stage stage, const PipelineConfig& config) {
  switch (stage) {
    case Stage::kIngest:
      if (config.bigrams) return {"corpus.json", "corpus_bigram.json", "ingest.json"};
      return {"corpus.json", "ingest.json"};
    case Stage::kGrid: return {"eval_grid.csv", "selection.json"};
    case Stage::kTrain: return {"model.json"};
    case Stage::kTerms: return {"concepts.json", "concepts.csv"};
    case Stage::kMap: return {"topic_map.json"};
    case Stage::kKg: return {"triples.csv", "kg_edges.csv", "kg.dot", "kg.json", "kg_layout.json"};
    case Stage::kCompare:
      if (config.reference.empty()) return {};
      return {"taxonomy.json", "taxonomy_report.json"};
    case Stage::kReport: return {"report.html"};
  }
  return {};
}

std::map<std::string, std::string> RunManifest::digests() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stages) out.insert(s.outputs.begin(), s.outputs.end());
  return out;
}

const StageRecord* RunManifest::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

std::string manifest_json(const RunManifest& m) {
  ordered_json doc;
  doc["tool"] = "topictax";
  doc["version"] = m.version;
  doc["config_digest"] = m.config_digest;
  doc["config"] = m.config;
  doc["stages"] = ordered_json::array();
  for (const auto& s : m.stages) {
    ordered_json r;
    r["name"] = s.name;
    r["status"] = s.status;
    r["seconds"] = s.seconds;
    r["outputs"] = ordered_json::object();
    for (const auto& [file, digest] : s.outputs) r["outputs"][file] = digest;
    if (!s.error.empty()) r["error"] = s.error;
    doc["stages"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest_json(std::string_view text) {
  try {
    auto doc = json::parse(text);
    RunManifest m;
    m.version = doc.at("version").get<std::string>();
    m.config_digest = doc.at("config_digest").get<std::string>();
    m.config = doc.at("config").get<std::string>();
    for (const auto& r : doc.at("stages")) {
      StageRecord s;
      s.name = r.at("name").get<std::string>();
      s.status = r.at("status").get<std::string>();
      s.seconds = r.at("seconds").get<double>();
      s.outputs = r.at("outputs").get<std::map<std::string, std::string>>();
      s.error = r.value("error", std::string());
      m.stages.push_back(std::move(s));
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

namespace {

constexpr const char* kManifest = "manifest.json";

std::string run_digest(const PipelineConfig& config) {
  return sha256_hex(config_text(config) + "\n[corpus]\nsha256 = " + sha256_file(config.corpus) + "\n");
}

void require_corpus(const PipelineConfig& config) {
  if (config.corpus.empty()) throw ValidationError("no corpus path given");
  std::ifstream in(config.corpus, std::ios::binary);
  if (!in || fs::is_directory(config.corpus)) throw ValidationError("cannot read corpus file " + config.corpus.string());
}

void require(const fs::path& dir, const std::string& file, Stage producer) {
  if (!fs::exists(dir / file)) {
    throw ValidationError("missing " + (dir / file).string() + "; run the " + std::string(stage_name(producer)) +
                          " stage first");
  }
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ordered_json cell_json(const EvalCell& c) {
  ordered_json j;
  j["algorithm"] = c.algorithm;
  j["k"] = c.k;
  j["failed"] = c.failed;
  if (c.failed) {
    j["error"] = c.error;
  } else {
    j["coherence"] = c.coherence;
    j["perplexity"] = c.perplexity;
    j["log_likelihood_per_word"] = c.log_likelihood_per_word;
  }
  return j;
}

Corpus corpus_for(const fs::path& dir, ModelKind kind) {
  if (kind == ModelKind::kBiLda) {
    require(dir, "corpus_bigram.json", Stage::kIngest);
    return load_corpus_json(dir / "corpus_bigram.json");
  }
  require(dir, "corpus.json", Stage::kIngest);
  return load_corpus_json(dir / "corpus.json");
}

TopicModel load_trained(const fs::path& dir) {
  require(dir, "model.json", Stage::kTrain);
  return load_model_json(dir / "model.json");
}

void stage_ingest(const PipelineConfig& c, const fs::path& dir) {
  Staging staging = ingest_corpus(read_jsonl(c.corpus));
  PreprocessRules rules = PreprocessRules::defaults();
  rules.min_token_len = c.min_token_len;
  rules.drop_numeric = c.drop_numeric;
  if (!c.extra_stopwords.empty()) rules.add_stopwords(read_file(c.extra_stopwords));
  preprocess_staging(staging, rules);
  Corpus uni = build_doc_term_matrix(staging, c.min_doc_freq);
  save_corpus_json(uni, dir / "corpus.json");
  ordered_json stats;
  stats["documents"] = uni.num_docs();
  stats["sentences"] = uni.sentences().size();
  stats["tokens"] = uni.total_tokens();
  stats["vocabulary"] = uni.vocab_size();
  if (c.bigrams) {
    Staging merged = staging;
    BigramStats b = detect_bigrams(merged, c.bigram);
    Corpus bi = build_doc_term_matrix(merged, c.min_doc_freq);
    save_corpus_json(bi, dir / "corpus_bigram.json");
    stats["bigram"] = {{"merges", b.merges},
                       {"distinct_bigrams", b.distinct_bigrams},
                       {"tokens", bi.total_tokens()},
                       {"vocabulary", bi.vocab_size()}};
  }
  write_file(dir / "ingest.json", stats.dump(2) + "\n");
}

void stage_grid(const PipelineConfig& c, const fs::path& dir) {
  require(dir, "corpus.json", Stage::kIngest);
  Corpus uni = load_corpus_json(dir / "corpus.json");
  std::optional<Corpus> bi;
  if (c.bigrams) {
    require(dir, "corpus_bigram.json", Stage::kIngest);
    bi = load_corpus_json(dir / "corpus_bigram.json");
  }
  SelectionGrid grid;
  auto known = default_variants();
  for (const auto& name : c.variants) {
    grid.variants.push_back(*std::find_if(known.begin(), known.end(), [&](const auto& v) { return v.name == name; }));
  }
  grid.k_pilot = c.k_pilot;
  grid.k_values = SelectionGrid::k_range(c.k_min, c.k_max);
  auto result = run_selection_grid(uni, bi ? &*bi : nullptr, grid, grid_training(c), c.jobs);

  std::vector<EvalCell> cells = result.stage1;
  cells.insert(cells.end(), result.stage2.begin(), result.stage2.end());
  write_file(dir / "eval_grid.csv", eval_grid_csv(cells));
  ordered_json doc;
  doc["best_family"] = result.best_family;
  doc["best_variant"] = result.best_variant;
  doc["k_best"] = result.k_best;
  doc["best_cell"] = cell_json(result.best_cell);
  doc["k_pilot"] = c.k_pilot;
  doc["stage1"] = ordered_json::array();
  for (const auto& cell : result.stage1) doc["stage1"].push_back(cell_json(cell));
  doc["stage2"] = ordered_json::array();
  for (const auto& cell : result.stage2) doc["stage2"].push_back(cell_json(cell));
  write_file(dir / "selection.json", doc.dump(2) + "\n");
}

void stage_train(const PipelineConfig& c, const fs::path& dir) {
  std::string variant = c.train_variant;
  int k = c.train_k;
  if (variant.empty() || k == 0) {
    require(dir, "selection.json", Stage::kGrid);
    auto sel = read_json(dir / "selection.json");
    if (variant.empty()) variant = sel.at("best_variant").get<std::string>();
    if (k == 0) k = sel.at("k_best").get<int>();
  }
  Corpus corpus = corpus_for(dir, parse_model_kind(variant));
  TopicModel model = train_variant(variant, k, corpus, grid_training(c));
  save_model_json(model, dir / "model.json");
}

void stage_terms(const PipelineConfig& c, const fs::path& dir) {
  TopicModel model = load_trained(dir);
  Corpus corpus = corpus_for(dir, model.kind);
  ConceptOptions opts;
  opts.lambda = c.lambda;
  opts.n = std::min(c.concepts, model.vocab_size());
  opts.pool = c.pool;
  opts.form = c.relevance;
  auto summaries = select_topic_concepts(model, corpus, opts);
  ordered_json doc;
  doc["lambda"] = c.lambda;
  doc["topics"] = ordered_json::array();
  std::string csv = "topic,rank,term,saliency,relevance,p_w_given_t,lift\n";
  for (auto& s : summaries) {
    for (size_t i = 0; i < s.concepts.size() && i < 3; ++i) s.label += (i ? ", " : "") + s.concepts[i].term;
    ordered_json t;
    t["topic"] = s.topic;
    t["label"] = s.label;
    t["short_list"] = s.short_list;
    t["concepts"] = ordered_json::array();
    for (size_t i = 0; i < s.concepts.size(); ++i) {
      const auto& cs = s.concepts[i];
      t["concepts"].push_back({{"term", cs.term},
                               {"saliency", cs.saliency},
                               {"relevance", cs.relevance},
                               {"p_w_given_t", cs.p_w_given_t},
                               {"lift", cs.lift}});
      csv += std::to_string(s.topic) + "," + std::to_string(i + 1) + "," + cs.term + "," + fmt_double(cs.saliency) +
             "," + fmt_double(cs.relevance) + "," + fmt_double(cs.p_w_given_t) + "," + fmt_double(cs.lift) + "\n";
    }
    doc["topics"].push_back(std::move(t));
  }
  write_file(dir / "concepts.json", doc.dump(2) + "\n");
  write_file(dir / "concepts.csv", csv);
}

void stage_map(const PipelineConfig&, const fs::path& dir) {
  TopicModel model = load_trained(dir);
  TopicMapData map = topic_map(model);
  ordered_json doc;
  doc["topics"] = ordered_json::array();
  for (size_t t = 0; t < model.num_topics(); ++t) {
    doc["topics"].push_back(
        {{"topic", t}, {"x", map.coords(t, 0)}, {"y", map.coords(t, 1)}, {"proportion", map.proportions[t]}});
  }
  doc["distance"] = ordered_json::array();
  for (size_t i = 0; i < map.distance.rows(); ++i) {
    auto row = map.distance.row(i);
    doc["distance"].push_back(std::vector<double>(row.begin(), row.end()));
  }
  write_file(dir / "topic_map.json", doc.dump(2) + "\n");
}

std::vector<Concept> load_concepts(const fs::path& dir) {
  require(dir, "concepts.json", Stage::kTerms);
  auto doc = read_json(dir / "concepts.json");
  std::vector<Concept> out;
  for (const auto& t : doc.at("topics")) {
    for (const auto& cs : t.at("concepts")) out.push_back({cs.at("term").get<std::string>(), t.at("topic").get<size_t>()});
  }
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

void stage_kg(const PipelineConfig& c, const fs::path& dir) {
  TopicModel model = load_trained(dir);
  Corpus corpus = corpus_for(dir, model.kind);
  auto concepts = load_concepts(dir);
  auto triples = extract_relations(corpus.sentences(), concepts, {c.cross_topic_only, c.jobs});
  std::string csv = "sentence,doc,source,relation,target\n";
  for (const auto& t : triples) {
    csv += std::to_string(t.sentence) + "," + csv_cell(corpus.doc_id(corpus.sentences()[t.sentence].doc)) + "," +
           csv_cell(t.source) + "," + csv_cell(t.relation) + "," + csv_cell(t.target) + "\n";
  }
  write_file(dir / "triples.csv", csv);
  WeightedGraph graph = reduce_edge_weights(triples);
  LayoutCoords circular = layout_circular(graph);
  LayoutCoords spring;
  if (graph.nodes.empty()) {
    log::warn("knowledge graph is empty: no sentence mentions two selected concepts");
  } else {
    spring = layout_kamada_kawai(graph, c.spring);
  }
  export_graph(graph, GraphFormat::kEdgeListCsv, dir / "kg_edges.csv");
  export_graph(graph, GraphFormat::kDot, dir / "kg.dot", &spring);
  export_graph(graph, GraphFormat::kJson, dir / "kg.json");
  write_file(dir / "kg_layout.json", layout_json(graph, circular, spring));
}

void stage_compare(const PipelineConfig& c, const fs::path& dir) {
  if (c.reference.empty()) return;
  Taxonomy reference = load_taxonomy_json(c.reference);
  require(dir, "concepts.json", Stage::kTerms);
  auto doc = read_json(dir / "concepts.json");
  Taxonomy generated;
  for (const auto& t : doc.at("topics")) {
    Theme theme{"topic " + std::to_string(t.at("topic").get<size_t>()), {}};
    for (const auto& cs : t.at("concepts")) theme.concepts.push_back(cs.at("term").get<std::string>());
    generated.themes.push_back(std::move(theme));
  }
  auto report = compare_taxonomies(generated, reference);
  write_file(dir / "taxonomy.json", taxonomy_json(generated));
  write_file(dir / "taxonomy_report.json", report_json(report, generated, reference));
}

void stage_report(const PipelineConfig&, const fs::path& dir) { write_file(dir / "report.html", render_report(dir)); }

void execute(Stage stage, const PipelineConfig& c, const fs::path& dir) {
  switch (stage) {
    case Stage::kIngest: return stage_ingest(c, dir);
    case Stage::kGrid: return stage_grid(c, dir);
    case Stage::kTrain: return stage_train(c, dir);
    case Stage::kTerms: return stage_terms(c, dir);
    case Stage::kMap: return stage_map(c, dir);
    case Stage::kKg: return stage_kg(c, dir);
    case Stage::kCompare: return stage_compare(c, dir);
    case Stage::kReport: return stage_report(c, dir);
  }
}

RunManifest open_manifest(const PipelineConfig& config, const std::string& digest) {
  const fs::path path = config.out_dir / kManifest;
  if (fs::exists(path)) {
    try {
      RunManifest m = parse_manifest_json(read_file(path));
      if (m.config_digest == digest && m.version == kToolVersion) return m;
      log::info("configuration or corpus changed; earlier stage records dropped");
    } catch (const ValidationError& e) {
      log::warn(std::string("ignoring unreadable manifest: ") + e.what());
    }
  }
  RunManifest m;
  m.config = config_text(config);
  m.config_digest = digest;
  return m;
}

size_t stage_index(std::string_view name) {
  const auto& stages = all_stages();
  for (size_t i = 0; i < stages.size(); ++i) {
    if (stage_name(stages[i]) == name) return i;
  }
  return stages.size();
}

// Replaces the stage's record and drops every record downstream of it.
void record(RunManifest& m, const StageRecord& r) {
  const size_t idx = stage_index(r.name);
  std::erase_if(m.stages, [&](const StageRecord& s) { return stage_index(s.name) >= idx; });
  m.stages.push_back(r);
  std::sort(m.stages.begin(), m.stages.end(),
            [](const StageRecord& a, const StageRecord& b) { return stage_index(a.name) < stage_index(b.name); });
}

StageRecord execute_recorded(Stage stage, const PipelineConfig& config, RunManifest& manifest) {
  const fs::path& dir = config.out_dir;
  StageRecord r;
  r.name = std::string(stage_name(stage));
  auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  log::info("stage " + r.name);
  try {
    execute(stage, config, dir);
  } catch (const std::exception& e) {
    r.status = "failed";
    r.seconds = elapsed();
    r.error = e.what();
    record(manifest, r);
    write_file(dir / kManifest, manifest_json(manifest));
    log::error("stage " + r.name + " failed: " + e.what());
    if (dynamic_cast<const ValidationError*>(&e) != nullptr) throw;
    if (dynamic_cast<const StageError*>(&e) != nullptr) throw;
    throw StageError("stage " + r.name + ": " + e.what());
  }
  r.seconds = elapsed();
  auto outputs = stage_outputs(stage, config);
  r.status = outputs.empty() ? "skipped" : "done";
  for (const auto& file : outputs) r.outputs[file] = sha256_file(dir / file);
  record(manifest, r);
  write_file(dir / kManifest, manifest_json(manifest));
  return r;
}

bool intact(const StageRecord* r, const fs::path& dir, const std::vector<std::string>& outputs) {
  if (r == nullptr || r->status == "failed" || r->outputs.size() != outputs.size()) return false;
  for (const auto& file : outputs) {
    auto it = r->outputs.find(file);
    if (it == r->outputs.end() || !fs::exists(dir / file) || sha256_file(dir / file) != it->second) return false;
  }
  return true;
}

void prepare(const PipelineConfig& config) {
  config.validate();
  require_corpus(config);
  if (!config.reference.empty() && !fs::exists(config.reference)) {
    throw ValidationError("cannot read reference taxonomy " + config.reference.string());
  }
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw StageError("cannot create " + config.out_dir.string() + ": " + ec.message());
}

}  // namespace

StageRecord run_stage(Stage stage, const PipelineConfig& config) {
  prepare(config);
  RunManifest manifest = open_manifest(config, run_digest(config));
  return execute_recorded(stage, config, manifest);
}

RunManifest run_pipeline(const PipelineConfig& config) {
  prepare(config);
  RunManifest manifest = open_manifest(config, run_digest(config));
  bool rebuilding = false;
  for (Stage stage : all_stages()) {
    const std::string name(stage_name(stage));
    const StageRecord* prior = manifest.find(name);
    if (!rebuilding && prior != nullptr && prior->status != "failed" &&
        intact(prior, config.out_dir, stage_outputs(stage, config))) {
      auto& kept = manifest.stages[static_cast<size_t>(prior - manifest.stages.data())];
      if (kept.status == "done") kept.status = "cached";
      kept.seconds = 0.0;
      continue;
    }
    rebuilding = true;
    execute_recorded(stage, config, manifest);
  }
  write_file(config.out_dir / kManifest, manifest_json(manifest));
  return manifest;
}

}  // namespace topictax
