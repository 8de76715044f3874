#include "topictax/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "topictax/errors.h"

namespace topictax {
namespace {

using nlohmann::json;

struct PairHash {
  size_t operator()(const std::pair<std::string, std::string>& p) const {
    size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

std::vector<std::string> stems_of(const std::vector<std::string>& words) {
  std::vector<std::string> stems;
  stems.reserve(words.size());
  for (const auto& w : words) stems.push_back(stem_token(w));
  return stems;
}

}  // namespace

size_t Staging::total_tokens() const {
  size_t n = 0;
  for (const auto& doc : docs) {
    for (const auto& s : doc.sentences) n += s.tokens.size();
  }
  return n;
}

void BigramPolicy::validate() const {
  if (min_count < 1) throw ValidationError("bigram min_count must be >= 1");
  if (!(threshold > 0.0)) throw ValidationError("bigram threshold must be > 0");
}

double bigram_score(uint64_t count_ab, uint64_t count_a, uint64_t count_b, uint64_t total,
                    uint32_t min_count) {
  if (count_a == 0 || count_b == 0) return 0.0;
  return (static_cast<double>(count_ab) - static_cast<double>(min_count)) *
         static_cast<double>(total) /
         (static_cast<double>(count_a) * static_cast<double>(count_b));
}

TokenId Corpus::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? static_cast<TokenId>(vocab_.size()) : it->second;
}

void Corpus::finalize() {
  index_.clear();
  for (TokenId i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);

  doc_term_ = SparseCounts{};
  term_frequency_.assign(vocab_.size(), 0);
  document_frequency_.assign(vocab_.size(), 0);
  total_tokens_ = 0;
  std::map<TokenId, uint32_t> row;
  for (const auto& doc : docs_) {
    row.clear();
    for (TokenId t : doc) ++row[t];
    for (auto [t, c] : row) {
      doc_term_.cols.push_back(t);
      doc_term_.vals.push_back(c);
      term_frequency_[t] += c;
      ++document_frequency_[t];
    }
    doc_term_.row_ptr.push_back(doc_term_.cols.size());
    total_tokens_ += doc.size();
  }
}

Corpus Corpus::subset(std::span<const size_t> doc_indices) const {
  Corpus out;
  out.vocab_ = vocab_;
  std::vector<int64_t> remap(docs_.size(), -1);
  for (size_t i = 0; i < doc_indices.size(); ++i) {
    size_t d = doc_indices[i];
    if (d >= docs_.size()) throw ValidationError("subset index out of range");
    remap[d] = static_cast<int64_t>(i);
    out.ids_.push_back(ids_[d]);
    out.docs_.push_back(docs_[d]);
  }
  // Keep sentence order grouped by the new document order.
  std::vector<std::vector<const Sentence*>> by_doc(doc_indices.size());
  for (const auto& s : sentences_) {
    if (remap[s.doc] >= 0) by_doc[static_cast<size_t>(remap[s.doc])].push_back(&s);
  }
  for (size_t i = 0; i < by_doc.size(); ++i) {
    for (const Sentence* s : by_doc[i]) {
      Sentence copy = *s;
      copy.doc = static_cast<uint32_t>(i);
      out.sentences_.push_back(std::move(copy));
    }
  }
  out.finalize();
  return out;
}

Corpus Corpus::from_token_docs(const std::vector<std::string>& ids,
                               const std::vector<std::vector<std::string>>& docs) {
  if (ids.size() != docs.size()) throw ValidationError("ids and docs differ in length");
  Staging staging;
  for (size_t d = 0; d < docs.size(); ++d) {
    staging.records.push_back({ids[d], "", ""});
    StagedDocument doc{ids[d], {StagedSentence{docs[d], docs[d]}}};
    staging.docs.push_back(std::move(doc));
  }
  staging.preprocessed = true;
  // Reject duplicate ids the same way ingestion does.
  ingest_corpus(staging.records);
  return build_doc_term_matrix(staging, 1);
}

Staging ingest_corpus(std::vector<DocumentRecord> records) {
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& id = records[i].id;
    if (id.empty()) {
      throw ValidationError("record " + std::to_string(i + 1) + ": empty id");
    }
    if (!seen.insert(id).second) throw ValidationError("duplicate id \"" + id + "\"");
  }
  Staging staging;
  staging.records = std::move(records);
  return staging;
}

std::vector<DocumentRecord> read_jsonl(std::istream& in) {
  std::vector<DocumentRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where() + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ValidationError(where() + "expected a JSON object");
    DocumentRecord rec;
    for (auto [key, dest] : {std::pair{"id", &rec.id}, std::pair{"title", &rec.title},
                             std::pair{"abstract", &rec.abstract}}) {
      auto it = obj.find(key);
      if (it == obj.end()) {
        if (std::string_view(key) == "title") continue;
        throw ValidationError(where() + "missing key \"" + key + "\"");
      }
      if (it->is_number_integer() && std::string_view(key) == "id") {
        *dest = std::to_string(it->get<long long>());
      } else if (it->is_string()) {
        *dest = it->get<std::string>();
      } else if (!it->is_null()) {
        throw ValidationError(where() + "key \"" + key + "\" must be a string");
      }
    }
    if (rec.id.empty()) throw ValidationError(where() + "empty id");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DocumentRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read corpus file " + path.string());
  return read_jsonl(in);
}

void preprocess_staging(Staging& staging, const PreprocessRules& rules) {
  staging.docs.clear();
  staging.docs.reserve(staging.records.size());
  for (const auto& rec : staging.records) {
    StagedDocument doc{rec.id, {}};
    for (const auto& sentence : split_sentences(rec.abstract)) {
      doc.sentences.push_back({preprocess_tokens(sentence, rules), word_tokens(sentence)});
    }
    staging.docs.push_back(std::move(doc));
  }
  staging.preprocessed = true;
}

BigramStats detect_bigrams(Staging& staging, const BigramPolicy& policy) {
  policy.validate();
  std::unordered_map<std::string, uint64_t> unigram;
  std::unordered_map<std::pair<std::string, std::string>, uint64_t, PairHash> pairs;
  uint64_t total = 0;
  for (const auto& doc : staging.docs) {
    for (const auto& s : doc.sentences) {
      for (size_t i = 0; i < s.tokens.size(); ++i) {
        ++unigram[s.tokens[i]];
        ++total;
        if (i + 1 < s.tokens.size()) ++pairs[{s.tokens[i], s.tokens[i + 1]}];
      }
    }
  }

  BigramStats stats;
  std::unordered_set<std::string> merged_kinds;
  for (auto& doc : staging.docs) {
    for (auto& s : doc.sentences) {
      std::vector<std::string> out;
      out.reserve(s.tokens.size());
      size_t i = 0;
      while (i < s.tokens.size()) {
        if (i + 1 < s.tokens.size()) {
          const auto& a = s.tokens[i];
          const auto& b = s.tokens[i + 1];
          auto it = pairs.find({a, b});
          uint64_t count_ab = it == pairs.end() ? 0 : it->second;
          if (count_ab >= policy.min_count &&
              bigram_score(count_ab, unigram[a], unigram[b], total, policy.min_count) >=
                  policy.threshold) {
            std::string joined = a + "_" + b;
            if (policy.keep_unigrams) {
              out.push_back(a);
              out.push_back(b);
            }
            merged_kinds.insert(joined);
            out.push_back(std::move(joined));
            ++stats.merges;
            i += 2;
            continue;
          }
        }
        out.push_back(s.tokens[i]);
        ++i;
      }
      s.tokens = std::move(out);
    }
  }
  stats.distinct_bigrams = merged_kinds.size();
  return stats;
}

Corpus build_doc_term_matrix(const Staging& staging, uint32_t min_doc_freq) {
  if (!staging.preprocessed) throw ValidationError("staging has not been preprocessed");
  std::map<std::string, uint32_t> doc_freq;
  for (const auto& doc : staging.docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& s : doc.sentences) {
      for (const auto& t : s.tokens) {
        if (seen.insert(t).second) ++doc_freq[t];
      }
    }
  }
  Corpus corpus;
  for (const auto& [token, df] : doc_freq) {
    if (df >= min_doc_freq) corpus.vocab_.push_back(token);
  }
  if (corpus.vocab_.empty()) throw StageError("corpus degenerate");
  std::unordered_map<std::string_view, TokenId> index;
  for (TokenId i = 0; i < corpus.vocab_.size(); ++i) index.emplace(corpus.vocab_[i], i);

  for (size_t d = 0; d < staging.docs.size(); ++d) {
    const auto& doc = staging.docs[d];
    corpus.ids_.push_back(doc.id);
    std::vector<TokenId> stream;
    for (const auto& s : doc.sentences) {
      Sentence sentence;
      sentence.doc = static_cast<uint32_t>(d);
      for (const auto& t : s.tokens) {
        if (auto it = index.find(t); it != index.end()) sentence.tokens.push_back(it->second);
      }
      stream.insert(stream.end(), sentence.tokens.begin(), sentence.tokens.end());
      sentence.words = s.words;
      sentence.stems = stems_of(s.words);
      corpus.sentences_.push_back(std::move(sentence));
    }
    corpus.docs_.push_back(std::move(stream));
  }
  corpus.finalize();
  return corpus;
}

void save_corpus_json(const Corpus& corpus, const std::filesystem::path& path) {
  json sentences = json::array();
  for (const auto& s : corpus.sentences()) {
    sentences.push_back({{"doc", s.doc}, {"tokens", s.tokens}, {"words", s.words}});
  }
  json doc = {{"ids", corpus.doc_ids()},
              {"vocab", corpus.vocabulary()},
              {"docs", corpus.docs()},
              {"sentences", std::move(sentences)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

Corpus load_corpus_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    Corpus corpus;
    corpus.ids_ = doc.at("ids").get<std::vector<std::string>>();
    corpus.vocab_ = doc.at("vocab").get<std::vector<std::string>>();
    corpus.docs_ = doc.at("docs").get<std::vector<std::vector<TokenId>>>();
    for (const auto& s : doc.at("sentences")) {
      Sentence sentence;
      sentence.doc = s.at("doc").get<uint32_t>();
      sentence.tokens = s.at("tokens").get<std::vector<TokenId>>();
      sentence.words = s.at("words").get<std::vector<std::string>>();
      sentence.stems = stems_of(sentence.words);
      corpus.sentences_.push_back(std::move(sentence));
    }
    if (corpus.ids_.size() != corpus.docs_.size()) {
      throw ValidationError(path.string() + ": ids and docs differ in length");
    }
    for (const auto& d : corpus.docs_) {
      for (TokenId t : d) {
        if (t >= corpus.vocab_.size()) throw ValidationError(path.string() + ": token id out of range");
      }
    }
    corpus.finalize();
    return corpus;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace topictax
