#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "topictax/corpus.h"
#include "topictax/errors.h"

using namespace topictax;

namespace {

Staging staged(const std::vector<std::vector<std::string>>& docs) {
  Staging s;
  for (size_t d = 0; d < docs.size(); ++d) {
    std::string id = "d" + std::to_string(d);
    s.records.push_back({id, "", ""});
    s.docs.push_back({id, {StagedSentence{docs[d], docs[d]}}});
  }
  s.preprocessed = true;
  return s;
}

void check_invariants(const Corpus& c) {
  uint64_t total = 0;
  for (size_t d = 0; d < c.num_docs(); ++d) {
    auto vals = c.doc_term().row_vals(d);
    uint64_t row = std::accumulate(vals.begin(), vals.end(), uint64_t{0});
    CHECK(row == c.doc(d).size());
    total += row;
    for (TokenId t : c.doc(d)) CHECK(t < c.vocab_size());
  }
  CHECK(total == c.total_tokens());
  for (const auto& s : c.sentences()) {
    for (TokenId t : s.tokens) CHECK(t < c.vocab_size());
  }
}

}  // namespace

TEST_CASE("ingest_corpus") {
  CHECK(ingest_corpus({}).records.empty());
  auto s = ingest_corpus({{"p1", "", "x"}, {"p2", "", "y"}});
  REQUIRE(s.records.size() == 2);
  CHECK(s.records[0].id == "p1");
  CHECK(s.records[1].id == "p2");
  CHECK_THROWS_WITH_AS(ingest_corpus({{"p1", "", "x"}, {"p1", "", "y"}}), "duplicate id \"p1\"",
                       ValidationError);
}

TEST_CASE("read_jsonl reports line numbers") {
  std::istringstream good(R"({"id":"a","title":"T","abstract":"Text one."}

{"id":"b","abstract":"Text two."}
)");
  auto recs = read_jsonl(good);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].id == "b");
  CHECK(recs[1].title.empty());

  std::istringstream bad("{\"id\":\"a\",\"abstract\":\"x\"}\n{not json}\n");
  CHECK_THROWS_WITH_AS(read_jsonl(bad), doctest::Contains("line 2"), ValidationError);
  std::istringstream missing("{\"id\":\"a\",\"abstract\":\"x\"}\n{\"id\":\"b\"}\n");
  CHECK_THROWS_WITH_AS(read_jsonl(missing), doctest::Contains("line 2: missing key \"abstract\""),
                       ValidationError);
}

TEST_CASE("build_doc_term_matrix counts") {
  auto c = build_doc_term_matrix(staged({{"a", "a", "b"}, {"b"}}), 1);
  REQUIRE(c.vocab_size() == 2);
  CHECK(c.total_tokens() == 4);
  const auto& dt = c.doc_term();
  CHECK(dt.row_cols(0)[0] == 0);
  CHECK(dt.row_vals(0)[0] == 2);
  CHECK(dt.row_vals(0)[1] == 1);
  CHECK(dt.row_cols(1).size() == 1);
  CHECK(dt.row_vals(1)[0] == 1);
  check_invariants(c);
}

TEST_CASE("build_doc_term_matrix min_doc_freq filter") {
  CHECK_THROWS_WITH_AS(build_doc_term_matrix(staged({{"a"}, {"b"}, {"c"}}), 2), "corpus degenerate",
                       StageError);
  auto c = build_doc_term_matrix(staged({{"a", "x"}, {"a", "y"}, {"z"}}), 2);
  CHECK(c.vocab_size() == 1);
  CHECK(c.doc(2).empty());
  check_invariants(c);
}

TEST_CASE("row sums equal doc lengths on random corpora") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> len(0, 30), word(0, 25);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> docs(10);
    for (auto& d : docs) {
      int n = len(rng);
      for (int i = 0; i < n; ++i) d.push_back(std::string(1, static_cast<char>('a' + word(rng))));
    }
    check_invariants(build_doc_term_matrix(staged(docs), 1));
  }
}

TEST_CASE("bigram score and merge") {
  CHECK(bigram_score(50, 50, 50, 1000, 5) == doctest::Approx(18.0));
  CHECK(bigram_score(3, 50, 50, 1000, 5) <= 0.0);

  // 50 "a b" pairs plus unique filler, N = 1000, count(a) = count(b) = 50.
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> d{"a", "b"};
    for (int j = 0; j < 18; ++j) d.push_back("f" + std::to_string(i * 18 + j));
    docs.push_back(d);
  }
  Staging s = staged(docs);
  REQUIRE(s.total_tokens() == 1000);
  auto stats = detect_bigrams(s, BigramPolicy{5, 10.0, false});
  CHECK(stats.merges == 50);
  CHECK(stats.distinct_bigrams == 1);
  CHECK(s.docs[0].sentences[0].tokens[0] == "a_b");
  CHECK(s.total_tokens() == 950);
}

TEST_CASE("bigram rare or non-adjacent pairs are untouched") {
  Staging rare = staged({{"a", "b", "c"}, {"a", "b"}, {"c", "a"}});
  auto before = rare.docs;
  CHECK(detect_bigrams(rare, BigramPolicy{5, 10.0, false}).merges == 0);
  CHECK(rare.docs[0].sentences[0].tokens == before[0].sentences[0].tokens);

  // a and b are frequent but never adjacent.
  Staging apart = staged(std::vector<std::vector<std::string>>(10, {"a", "x", "b"}));
  CHECK(detect_bigrams(apart, BigramPolicy{1, 0.5, false}).merges == 10);
  for (const auto& d : apart.docs) {
    CHECK(d.sentences[0].tokens == std::vector<std::string>{"a_x", "b"});
  }
  Staging never = staged({{"a"}, {"b"}});
  CHECK(detect_bigrams(never, BigramPolicy{1, 0.001, false}).merges == 0);
}

TEST_CASE("each bigram merge shortens its document by exactly one") {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> word(0, 5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<std::string>> docs(20);
    for (auto& d : docs) {
      for (int i = 0; i < 40; ++i) d.push_back(std::string(1, static_cast<char>('a' + word(rng))));
    }
    Staging s = staged(docs);
    size_t before = s.total_tokens();
    auto stats = detect_bigrams(s, BigramPolicy{2, 1.0, false});
    CHECK(s.total_tokens() == before - stats.merges);
  }
  Staging keep = staged({{"a", "b"}, {"a", "b"}});
  detect_bigrams(keep, BigramPolicy{1, 0.1, true});
  CHECK(keep.docs[0].sentences[0].tokens == std::vector<std::string>{"a", "b", "a_b"});
}

TEST_CASE("preprocess_staging keeps sentences and surface words") {
  auto s = ingest_corpus({{"p1", "", "Neuromorphic chips emulate neurons. Chips run fast."},
                          {"p2", "", "Neuromorphic chips accelerate learning."}});
  preprocess_staging(s, PreprocessRules::defaults());
  REQUIRE(s.docs[0].sentences.size() == 2);
  CHECK(s.docs[0].sentences[1].words == std::vector<std::string>{"chips", "run", "fast"});
  auto c = build_doc_term_matrix(s, 2);
  CHECK(c.vocabulary().size() == 2);  // chip, neuromorph
  REQUIRE(c.sentences().size() == 3);
  CHECK(c.sentences()[2].doc == 1);
  CHECK(c.sentences()[0].stems[0] == "neuromorph");
  check_invariants(c);
}

TEST_CASE("corpus json round trip and subset") {
  auto s = ingest_corpus({{"p1", "", "Spiking chips learn. Chips fire spikes."},
                          {"p2", "", "Spiking networks learn quickly."},
                          {"p3", "", "Chips and networks."}});
  preprocess_staging(s, PreprocessRules::defaults());
  auto c = build_doc_term_matrix(s, 2);
  auto path = std::filesystem::temp_directory_path() / "topictax_corpus_test.json";
  save_corpus_json(c, path);
  auto back = load_corpus_json(path);
  std::filesystem::remove(path);
  CHECK(std::vector<std::string>(back.vocabulary().begin(), back.vocabulary().end()) ==
        std::vector<std::string>(c.vocabulary().begin(), c.vocabulary().end()));
  CHECK(back.total_tokens() == c.total_tokens());
  REQUIRE(back.sentences().size() == c.sentences().size());
  CHECK(back.sentences()[1].stems == c.sentences()[1].stems);

  std::vector<size_t> idx{2, 0};
  auto sub = c.subset(idx);
  CHECK(sub.num_docs() == 2);
  CHECK(sub.doc_id(0) == "p3");
  CHECK(sub.vocab_size() == c.vocab_size());
  CHECK(sub.sentences()[0].doc == 0);
  check_invariants(sub);
}
