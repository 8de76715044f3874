#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "support/oracles.h"
#include "support/planted.h"
#include "topictax/errors.h"
#include "topictax/eval.h"

using namespace topictax;
using namespace topictax::testing;
using topictax::testing::make_planted;
using topictax::testing::PlantedSpec;

TEST_CASE("perplexity of a uniform model is V") {
  std::vector<std::string> vocab;
  for (int i = 0; i < 50; ++i) vocab.push_back(testing::planted_word(i));
  auto m = dense_model(vocab, {std::vector<double>(50, 1.0 / 50)});
  std::vector<std::vector<TokenId>> docs{{0, 1, 2, 3}, {49, 49}, {7}};
  auto r = perplexity(m, docs);
  CHECK(r.tokens == 7);
  CHECK(r.perplexity == 50.0);

  auto m3 = dense_model(vocab, std::vector<std::vector<double>>(3, std::vector<double>(50, 1.0 / 50)));
  CHECK(perplexity(m3, docs).perplexity == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("perplexity hand case") {
  auto m = dense_model({"a", "b", "c"}, {{0.5, 0.25, 0.25}});
  std::vector<std::vector<TokenId>> docs{{0, 1}};
  auto r = perplexity(m, docs);
  CHECK(std::abs(r.perplexity - 2.0 * std::sqrt(2.0)) < 1e-9);
  CHECK(r.log_likelihood_per_word == doctest::Approx((std::log(0.5) + std::log(0.25)) / 2));
  // Out-of-vocabulary ids are skipped.
  std::vector<std::vector<TokenId>> with_oov{{0, 9, 1}};
  CHECK(perplexity(m, with_oov).perplexity == r.perplexity);
  std::vector<std::vector<TokenId>> none{{9}, {}};
  CHECK_THROWS_WITH_AS(perplexity(m, none), "no in-vocabulary tokens", ValidationError);
}

TEST_CASE("perplexity is invariant under reordering and duplication") {
  PlantedSpec spec;
  spec.topics = 3;
  spec.vocab = 60;
  spec.docs = 60;
  spec.doc_len = 30;
  auto c = make_planted(spec).corpus();
  LdaConfig cfg;
  cfg.num_topics = 3;
  cfg.iterations = 100;
  cfg.burn_in = 20;
  auto m = train_lda(c, cfg);
  std::vector<std::vector<TokenId>> docs;
  for (size_t d = 0; d < 10; ++d) docs.emplace_back(c.doc(d).begin(), c.doc(d).end());
  auto base = perplexity(m, docs);
  CHECK(base.perplexity >= 1.0);
  auto reversed = docs;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(perplexity(m, reversed).perplexity == doctest::Approx(base.perplexity).epsilon(1e-12));
  auto doubled = docs;
  doubled.insert(doubled.end(), docs.begin(), docs.end());
  CHECK(perplexity(m, doubled).perplexity == doctest::Approx(base.perplexity).epsilon(1e-12));

  LsiConfig lcfg;
  lcfg.num_topics = 3;
  auto lsi = train_lsi(c, lcfg);
  CHECK(perplexity(lsi, docs).perplexity >= 1.0);
}

TEST_CASE("window counts and NPMI match the brute-force enumerator") {
  for (uint32_t seed = 1; seed <= 6; ++seed) {
    // 50 "sentences" with lengths 0..30 over 12 words.
    Corpus c = random_corpus(seed, 50, 30, 12);
    std::vector<TokenId> words(c.vocab_size());
    for (TokenId i = 0; i < words.size(); ++i) words[i] = i;
    for (size_t width : {1u, 4u, 10u, 110u}) {
      CooccurrenceStats stats(c, words, width);
      NaiveWindows oracle(c, width);
      REQUIRE(stats.total_windows() == oracle.windows.size());
      for (size_t a = 0; a < words.size(); ++a) {
        for (size_t b = 0; b < words.size(); ++b) {
          CHECK(stats.pair_count(a, b) == oracle.count(words[a], words[b]));
          CHECK(stats.pair_count(a, b) <= std::min(stats.count(a), stats.count(b)));
          CHECK(std::abs(stats.npmi(a, b) - oracle.npmi(words[a], words[b])) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("window wider than every document gives document co-occurrence") {
  Corpus c = random_corpus(11, 30, 20, 8);
  std::vector<TokenId> words(c.vocab_size());
  for (TokenId i = 0; i < words.size(); ++i) words[i] = i;
  CooccurrenceStats stats(c, words, 1000);
  for (size_t a = 0; a < words.size(); ++a) {
    for (size_t b = 0; b < words.size(); ++b) {
      uint64_t docs = 0;
      for (const auto& d : c.docs()) {
        docs += std::find(d.begin(), d.end(), words[a]) != d.end() &&
                std::find(d.begin(), d.end(), words[b]) != d.end();
      }
      CHECK(stats.pair_count(a, b) == docs);
    }
  }
}

TEST_CASE("C_v equals the naive computation and stays in range") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    PlantedSpec spec;
    spec.topics = 3;
    spec.vocab = 45;
    spec.docs = 80;
    spec.doc_len = 25;
    spec.seed = seed;
    auto c = make_planted(spec).corpus();
    LdaConfig cfg;
    cfg.num_topics = static_cast<int>(seed + 1);
    cfg.iterations = 80;
    cfg.burn_in = 20;
    auto m = train_lda(c, cfg);
    for (size_t width : {5u, 110u}) {
      auto r = coherence_cv(m, c, 10, width);
      CHECK(std::abs(r.score - naive_cv(m, c, 10, width)) < 1e-9);
      CHECK(r.score >= -1.0);
      CHECK(r.score <= 1.0);
    }
  }
}

TEST_CASE("C_v is 1 under perfect co-occurrence") {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 20; ++d) {
    ids.push_back("d" + std::to_string(d));
    docs.push_back({"alpha", "beta", "gamma", "delta"});
  }
  Corpus c = Corpus::from_token_docs(ids, docs);
  auto m = dense_model({"alpha", "beta", "delta", "gamma"}, {{0.4, 0.3, 0.2, 0.1}, {0.1, 0.2, 0.3, 0.4}});
  auto r = coherence_cv(m, c, 10, 110);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("C_v flags topics without two known top words") {
  Corpus c = Corpus::from_token_docs({"a", "b"}, {{"x", "y"}, {"x", "y"}});
  auto m = dense_model({"q", "r", "x", "y"}, {{0.5, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5}});
  auto r = coherence_cv(m, c, 2, 110);
  CHECK(r.flagged == std::vector<bool>{true, false});
  CHECK(r.per_topic[0] == 0.0);
  CHECK(r.score == doctest::Approx(r.per_topic[1] / 2));
}

TEST_CASE("published coherence tables drive the selection") {
  SelectionGrid grid;
  grid.variants = kPublishedVariants;
  grid.k_pilot = 10;
  grid.k_values = {2, 4, 15};
  auto r = select_model(grid, table_cell);
  CHECK(r.best_family == "LDA");
  CHECK(r.k_best == 4);
  CHECK(r.best_cell.coherence == 0.451);
  CHECK(r.best_variant == "bilda_sklearn");
  CHECK(r.stage1.size() == 6);
  // HDP's .440 is never considered: stage 2 stays within the LDA family.
  CHECK(r.stage2.size() == 12);
  for (const auto& c : r.stage2) CHECK(c.algorithm != "hdp");
}

TEST_CASE("single candidate grid returns its only cell") {
  SelectionGrid grid;
  grid.variants = {{"lda", "LDA"}};
  grid.k_pilot = 3;
  grid.k_values = {3};
  int calls = 0;
  auto r = select_model(grid, [&](const GridVariant&, int) {
    ++calls;
    EvalCell c;
    c.coherence = 0.25;
    c.perplexity = 12.0;
    return c;
  });
  CHECK(calls == 1);
  CHECK(r.k_best == 3);
  CHECK(r.best_cell.coherence == 0.25);
  CHECK(r.best_cell.perplexity == 12.0);
}

TEST_CASE("selection input validation and failed cells") {
  SelectionGrid grid;
  grid.k_values = {2};
  CHECK_THROWS_AS(select_model(grid, table_cell), ValidationError);
  grid.variants = {{"a", "A"}, {"b", "A"}};
  grid.k_pilot = 2;
  grid.k_values = {2, 3};
  auto r = select_model(grid, [](const GridVariant& v, int k) {
    if (v.name == "a" && k == 3) throw StageError("boom");
    EvalCell c;
    c.coherence = v.name == "a" ? 0.9 : 0.1 * k;
    return c;
  });
  CHECK(r.best_variant == "a");
  CHECK(r.k_best == 2);
  CHECK(r.stage2[1].failed);
  CHECK(r.stage2[1].error == "boom");
  CHECK_THROWS_AS(select_model(grid, [](const GridVariant&, int) -> EvalCell { throw StageError("x"); }),
                  StageError);
}

TEST_CASE("staged selection agrees with an exhaustive scan of the winning family") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    SelectionGrid grid;
    grid.variants = {{"v0", "F0"}, {"v1", "F1"}, {"v2", "F0"}, {"v3", "F2"}};
    grid.k_pilot = 5;
    grid.k_values = SelectionGrid::k_range(2, 8);
    std::map<std::pair<std::string, int>, double> table;
    // Coarse levels force frequent ties.
    for (const auto& v : grid.variants) {
      for (int k = 2; k <= 8; ++k) table[{v.name, k}] = level(rng) / 10.0;
    }
    auto eval = [&](const GridVariant& v, int k) {
      EvalCell c;
      c.coherence = table.at({v.name, k});
      return c;
    };
    auto r = select_model(grid, eval);
    // Stage-1 family by exhaustive scan (first max in variant order).
    std::string family;
    double best1 = -2;
    for (const auto& v : grid.variants) {
      if (table[{v.name, 5}] > best1) {
        best1 = table[{v.name, 5}];
        family = v.family;
      }
    }
    CHECK(r.best_family == family);
    double best = -2;
    int k_best = 0;
    for (int k = 2; k <= 8; ++k) {
      for (const auto& v : grid.variants) {
        if (v.family == family && table[{v.name, k}] > best) {
          best = table[{v.name, k}];
          k_best = k;
        }
      }
    }
    CHECK(r.best_cell.coherence == best);
    CHECK(r.k_best == k_best);
  }
}

TEST_CASE("grid result does not depend on job count") {
  SelectionGrid grid;
  grid.variants = kPublishedVariants;
  grid.k_pilot = 10;
  grid.k_values = {2, 4, 15};
  auto serial = select_model(grid, table_cell, 1);
  auto threaded = select_model(grid, table_cell, 4);
  CHECK(eval_grid_csv(serial.stage2) == eval_grid_csv(threaded.stage2));
  CHECK(serial.best_variant == threaded.best_variant);
}

TEST_CASE("heldout_split") {
  auto a = heldout_split(100, 0.1, 3);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a == heldout_split(100, 0.1, 3));
  CHECK(a != heldout_split(100, 0.1, 4));
  CHECK(heldout_split(5, 0.1, 1).size() == 1);
  CHECK(heldout_split(1, 0.1, 1).empty());
  CHECK_THROWS_AS(heldout_split(10, 1.0, 1), ValidationError);
}

TEST_CASE("grid over real models is deterministic across job counts") {
  PlantedSpec spec;
  spec.topics = 3;
  spec.vocab = 60;
  spec.docs = 80;
  spec.doc_len = 30;
  auto c = make_planted(spec).corpus();
  GridTraining training;
  training.lda.iterations = 60;
  training.lda.burn_in = 20;
  training.inference.iterations = 20;
  training.inference.burn_in = 10;
  SelectionGrid grid;
  grid.variants = default_variants();
  grid.k_pilot = 3;
  grid.k_values = {2, 3, 4};
  auto a = run_selection_grid(c, &c, grid, training, 1);
  auto b = run_selection_grid(c, &c, grid, training, 3);
  CHECK(eval_grid_csv(a.stage1) + eval_grid_csv(a.stage2) == eval_grid_csv(b.stage1) + eval_grid_csv(b.stage2));
  for (const auto& cell : a.stage2) {
    CHECK_FALSE(cell.failed);
    CHECK(cell.perplexity >= 1.0);
    CHECK(cell.coherence >= -1.0);
    CHECK(cell.coherence <= 1.0);
  }
  CHECK_THROWS_AS(evaluate_cell({"bilda", "LDA"}, 2, c, nullptr, training), ValidationError);
}

TEST_CASE("eval_grid_csv layout") {
  EvalCell c;
  c.algorithm = "lda";
  c.k = 4;
  c.coherence = 0.5;
  c.perplexity = 2.0;
  c.log_likelihood_per_word = -0.25;
  EvalCell f;
  f.algorithm = "lsi";
  f.k = 4;
  f.failed = true;
  CHECK(eval_grid_csv({c, f, c}) ==
        "algorithm,k,coherence,perplexity,log_likelihood_per_word\nlda,4,0.5,2,-0.25\nlsi,4,,,\n");
}
