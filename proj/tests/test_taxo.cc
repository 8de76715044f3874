#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support/oracles.h"
#include "support/published_lists.h"
#include "topictax/errors.h"
#include "topictax/taxo.h"

using namespace topictax;
using namespace topictax::testing;

namespace {

linalg::Matrix random_scores(std::mt19937_64& rng, size_t r, size_t c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  linalg::Matrix m(r, c);
  for (size_t i = 0; i < r; ++i) {
    for (size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

void check_bijection(const Assignment& a, size_t cols) {
  std::vector<bool> used(cols, false);
  for (long j : a.row_to_col) {
    if (j < 0) continue;
    REQUIRE(static_cast<size_t>(j) < cols);
    CHECK(!used[static_cast<size_t>(j)]);
    used[static_cast<size_t>(j)] = true;
  }
}

}  // namespace

TEST_CASE("canonical forms") {
  CHECK(canonicalize_concept("running") == "run");
  CHECK(canonicalize_concept("spike") == "spike");
  CHECK(canonicalize_concept("cognitive informatics") == "cognit_informat");
  CHECK(canonicalize_concept("Machine-Learning") == "machin_learn");
  CHECK(canonicalize_concept("  ") == "");
  CHECK(canonicalize_concepts({"spikes", "spike", "Spike", "", "memory"}) == std::vector<std::string>{"spike", "memori"});
  for (const char* c : {"cognitive informatics", "neural networks", "synapses"}) {
    auto once = canonicalize_concept(c);
    CHECK(canonicalize_concept(once) == once);
  }
}

TEST_CASE("jaccard unit cases") {
  CHECK(jaccard_similarity({"a", "b"}, {"b", "a"}) == 1.0);
  CHECK(jaccard_similarity({"a"}, {"b"}) == 0.0);
  CHECK(jaccard_similarity({"a", "b", "c"}, {"b", "c", "d"}) == 0.5);
  CHECK(jaccard_similarity({}, {"a"}) == 0.0);
  CHECK_THROWS_AS(jaccard_similarity({}, {}), ValidationError);
}

TEST_CASE("jaccard properties on random sets") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a, b;
    for (int i = 0; i < 8; ++i) {
      if (rng() % 2) a.push_back(std::to_string(rng() % 10));
      if (rng() % 2) b.push_back(std::to_string(rng() % 10));
    }
    if (a.empty() && b.empty()) continue;
    const double j = jaccard_similarity(a, b);
    CHECK(j == jaccard_similarity(b, a));
    CHECK(j >= 0.0);
    CHECK(j <= 1.0);
    if (!a.empty()) CHECK(jaccard_similarity(a, a) == 1.0);
  }
}

TEST_CASE("hand-computed comparison") {
  Taxonomy gen{{{"t0", {"a", "b"}}, {"t1", {"c", "d"}}}};
  Taxonomy ref{{{"x", {"c"}}, {"y", {"a", "b"}}}};
  auto r = compare_taxonomies(gen, ref);
  CHECK(r.average == 0.75);
  CHECK(r.assignment == std::vector<long>{1, 0});
  CHECK(r.per_topic_jaccard == std::vector<double>{1.0, 0.5});
}

TEST_CASE("identical taxonomies in any order score one") {
  auto gen = testing::published_generated();
  auto shuffled = gen;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(shuffled.themes.begin(), shuffled.themes.end(), rng);
    auto r = compare_taxonomies(gen, shuffled);
    CHECK(r.average == 1.0);
    check_bijection({r.assignment, 0.0, r.method}, 4);
  }
}

TEST_CASE("published concept lists match the manual count") {
  auto r = compare_taxonomies(testing::published_generated(), testing::published_reference());
  REQUIRE(r.per_topic_jaccard.size() == 4);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(r.assignment[k] == static_cast<long>(k));
    CHECK(std::abs(r.per_topic_jaccard[k] - testing::kPublishedPerTopic[k]) < 1e-12);
  }
  CHECK(std::abs(r.average - testing::kPublishedAverage) < 1e-12);
  CHECK(r.method == AssignmentMethod::kExhaustive);
  auto text = report_json(r, testing::published_generated(), testing::published_reference());
  CHECK(text.find("\"exhaustive\"") != std::string::npos);
}

TEST_CASE("average is invariant under topic permutation") {
  auto gen = testing::published_generated();
  auto ref = testing::published_reference();
  const double base = compare_taxonomies(gen, ref).average;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(gen.themes.begin(), gen.themes.end(), rng);
    std::shuffle(ref.themes.begin(), ref.themes.end(), rng);
    auto r = compare_taxonomies(gen, ref);
    CHECK(std::abs(r.average - base) < 1e-12);
    double mean = std::accumulate(r.per_topic_jaccard.begin(), r.per_topic_jaccard.end(), 0.0) / 4.0;
    CHECK(std::abs(r.average - mean) < 1e-12);
  }
}

TEST_CASE("exact assignment equals a permutation scan") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
    auto s = random_scores(rng, r, c);
    auto a = assign_max(s);
    CHECK(a.method == AssignmentMethod::kExhaustive);
    CHECK(std::abs(a.total - brute_force_total(s)) < 1e-12);
    check_bijection(a, c);
    double sum = 0.0;
    size_t matched = 0;
    for (size_t i = 0; i < r; ++i) {
      if (a.row_to_col[i] >= 0) {
        sum += s(i, static_cast<size_t>(a.row_to_col[i]));
        ++matched;
      }
    }
    CHECK(matched == std::min(r, c));
    CHECK(std::abs(sum - a.total) < 1e-12);
  }
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_scores(rng, 4, 4);
    CHECK(std::abs(assign_max(s).total - brute_force_total(s)) < 1e-12);
  }
}

TEST_CASE("exact assignment dominates greedy") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 2 + rng() % 7;
    auto s = random_scores(rng, n, n + rng() % 3);
    CHECK(assign_max(s).total >= assign_greedy(s).total - 1e-12);
  }
  auto big = random_scores(rng, 10, 12);
  CHECK(assign_max(big).method == AssignmentMethod::kGreedy);
}

TEST_CASE("size mismatch flags unmatched topics") {
  Taxonomy gen{{{"t0", {"a"}}, {"t1", {"b"}}, {"t2", {"c"}}}};
  Taxonomy ref{{{"x", {"b"}}}};
  auto r = compare_taxonomies(gen, ref);
  CHECK(r.assignment == std::vector<long>{-1, 0, -1});
  CHECK(r.unmatched == std::vector<bool>{true, false, true});
  CHECK(std::abs(r.average - 1.0 / 3.0) < 1e-15);
  auto r2 = compare_taxonomies(ref, gen);
  CHECK(r2.average == 1.0);
  CHECK(r2.unmatched_themes == std::vector<size_t>{0, 2});
  CHECK_THROWS_AS(compare_taxonomies({}, ref), ValidationError);
}

TEST_CASE("taxonomy json round trip") {
  auto t = testing::published_reference();
  auto back = parse_taxonomy_json(taxonomy_json(t));
  REQUIRE(back.themes.size() == t.themes.size());
  for (size_t i = 0; i < t.themes.size(); ++i) {
    CHECK(back.themes[i].name == t.themes[i].name);
    CHECK(back.themes[i].concepts == t.themes[i].concepts);
  }
  CHECK_THROWS_AS(parse_taxonomy_json("{\"themes\": [{\"name\": \"x\"}]}"), ValidationError);
  CHECK_THROWS_AS(parse_taxonomy_json("not json"), ValidationError);
}
