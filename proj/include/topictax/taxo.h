#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "topictax/linalg.h"

namespace topictax {

struct Theme {
  std::string name;
  std::vector<std::string> concepts;
};

struct Taxonomy {
  std::vector<Theme> themes;
};

// Lowercase, split on anything that is not [a-z0-9], stem each part, join
// with '_'. Returns "" when nothing survives.
std::string canonicalize_concept(std::string_view concept_text);

// Canonical forms in first-appearance order, duplicates and empties dropped.
std::vector<std::string> canonicalize_concepts(const std::vector<std::string>& concepts);

// |A n B| / |A u B| over distinct members. Throws ValidationError on an
// empty union.
double jaccard_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b);

enum class AssignmentMethod { kExhaustive, kGreedy };

struct Assignment {
  std::vector<long> row_to_col;  // -1 when unmatched
  double total = 0.0;
  AssignmentMethod method = AssignmentMethod::kExhaustive;
};

// Maximum-total one-to-one matching of rows to columns. Exact when the
// smaller side has at most exhaustive_limit members, greedy otherwise.
Assignment assign_max(const linalg::Matrix& score, size_t exhaustive_limit = 8);

// Greedy matching: repeatedly takes the best remaining pair (lowest row,
// then lowest column on ties).
Assignment assign_greedy(const linalg::Matrix& score);

struct TaxonomyReport {
  std::vector<long> assignment;  // generated topic -> reference theme, -1 if unmatched
  std::vector<double> per_topic_jaccard;
  std::vector<bool> unmatched;         // per generated topic
  std::vector<size_t> unmatched_themes;  // reference themes left without a topic
  double average = 0.0;                // mean over generated topics
  AssignmentMethod method = AssignmentMethod::kExhaustive;
  linalg::Matrix jaccard;  // generated x reference
};

TaxonomyReport compare_taxonomies(const Taxonomy& generated, const Taxonomy& reference);

Taxonomy parse_taxonomy_json(std::string_view text);
Taxonomy load_taxonomy_json(const std::filesystem::path& path);
std::string taxonomy_json(const Taxonomy& taxonomy);
std::string report_json(const TaxonomyReport& report, const Taxonomy& generated, const Taxonomy& reference);

}  // namespace topictax
