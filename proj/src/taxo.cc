#include "topictax/taxo.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "topictax/errors.h"
#include "topictax/log.h"
#include "topictax/text.h"

namespace topictax {

using ordered_json = nlohmann::ordered_json;

std::string canonicalize_concept(std::string_view text) {
  std::string out, part;
  auto flush = [&] {
    if (part.empty()) return;
    std::string stem = stem_token(part);
    if (!stem.empty()) {
      if (!out.empty()) out += '_';
      out += stem;
    }
    part.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u >= 'A' && u <= 'Z') {
      part += static_cast<char>(u - 'A' + 'a');
    } else if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9')) {
      part += c;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> canonicalize_concepts(const std::vector<std::string>& concepts) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& c : concepts) {
    std::string canon = canonicalize_concept(c);
    if (!canon.empty() && seen.insert(canon).second) out.push_back(std::move(canon));
  }
  return out;
}

double jaccard_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  const size_t uni = sa.size() + sb.size() - common;
  if (uni == 0) throw ValidationError("jaccard similarity undefined for empty union");
  return static_cast<double>(common) / static_cast<double>(uni);
}

Assignment assign_greedy(const linalg::Matrix& score) {
  const size_t r = score.rows(), c = score.cols();
  Assignment out;
  out.method = AssignmentMethod::kGreedy;
  out.row_to_col.assign(r, -1);
  std::vector<bool> col_used(c, false);
  for (size_t round = 0; round < std::min(r, c); ++round) {
    double best = -std::numeric_limits<double>::infinity();
    size_t bi = r, bj = c;
    for (size_t i = 0; i < r; ++i) {
      if (out.row_to_col[i] >= 0) continue;
      for (size_t j = 0; j < c; ++j) {
        if (!col_used[j] && score(i, j) > best) {
          best = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    out.row_to_col[bi] = static_cast<long>(bj);
    col_used[bj] = true;
    out.total += best;
  }
  return out;
}

Assignment assign_max(const linalg::Matrix& score, size_t exhaustive_limit) {
  const size_t r = score.rows(), c = score.cols();
  const bool rows_small = r <= c;
  const size_t small = rows_small ? r : c, large = rows_small ? c : r;
  if (small > exhaustive_limit || small > 20) return assign_greedy(score);
  auto at = [&](size_t s, size_t l) { return rows_small ? score(s, l) : score(l, s); };

  // Exact search over subsets of the small side: dp[l][mask] is the best
  // total using the first l members of the large side with `mask` of the
  // small side already matched.
  const size_t states = size_t{1} << small;
  const double none = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(large + 1, std::vector<double>(states, none));
  std::vector<std::vector<int>> choice(large + 1, std::vector<int>(states, -1));
  dp[0][0] = 0.0;
  for (size_t l = 0; l < large; ++l) {
    for (size_t mask = 0; mask < states; ++mask) {
      if (dp[l][mask] == none) continue;
      if (dp[l][mask] > dp[l + 1][mask]) {
        dp[l + 1][mask] = dp[l][mask];
        choice[l + 1][mask] = -1;
      }
      for (size_t s = 0; s < small; ++s) {
        if (mask & (size_t{1} << s)) continue;
        const size_t next = mask | (size_t{1} << s);
        const double v = dp[l][mask] + at(s, l);
        if (v > dp[l + 1][next]) {
          dp[l + 1][next] = v;
          choice[l + 1][next] = static_cast<int>(s);
        }
      }
    }
  }
  // Every small-side member can be matched, so the full mask is reachable.
  size_t mask = states - 1;
  Assignment out;
  out.total = dp[large][mask];
  out.row_to_col.assign(r, -1);
  for (size_t l = large; l > 0; --l) {
    int s = choice[l][mask];
    if (s < 0) continue;
    if (rows_small) {
      out.row_to_col[static_cast<size_t>(s)] = static_cast<long>(l - 1);
    } else {
      out.row_to_col[l - 1] = s;
    }
    mask &= ~(size_t{1} << s);
  }
  return out;
}

TaxonomyReport compare_taxonomies(const Taxonomy& generated, const Taxonomy& reference) {
  if (generated.themes.empty() || reference.themes.empty()) throw ValidationError("taxonomy is empty");
  std::vector<std::vector<std::string>> gen, ref;
  for (const auto& t : generated.themes) gen.push_back(canonicalize_concepts(t.concepts));
  for (const auto& t : reference.themes) ref.push_back(canonicalize_concepts(t.concepts));
  TaxonomyReport report;
  report.jaccard = linalg::Matrix(gen.size(), ref.size());
  for (size_t i = 0; i < gen.size(); ++i) {
    for (size_t j = 0; j < ref.size(); ++j) {
      report.jaccard(i, j) = gen[i].empty() && ref[j].empty() ? 0.0 : jaccard_similarity(gen[i], ref[j]);
    }
  }
  Assignment a = assign_max(report.jaccard);
  report.method = a.method;
  report.assignment = a.row_to_col;
  std::vector<bool> theme_used(ref.size(), false);
  double sum = 0.0;
  for (size_t i = 0; i < gen.size(); ++i) {
    const long j = a.row_to_col[i];
    const bool miss = j < 0;
    report.unmatched.push_back(miss);
    report.per_topic_jaccard.push_back(miss ? 0.0 : report.jaccard(i, static_cast<size_t>(j)));
    if (!miss) theme_used[static_cast<size_t>(j)] = true;
    sum += report.per_topic_jaccard.back();
  }
  for (size_t j = 0; j < ref.size(); ++j) {
    if (!theme_used[j]) report.unmatched_themes.push_back(j);
  }
  if (gen.size() != ref.size()) {
    log::warn("taxonomy sizes differ: " + std::to_string(gen.size()) + " topics vs " + std::to_string(ref.size()) +
              " themes");
  }
  report.average = sum / static_cast<double>(gen.size());
  return report;
}

Taxonomy parse_taxonomy_json(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    Taxonomy t;
    for (const auto& theme : doc.at("themes")) {
      t.themes.push_back({theme.value("name", std::string()), theme.at("concepts").get<std::vector<std::string>>()});
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("taxonomy json: ") + e.what());
  }
}

Taxonomy load_taxonomy_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_taxonomy_json(buf.str());
}

std::string taxonomy_json(const Taxonomy& taxonomy) {
  ordered_json doc;
  doc["themes"] = ordered_json::array();
  for (const auto& t : taxonomy.themes) doc["themes"].push_back({{"name", t.name}, {"concepts", t.concepts}});
  return doc.dump(2) + "\n";
}

std::string report_json(const TaxonomyReport& report, const Taxonomy& generated, const Taxonomy& reference) {
  ordered_json doc;
  doc["method"] = report.method == AssignmentMethod::kExhaustive ? "exhaustive" : "greedy";
  doc["average"] = report.average;
  doc["topics"] = ordered_json::array();
  for (size_t i = 0; i < report.assignment.size(); ++i) {
    ordered_json row;
    row["topic"] = generated.themes[i].name;
    const long j = report.assignment[i];
    row["theme"] = j < 0 ? ordered_json(nullptr) : ordered_json(reference.themes[static_cast<size_t>(j)].name);
    row["jaccard"] = report.per_topic_jaccard[i];
    row["unmatched"] = static_cast<bool>(report.unmatched[i]);
    row["generated"] = canonicalize_concepts(generated.themes[i].concepts);
    if (j >= 0) row["reference"] = canonicalize_concepts(reference.themes[static_cast<size_t>(j)].concepts);
    doc["topics"].push_back(std::move(row));
  }
  doc["unmatched_themes"] = ordered_json::array();
  for (size_t j : report.unmatched_themes) doc["unmatched_themes"].push_back(reference.themes[j].name);
  return doc.dump(2) + "\n";
}

}  // namespace topictax
