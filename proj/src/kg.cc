#include "topictax/kg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "topictax/errors.h"
#include "topictax/parallel.h"
#include "topictax/text.h"

namespace topictax {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr size_t kNpos = static_cast<size_t>(-1);

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Common -ate/-ise words that are not verbs.
const std::unordered_set<std::string>& derivational_exceptions() {
  static const std::unordered_set<std::string> words = {
      "accurate", "adequate",  "appropriate", "candidate", "certificate", "climate",   "corporate",
      "delicate", "desperate", "doctorate",   "fortunate", "immediate",   "intermediate", "legitimate",
      "literate", "private",   "senate",      "substrate", "template",    "ultimate",  "adversarial",
      "concise",  "precise",   "expertise",   "enterprise", "premise",    "otherwise", "likewise",
      "elsewise", "clockwise", "franchise",   "merchandise", "paradise"};
  return words;
}

bool derivational(std::string_view w) {
  if (w.size() < 6) return false;
  if (!(ends_with(w, "ate") || ends_with(w, "ize") || ends_with(w, "ise") || ends_with(w, "ify"))) return false;
  return !derivational_exceptions().count(std::string(w));
}

std::vector<std::string> split_parts(std::string_view canonical) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= canonical.size()) {
    size_t end = canonical.find('_', start);
    if (end == std::string_view::npos) end = canonical.size();
    if (end > start) parts.emplace_back(canonical.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

bool matches_at(const Sentence& s, const std::vector<std::string>& parts, size_t i) {
  if (parts.empty() || i + parts.size() > s.stems.size()) return false;
  for (size_t j = 0; j < parts.size(); ++j) {
    if (s.stems[i + j] != parts[j]) return false;
  }
  return true;
}

void validate_concepts(const std::vector<Concept>& concepts) {
  std::unordered_set<std::string> seen;
  for (const auto& c : concepts) {
    if (split_parts(c.text).empty()) throw ValidationError("empty concept");
    if (!seen.insert(c.text).second) throw ValidationError("duplicate concept \"" + c.text + "\"");
  }
}

}  // namespace

VerbLexicon::VerbLexicon(std::string_view list_text) {
  for (auto& w : parse_word_list(list_text)) verbs_.insert(std::move(w));
}

const VerbLexicon& VerbLexicon::bundled() {
  static const VerbLexicon lexicon(bundled_verb_lexicon());
  return lexicon;
}

bool VerbLexicon::base_is_verb(std::string_view base) const {
  return base.size() >= 2 && (verbs_.count(std::string(base)) || derivational(base));
}

bool VerbLexicon::is_verb(std::string_view w) const {
  if (w.size() < 2) return false;
  for (char c : w) {
    if (c < 'a' || c > 'z') return false;
  }
  if (verbs_.count(std::string(w)) || derivational(w)) return true;
  auto stem_variants = [&](std::string_view b) {
    if (base_is_verb(b)) return true;
    if (base_is_verb(std::string(b) + "e")) return true;
    // Doubled final consonant: "mapped" -> "map".
    size_t n = b.size();
    return n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && base_is_verb(b.substr(0, n - 1));
  };
  if (ends_with(w, "ies") && w.size() > 4) return base_is_verb(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends_with(w, "ied") && w.size() > 4) return base_is_verb(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends_with(w, "ing") && w.size() > 5) return stem_variants(w.substr(0, w.size() - 3));
  if (ends_with(w, "ed") && w.size() > 4) return stem_variants(w.substr(0, w.size() - 2));
  if (ends_with(w, "es") && w.size() > 3 && base_is_verb(w.substr(0, w.size() - 2))) return true;
  if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() > 3) return base_is_verb(w.substr(0, w.size() - 1));
  return false;
}

std::pair<size_t, size_t> first_mention(const Sentence& sentence, std::string_view canonical) {
  auto parts = split_parts(canonical);
  for (size_t i = 0; i < sentence.stems.size(); ++i) {
    if (matches_at(sentence, parts, i)) return {i, i + parts.size()};
  }
  return {kNpos, kNpos};
}

std::string relation_between(const Sentence& sentence, std::pair<size_t, size_t> a, std::pair<size_t, size_t> b,
                             const VerbLexicon& verbs) {
  if (b.first < a.first) std::swap(a, b);
  for (size_t i = a.second; i < b.first && i < sentence.words.size(); ++i) {
    if (verbs.is_verb(sentence.words[i])) return sentence.words[i];
  }
  return "related_to";
}

std::vector<Triple> extract_relations(std::span<const Sentence> sentences, const std::vector<Concept>& concepts,
                                      const ExtractOptions& options, const VerbLexicon& verbs) {
  validate_concepts(concepts);
  if (concepts.empty()) return {};
  std::vector<std::vector<std::string>> parts;
  std::unordered_map<std::string, std::vector<size_t>> by_first;
  for (size_t c = 0; c < concepts.size(); ++c) {
    parts.push_back(split_parts(concepts[c].text));
    by_first[parts.back().front()].push_back(c);
  }

  std::vector<std::vector<Triple>> per_sentence(sentences.size());
  parallel_for(sentences.size(), options.jobs, [&](size_t si) {
    const Sentence& s = sentences[si];
    std::vector<std::pair<size_t, size_t>> mention(concepts.size(), {kNpos, kNpos});
    std::vector<size_t> present;
    for (size_t i = 0; i < s.stems.size(); ++i) {
      auto it = by_first.find(s.stems[i]);
      if (it == by_first.end()) continue;
      for (size_t c : it->second) {
        if (mention[c].first == kNpos && matches_at(s, parts[c], i)) {
          mention[c] = {i, i + parts[c].size()};
          present.push_back(c);
        }
      }
    }
    if (present.size() < 2) return;
    std::sort(present.begin(), present.end());
    auto& out = per_sentence[si];
    for (size_t tc : present) {
      for (size_t tj : present) {
        if (tc == tj) continue;
        if (options.cross_topic_only && concepts[tc].topic == concepts[tj].topic) continue;
        out.push_back({concepts[tc].text, relation_between(s, mention[tc], mention[tj], verbs), concepts[tj].text, si});
      }
    }
  });
  std::vector<Triple> triples;
  for (auto& v : per_sentence) {
    for (auto& t : v) triples.push_back(std::move(t));
  }
  return triples;
}

size_t WeightedGraph::node_index(std::string_view id) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return nodes.size();
}

WeightedGraph reduce_edge_weights(std::span<const Triple> triples) {
  WeightedGraph g;
  std::unordered_map<std::string, size_t> node_of;
  std::map<std::pair<std::string, std::string>, size_t> edge_of;
  auto node = [&](const std::string& id) {
    auto [it, inserted] = node_of.emplace(id, g.nodes.size());
    if (inserted) g.nodes.push_back({id, 0.0, 0});
    return it->second;
  };
  for (const auto& t : triples) {
    if (t.source == t.target) throw ValidationError("self relation on \"" + t.source + "\"");
    size_t a = node(t.source), b = node(t.target);
    auto key = std::minmax(t.source, t.target);
    auto [it, inserted] = edge_of.emplace(std::make_pair(key.first, key.second), g.edges.size());
    if (inserted) g.edges.push_back({t.source, t.target, t.relation, 0});
    ++g.edges[it->second].weight;
    ++g.nodes[a].relation_count;
    ++g.nodes[b].relation_count;
  }
  uint64_t top = 0;
  for (const auto& n : g.nodes) top = std::max(top, n.relation_count);
  for (auto& n : g.nodes) n.shade = top == 0 ? 0.0 : static_cast<double>(n.relation_count) / static_cast<double>(top);
  return g;
}

LayoutCoords layout_circular(const WeightedGraph& graph) {
  LayoutCoords out;
  const size_t n = graph.nodes.size();
  for (size_t i = 0; i < n; ++i) {
    double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    out.xy.push_back({std::cos(angle), std::sin(angle)});
  }
  return out;
}

StressFunction::StressFunction(linalg::Matrix distance, double spring_length)
    : d_(std::move(distance)), length_(spring_length) {}

double StressFunction::value(std::span<const double> x) const {
  const size_t n = size();
  double e = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double d = d_(i, j);
      if (!std::isfinite(d) || d <= 0.0) continue;
      const double r = std::hypot(x[2 * i] - x[2 * j], x[2 * i + 1] - x[2 * j + 1]);
      const double diff = r - length_ * d;
      e += diff * diff / (d * d);
    }
  }
  return e;
}

void StressFunction::gradient(std::span<const double> x, std::span<double> grad) const {
  const size_t n = size();
  std::fill(grad.begin(), grad.end(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double d = d_(i, j);
      if (!std::isfinite(d) || d <= 0.0) continue;
      const double dx = x[2 * i] - x[2 * j], dy = x[2 * i + 1] - x[2 * j + 1];
      const double r = std::hypot(dx, dy);
      if (r == 0.0) continue;
      const double coef = 2.0 * (r - length_ * d) / (d * d * r);
      grad[2 * i] += coef * dx;
      grad[2 * i + 1] += coef * dy;
      grad[2 * j] -= coef * dx;
      grad[2 * j + 1] -= coef * dy;
    }
  }
}

linalg::Matrix graph_distances(const WeightedGraph& graph) {
  const size_t n = graph.nodes.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::pair<size_t, double>>> adj(n);
  for (const auto& e : graph.edges) {
    size_t a = graph.node_index(e.source), b = graph.node_index(e.target);
    if (a == n || b == n || e.weight == 0) throw ValidationError("malformed edge " + e.source + " -- " + e.target);
    double len = 1.0 / static_cast<double>(e.weight);
    adj[a].push_back({b, len});
    adj[b].push_back({a, len});
  }
  linalg::Matrix dist(n, n, inf);
  using Item = std::pair<double, size_t>;
  for (size_t s = 0; s < n; ++s) {
    auto row = dist.row(s);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    row[s] = 0.0;
    heap.push({0.0, s});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > row[u]) continue;
      for (auto [v, len] : adj[u]) {
        if (d + len < row[v]) {
          row[v] = d + len;
          heap.push({row[v], v});
        }
      }
    }
  }
  return dist;
}

namespace {

// Gradient descent with Armijo backtracking. Returns iterations used.
int minimize_stress(const StressFunction& f, std::vector<double>& x, const SpringOptions& options) {
  std::vector<double> g(x.size()), trial(x.size());
  double fx = f.value(x);
  double step = 1.0;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    f.gradient(x, g);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    if (std::sqrt(g2) < options.tolerance) break;
    step = std::min(step * 2.0, 1e6);
    double ft = 0.0;
    for (;;) {
      for (size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - step * g[i];
      ft = f.value(trial);
      if (ft <= fx - 1e-4 * step * g2) break;
      step *= 0.5;
      if (step < 1e-30) return it;
    }
    x.swap(trial);
    fx = ft;
  }
  return it;
}

}  // namespace

LayoutCoords layout_kamada_kawai(const WeightedGraph& graph, const SpringOptions& options) {
  const size_t n = graph.nodes.size();
  if (n == 0) throw ValidationError("nothing to lay out");
  linalg::Matrix dist = graph_distances(graph);

  // Components in order of their first node.
  std::vector<long> comp(n, -1);
  std::vector<std::vector<size_t>> members;
  for (size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    members.emplace_back();
    for (size_t v = s; v < n; ++v) {
      if (std::isfinite(dist(s, v))) {
        comp[v] = static_cast<long>(members.size() - 1);
        members.back().push_back(v);
      }
    }
  }

  LayoutCoords out;
  out.xy.assign(n, {0.0, 0.0});
  std::vector<std::array<double, 4>> boxes;  // min x, min y, max x, max y
  for (const auto& m : members) {
    const size_t k = m.size();
    linalg::Matrix sub(k, k);
    for (size_t a = 0; a < k; ++a) {
      for (size_t b = 0; b < k; ++b) sub(a, b) = dist(m[a], m[b]);
    }
    StressFunction f(std::move(sub), options.spring_length);
    std::vector<double> x(2 * k, 0.0);
    if (k > 1) {
      for (size_t a = 0; a < k; ++a) {
        double angle = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(k);
        x[2 * a] = std::cos(angle);
        x[2 * a + 1] = std::sin(angle);
      }
    }
    out.initial_stress += f.value(x);
    out.iterations = std::max(out.iterations, minimize_stress(f, x, options));
    out.stress += f.value(x);
    std::array<double, 4> box{x[0], x[1], x[0], x[1]};
    for (size_t a = 0; a < k; ++a) {
      out.xy[m[a]] = {x[2 * a], x[2 * a + 1]};
      box[0] = std::min(box[0], x[2 * a]);
      box[1] = std::min(box[1], x[2 * a + 1]);
      box[2] = std::max(box[2], x[2 * a]);
      box[3] = std::max(box[3], x[2 * a + 1]);
    }
    boxes.push_back(box);
  }

  if (members.size() > 1) {
    const size_t cols = static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(members.size()))));
    double cell_w = 0.0, cell_h = 0.0;
    for (const auto& b : boxes) {
      cell_w = std::max(cell_w, b[2] - b[0]);
      cell_h = std::max(cell_h, b[3] - b[1]);
    }
    cell_w += options.padding;
    cell_h += options.padding;
    for (size_t c = 0; c < members.size(); ++c) {
      const double ox = static_cast<double>(c % cols) * cell_w - boxes[c][0];
      const double oy = -static_cast<double>(c / cols) * cell_h - boxes[c][1];
      for (size_t v : members[c]) {
        out.xy[v][0] += ox;
        out.xy[v][1] += oy;
      }
    }
  }
  return out;
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "csv" || name == "edgelist-csv") return GraphFormat::kEdgeListCsv;
  if (name == "dot") return GraphFormat::kDot;
  if (name == "json" || name == "graph-json") return GraphFormat::kJson;
  throw ValidationError("unknown graph format \"" + std::string(name) + "\"");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string num(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string gray(double shade) {
  // Darker fill for nodes with more relations.
  int level = 255 - static_cast<int>(std::lround(std::clamp(shade, 0.0, 1.0) * 191.0));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
  return buf;
}

}  // namespace

std::string format_graph(const WeightedGraph& graph, GraphFormat format, const LayoutCoords* layout) {
  if (layout != nullptr && layout->xy.size() != graph.nodes.size()) {
    throw ValidationError("layout does not cover the graph");
  }
  std::string out;
  switch (format) {
    case GraphFormat::kEdgeListCsv:
      out = "source,relation,target,weight\n";
      for (const auto& e : graph.edges) {
        out += csv_field(e.source) + "," + csv_field(e.relation) + "," + csv_field(e.target) + "," +
               std::to_string(e.weight) + "\n";
      }
      return out;
    case GraphFormat::kDot:
      out = "graph kg {\n  node [style=filled];\n";
      for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        out += "  " + dot_id(n.id) + " [label=" + dot_id(n.id) + ", shade=" + num(n.shade) +
               ", relation_count=" + std::to_string(n.relation_count) + ", fillcolor=" + dot_id(gray(n.shade));
        if (layout != nullptr) {
          out += ", pos=" + dot_id(num(layout->xy[i][0], "%.6f") + "," + num(layout->xy[i][1], "%.6f") + "!");
        }
        out += "];\n";
      }
      for (const auto& e : graph.edges) {
        out += "  " + dot_id(e.source) + " -- " + dot_id(e.target) + " [label=" + dot_id(e.relation) +
               ", weight=" + std::to_string(e.weight) + ", penwidth=" + std::to_string(e.weight) + "];\n";
      }
      return out + "}\n";
    case GraphFormat::kJson: {
      ordered_json doc;
      doc["nodes"] = ordered_json::array();
      for (const auto& n : graph.nodes) {
        doc["nodes"].push_back({{"id", n.id}, {"shade", n.shade}, {"relation_count", n.relation_count}});
      }
      doc["edges"] = ordered_json::array();
      for (const auto& e : graph.edges) {
        doc["edges"].push_back(
            {{"source", e.source}, {"target", e.target}, {"relation", e.relation}, {"weight", e.weight}});
      }
      return doc.dump(2) + "\n";
    }
  }
  throw ValidationError("unknown graph format");
}

void export_graph(const WeightedGraph& graph, GraphFormat format, const std::filesystem::path& path,
                  const LayoutCoords* layout) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << format_graph(graph, format, layout);
  if (!out) throw StageError("write failed: " + path.string());
}

WeightedGraph parse_graph_json(std::string_view text) {
  try {
    json doc = json::parse(text);
    WeightedGraph g;
    for (const auto& n : doc.at("nodes")) {
      g.nodes.push_back({n.at("id").get<std::string>(), n.at("shade").get<double>(),
                         n.value("relation_count", uint64_t{0})});
    }
    for (const auto& e : doc.at("edges")) {
      g.edges.push_back({e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                         e.at("relation").get<std::string>(), e.at("weight").get<uint64_t>()});
    }
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph json: ") + e.what());
  }
}

WeightedGraph load_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str());
}

std::string layout_json(const WeightedGraph& graph, const LayoutCoords& circular, const LayoutCoords& spring) {
  ordered_json doc;
  auto coords = [&](const LayoutCoords& l) {
    ordered_json m = ordered_json::object();
    for (size_t i = 0; i < graph.nodes.size(); ++i) m[graph.nodes[i].id] = {l.xy[i][0], l.xy[i][1]};
    return m;
  };
  doc["circular"] = coords(circular);
  doc["kamada_kawai"] = coords(spring);
  doc["stress"] = spring.stress;
  doc["initial_stress"] = spring.initial_stress;
  return doc.dump(2) + "\n";
}

}  // namespace topictax
