#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "topictax/corpus.h"
#include "topictax/linalg.h"

namespace topictax {

struct Concept {
  std::string text;  // canonical form, e.g. "neuromorph" or "machin_learn"
  size_t topic = 0;
};

struct Triple {
  std::string source;
  std::string relation;
  std::string target;
  size_t sentence = 0;
  bool operator==(const Triple&) const = default;
};

// Verb test used for relation labels: lexicon lookup, then inflection
// stripping (-s, -es, -ies, -ed, -ied, -ing with e-restoration and doubled
// consonants) checked against the lexicon, then derivational endings
// (-ate, -ize, -ise, -ify) on words of six letters or more.
class VerbLexicon {
 public:
  explicit VerbLexicon(std::string_view list_text);
  static const VerbLexicon& bundled();
  bool is_verb(std::string_view word) const;

 private:
  bool base_is_verb(std::string_view base) const;
  std::unordered_set<std::string> verbs_;
};

// Canonical concept mentions in a sentence: a concept matches where its
// underscore-separated parts equal consecutive entries of sentence.stems.
// Returns [begin, end) of the first match, or {npos, npos}.
std::pair<size_t, size_t> first_mention(const Sentence& sentence, std::string_view canonical);

// Relation label between two mentions: the first verb among the surface
// words strictly between them, else "related_to".
std::string relation_between(const Sentence& sentence, std::pair<size_t, size_t> a,
                             std::pair<size_t, size_t> b, const VerbLexicon& verbs);

struct ExtractOptions {
  bool cross_topic_only = true;
  int jobs = 1;
};

// For every sentence and every ordered pair (tc, tj) of distinct concepts
// mentioned in it (different topics when cross_topic_only) emits
// (tc, relation, tj). Ordered by sentence, then tc, then tj in list order.
// Concepts must be distinct.
std::vector<Triple> extract_relations(std::span<const Sentence> sentences, const std::vector<Concept>& concepts,
                                      const ExtractOptions& options = {},
                                      const VerbLexicon& verbs = VerbLexicon::bundled());

struct GraphNode {
  std::string id;
  double shade = 0.0;           // relation_count / max relation_count
  uint64_t relation_count = 0;  // sum of incident edge weights
  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string source;
  std::string target;
  std::string relation;
  uint64_t weight = 0;
  bool operator==(const GraphEdge&) const = default;
};

struct WeightedGraph {
  std::vector<GraphNode> nodes;  // first-appearance order
  std::vector<GraphEdge> edges;  // first-appearance order
  size_t node_index(std::string_view id) const;
  bool operator==(const WeightedGraph&) const = default;
};

// Groups triples by unordered concept pair. Weight is the occurrence count;
// the first-seen relation and orientation are kept.
WeightedGraph reduce_edge_weights(std::span<const Triple> triples);

struct LayoutCoords {
  std::vector<std::array<double, 2>> xy;  // node order
  double stress = 0.0;
  double initial_stress = 0.0;
  int iterations = 0;
};

// Unit circle, node i at angle 2 pi i / n.
LayoutCoords layout_circular(const WeightedGraph& graph);

struct SpringOptions {
  int max_iterations = 2000;
  double tolerance = 1e-9;  // on the gradient norm
  double spring_length = 1.0;
  double padding = 1.0;  // between packed components
};

// Stress of a layout against target path lengths:
// sum_{i<j} (|x_i - x_j| - L d_ij)^2 / d_ij^2 over finite d_ij.
class StressFunction {
 public:
  StressFunction(linalg::Matrix distance, double spring_length);
  size_t size() const { return d_.rows(); }
  double value(std::span<const double> x) const;  // x holds (x0, y0, x1, y1, ...)
  void gradient(std::span<const double> x, std::span<double> grad) const;

 private:
  linalg::Matrix d_;
  double length_;
};

// All-pairs shortest paths with edge length 1 / weight; infinity between
// components.
linalg::Matrix graph_distances(const WeightedGraph& graph);

// Kamada-Kawai: per connected component, gradient descent with Armijo
// backtracking from the circular layout; components packed on a grid.
LayoutCoords layout_kamada_kawai(const WeightedGraph& graph, const SpringOptions& options = {});

enum class GraphFormat { kEdgeListCsv, kDot, kJson };
GraphFormat parse_graph_format(std::string_view name);

// Layout is optional for csv and json; dot uses it for node positions when
// given.
std::string format_graph(const WeightedGraph& graph, GraphFormat format, const LayoutCoords* layout = nullptr);
void export_graph(const WeightedGraph& graph, GraphFormat format, const std::filesystem::path& path,
                  const LayoutCoords* layout = nullptr);
WeightedGraph load_graph_json(const std::filesystem::path& path);
WeightedGraph parse_graph_json(std::string_view text);

std::string layout_json(const WeightedGraph& graph, const LayoutCoords& circular, const LayoutCoords& spring);

}  // namespace topictax
