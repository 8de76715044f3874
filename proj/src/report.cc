#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "topictax/pipeline.h"

namespace topictax {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::optional<json> load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string unavailable(const std::string& what) {
  return "<p class=\"unavailable\">Section unavailable: " + esc(what) + " not found.</p>\n";
}

// Maps data coordinates into an SVG box with margins.
struct Frame {
  double x0, x1, y0, y1;
  double w = 420, h = 260, m = 40;
  double sx(double x) const { return m + (x1 == x0 ? 0.5 : (x - x0) / (x1 - x0)) * (w - 2 * m); }
  double sy(double y) const { return h - m - (y1 == y0 ? 0.5 : (y - y0) / (y1 - y0)) * (h - 2 * m); }
};

std::string line_chart(const std::string& title, const std::map<std::string, std::vector<std::pair<int, double>>>& series,
                       std::pair<int, double> mark) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [name, pts] : series) {
    for (auto [k, v] : pts) {
      x0 = std::min(x0, double(k));
      x1 = std::max(x1, double(k));
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (x0 > x1) return "<p>No finished cells.</p>\n";
  Frame f{x0, x1, y0, y1};
  std::string svg = "<svg class=\"chart\" viewBox=\"0 0 420 260\" width=\"420\" height=\"260\">\n";
  svg += "<text x=\"210\" y=\"16\" text-anchor=\"middle\">" + esc(title) + "</text>\n";
  svg += "<line x1=\"40\" y1=\"220\" x2=\"380\" y2=\"220\" stroke=\"#444\"/>\n";
  svg += "<line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"220\" stroke=\"#444\"/>\n";
  for (int k = static_cast<int>(x0); k <= static_cast<int>(x1); ++k) {
    svg += "<text x=\"" + f2(f.sx(k)) + "\" y=\"236\" text-anchor=\"middle\" font-size=\"10\">" + std::to_string(k) +
           "</text>\n";
  }
  svg += "<text x=\"36\" y=\"" + f2(f.sy(y1)) + "\" text-anchor=\"end\" font-size=\"10\">" + f4(y1) + "</text>\n";
  svg += "<text x=\"36\" y=\"" + f2(f.sy(y0)) + "\" text-anchor=\"end\" font-size=\"10\">" + f4(y0) + "</text>\n";
  size_t color = 0;
  int legend_y = 30;
  for (const auto& [name, pts] : series) {
    const char* c = kPalette[color++ % 10];
    std::string poly;
    for (auto [k, v] : pts) poly += f2(f.sx(k)) + "," + f2(f.sy(v)) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + poly + "\"/>\n";
    for (auto [k, v] : pts) {
      svg += "<circle cx=\"" + f2(f.sx(k)) + "\" cy=\"" + f2(f.sy(v)) + "\" r=\"2.5\" fill=\"" + c + "\"/>\n";
    }
    svg += "<text x=\"300\" y=\"" + std::to_string(legend_y) + "\" font-size=\"10\" fill=\"" + c + "\">" + esc(name) +
           "</text>\n";
    legend_y += 12;
  }
  if (mark.first > 0) {
    svg += "<circle cx=\"" + f2(f.sx(mark.first)) + "\" cy=\"" + f2(f.sy(mark.second)) +
           "\" r=\"6\" fill=\"none\" stroke=\"#000\"/>\n";
  }
  return svg + "</svg>\n";
}

std::string section_selection(const fs::path& dir) {
  auto sel = load(dir / "selection.json");
  if (!sel) return unavailable("selection.json");
  std::map<std::string, std::vector<std::pair<int, double>>> coh, perp;
  for (const auto& c : (*sel)["stage2"]) {
    if (c.value("failed", false)) continue;
    coh[c["algorithm"]].push_back({c["k"].get<int>(), c["coherence"].get<double>()});
    perp[c["algorithm"]].push_back({c["k"].get<int>(), c["perplexity"].get<double>()});
  }
  const auto& best = (*sel)["best_cell"];
  std::string out = "<p>Best family <b>" + esc((*sel)["best_family"].get<std::string>()) + "</b>, variant <b>" +
                    esc((*sel)["best_variant"].get<std::string>()) + "</b>, K = <b>" +
                    std::to_string((*sel)["k_best"].get<int>()) + "</b>, coherence " +
                    f4(best.value("coherence", 0.0)) + ".</p>\n";
  out += "<table><tr><th>pilot variant</th><th>K</th><th>coherence</th><th>perplexity</th></tr>\n";
  for (const auto& c : (*sel)["stage1"]) {
    out += "<tr><td>" + esc(c["algorithm"].get<std::string>()) + "</td><td>" + std::to_string(c["k"].get<int>()) +
           "</td>";
    if (c.value("failed", false)) {
      out += "<td colspan=\"2\">failed</td></tr>\n";
    } else {
      out += "<td>" + f4(c["coherence"].get<double>()) + "</td><td>" + f2(c["perplexity"].get<double>()) +
             "</td></tr>\n";
    }
  }
  out += "</table>\n";
  const std::pair<int, double> mark{(*sel)["k_best"].get<int>(), best.value("coherence", 0.0)};
  out += line_chart("Coherence (C_v) vs K", coh, mark);
  out += line_chart("Held-out perplexity vs K", perp, {0, 0.0});
  return out;
}

std::string section_map(const fs::path& dir) {
  auto map = load(dir / "topic_map.json");
  if (!map) return unavailable("topic_map.json");
  auto concepts = load(dir / "concepts.json");
  const auto& topics = (*map)["topics"];
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& t : topics) {
    x0 = std::min(x0, t["x"].get<double>());
    x1 = std::max(x1, t["x"].get<double>());
    y0 = std::min(y0, t["y"].get<double>());
    y1 = std::max(y1, t["y"].get<double>());
  }
  // Square frame so distances are not distorted.
  const double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  Frame f{cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2, 360, 360, 60};
  std::string svg = "<svg class=\"map\" viewBox=\"0 0 360 360\" width=\"360\" height=\"360\">\n";
  svg += "<line x1=\"180\" y1=\"10\" x2=\"180\" y2=\"350\" stroke=\"#ccc\"/>\n";
  svg += "<line x1=\"10\" y1=\"180\" x2=\"350\" y2=\"180\" stroke=\"#ccc\"/>\n";
  size_t i = 0;
  for (const auto& t : topics) {
    // Circle area proportional to the topic's share.
    const double r = 60.0 * std::sqrt(std::max(t["proportion"].get<double>(), 0.0));
    const std::string x = f2(f.sx(t["x"].get<double>())), y = f2(f.sy(t["y"].get<double>()));
    svg += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"" + f2(r) + "\" fill=\"" + kPalette[i % 10] +
           "\" fill-opacity=\"0.45\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + y + "\" text-anchor=\"middle\" dy=\"4\">" +
           std::to_string(t["topic"].get<size_t>()) + "</text>\n";
    ++i;
  }
  svg += "</svg>\n";
  std::string table = "<table><tr><th>topic</th><th>share</th><th>label</th></tr>\n";
  for (const auto& t : topics) {
    const size_t k = t["topic"].get<size_t>();
    std::string label;
    if (concepts && k < (*concepts)["topics"].size()) label = (*concepts)["topics"][k].value("label", "");
    table += "<tr><td>" + std::to_string(k) + "</td><td>" + f4(t["proportion"].get<double>()) + "</td><td>" +
             esc(label) + "</td></tr>\n";
  }
  return svg + table + "</table>\n";
}

std::string section_concepts(const fs::path& dir) {
  auto doc = load(dir / "concepts.json");
  if (!doc) return unavailable("concepts.json");
  std::string out = "<p>lambda = " + f2((*doc)["lambda"].get<double>()) + "</p>\n<div class=\"topics\">\n";
  for (const auto& t : (*doc)["topics"]) {
    out += "<table><tr><th colspan=\"3\">Topic " + std::to_string(t["topic"].get<size_t>()) +
           (t.value("short_list", false) ? " (short list)" : "") +
           "</th></tr>\n<tr><th>concept</th><th>relevance</th><th>saliency</th></tr>\n";
    for (const auto& c : t["concepts"]) {
      out += "<tr><td>" + esc(c["term"].get<std::string>()) + "</td><td>" + f4(c["relevance"].get<double>()) +
             "</td><td>" + f2(c["saliency"].get<double>()) + "</td></tr>\n";
    }
    out += "</table>\n";
  }
  return out + "</div>\n";
}

std::string graph_svg(const json& graph, const json& coords, const std::string& title) {
  const auto& nodes = graph["nodes"];
  std::map<std::string, std::pair<double, double>> pos;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& n : nodes) {
    const std::string id = n["id"];
    if (!coords.contains(id)) continue;
    const double x = coords[id][0].get<double>(), y = coords[id][1].get<double>();
    pos[id] = {x, y};
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  const double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  Frame f{cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2, 480, 480, 60};
  std::string svg = "<figure><svg class=\"kg\" viewBox=\"0 0 480 480\" width=\"480\" height=\"480\">\n";
  for (const auto& e : graph["edges"]) {
    auto a = pos.find(e["source"]), b = pos.find(e["target"]);
    if (a == pos.end() || b == pos.end()) continue;
    svg += "<line x1=\"" + f2(f.sx(a->second.first)) + "\" y1=\"" + f2(f.sy(a->second.second)) + "\" x2=\"" +
           f2(f.sx(b->second.first)) + "\" y2=\"" + f2(f.sy(b->second.second)) + "\" stroke=\"#666\" stroke-width=\"" +
           f2(0.5 * e["weight"].get<double>()) + "\"><title>" + esc(e["source"].get<std::string>()) + " " +
           esc(e["relation"].get<std::string>()) + " " + esc(e["target"].get<std::string>()) + "</title></line>\n";
  }
  for (const auto& n : nodes) {
    auto p = pos.find(n["id"]);
    if (p == pos.end()) continue;
    const int level = 255 - static_cast<int>(std::lround(std::clamp(n["shade"].get<double>(), 0.0, 1.0) * 191.0));
    char fill[8];
    std::snprintf(fill, sizeof fill, "#%02x%02x%02x", level, level, level);
    const std::string x = f2(f.sx(p->second.first)), y = f2(f.sy(p->second.second));
    svg += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"7\" fill=\"" + fill + "\" stroke=\"#000\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + y + "\" dy=\"-10\" text-anchor=\"middle\" font-size=\"10\">" +
           esc(n["id"].get<std::string>()) + "</text>\n";
  }
  return svg + "</svg><figcaption>" + esc(title) + "</figcaption></figure>\n";
}

std::string section_kg(const fs::path& dir) {
  auto graph = load(dir / "kg.json");
  auto layout = load(dir / "kg_layout.json");
  if (!graph || !layout) return unavailable("kg.json or kg_layout.json");
  const size_t n = (*graph)["nodes"].size(), m = (*graph)["edges"].size();
  std::string out = "<p>" + std::to_string(n) + " concepts, " + std::to_string(m) + " weighted relations.</p>\n";
  if (n == 0) return out;
  out += graph_svg(*graph, (*layout)["circular"], "Circular layout");
  out += graph_svg(*graph, (*layout)["kamada_kawai"],
                   "Kamada-Kawai layout, stress " + f4((*layout)["stress"].get<double>()));
  out += "<table><tr><th>source</th><th>relation</th><th>target</th><th>weight</th></tr>\n";
  for (const auto& e : (*graph)["edges"]) {
    out += "<tr><td>" + esc(e["source"].get<std::string>()) + "</td><td>" + esc(e["relation"].get<std::string>()) +
           "</td><td>" + esc(e["target"].get<std::string>()) + "</td><td>" +
           std::to_string(e["weight"].get<uint64_t>()) + "</td></tr>\n";
  }
  return out + "</table>\n";
}

std::string section_taxonomy(const fs::path& dir) {
  auto doc = load(dir / "taxonomy_report.json");
  if (!doc) return unavailable("taxonomy_report.json");
  std::string out = "<p>Average Jaccard similarity " + f4((*doc)["average"].get<double>()) + " (" +
                    esc((*doc)["method"].get<std::string>()) + " assignment).</p>\n";
  out += "<table><tr><th>topic</th><th>theme</th><th>Jaccard</th></tr>\n";
  for (const auto& t : (*doc)["topics"]) {
    out += "<tr><td>" + esc(t["topic"].get<std::string>()) + "</td><td>" +
           (t["theme"].is_null() ? std::string("unmatched") : esc(t["theme"].get<std::string>())) + "</td><td>" +
           f4(t["jaccard"].get<double>()) + "</td></tr>\n";
  }
  return out + "</table>\n";
}

}  // namespace

std::string render_report(const fs::path& dir) {
  std::string html =
      "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>topictax report</title>\n"
      "<style>\nbody{font-family:sans-serif;max-width:1000px;margin:2em auto;color:#222}\n"
      "table{border-collapse:collapse;margin:0.5em 1em 1em 0;display:inline-table;vertical-align:top}\n"
      "td,th{border:1px solid #bbb;padding:2px 6px;font-size:13px}\n"
      "figure{display:inline-block;margin:0 1em 1em 0}\n.unavailable{color:#a00;font-style:italic}\n"
      "</style>\n</head>\n<body>\n<h1>Topic taxonomy report</h1>\n";
  html += "<h2 id=\"selection\">Model selection</h2>\n" + section_selection(dir);
  html += "<h2 id=\"map\">Inter-topic distance map</h2>\n" + section_map(dir);
  html += "<h2 id=\"concepts\">Topic concepts</h2>\n" + section_concepts(dir);
  html += "<h2 id=\"kg\">Knowledge graph</h2>\n" + section_kg(dir);
  html += "<h2 id=\"taxonomy\">Taxonomy comparison</h2>\n" + section_taxonomy(dir);
  return html + "</body>\n</html>\n";
}

}  // namespace topictax
