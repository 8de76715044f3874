#pragma once

// Concept lists of the published four-topic comparison table: generated
// (statistical) lists and qualitative reference themes, as printed.

#include "topictax/taxo.h"

namespace topictax::testing {

inline Taxonomy published_generated() {
  return {{{"topic 0",
            {"Intelligence", "cognitive informatics", "logical", "symbol", "psychology", "mind", "model", "theory",
             "mathematical", "reason"}},
           {"topic 1",
            {"neuron", "spike", "neuromorphic", "power", "memory", "synopsis", "analog", "circuit", "spin",
             "von-Neuman"}},
           {"topic 2",
            {"language", "process", "AI", "neural network", "learn", "machine learn", "algorithm", "inference",
             "Watson", "question answer", "fuzzy"}},
           {"topic 3",
            {"agent", "service", "Watson", "organizations", "quality", "task", "communicate", "strategy", "behavior",
             "collaboration", "business"}}}};
}

inline Taxonomy published_reference() {
  return {{{"topic 0",
            {"Intelligence", "cognitive informatics", "theory", "cognitive science", "mathematics", "logic",
             "reasoning", "psychology", "symbolic", "inference"}},
           {"topic 1", {"neuromorphic", "spikes", "synapses", "Memory", "memristors", "parallel", "core"}},
           {"topic 2", {"AI", "neural network", "learn", "machine learn", "algorithm", "spike", "deep learn"}},
           {"topic 3",
            {"cognitive systems", "organizations", "business", "agents", "analytics", "inference", "adaptation",
             "evolution", "quality", "communication"}}}};
}

// Hand-counted |A n B| / |A u B| per topic under Porter canonical forms:
// 8/12, 3/14, 5/13, 5/16 on the diagonal assignment.
inline constexpr double kPublishedPerTopic[4] = {8.0 / 12.0, 3.0 / 14.0, 5.0 / 13.0, 5.0 / 16.0};
inline constexpr double kPublishedAverage = 6893.0 / 17472.0;

}  // namespace topictax::testing
