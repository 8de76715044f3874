#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topictax/corpus.h"
#include "topictax/kg.h"
#include "topictax/models.h"
#include "topictax/terms.h"

namespace topictax {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path reference;  // optional taxonomy JSON
  std::filesystem::path out_dir = "topictax_out";
  uint64_t seed = 1;
  int jobs = 1;  // never affects outputs

  // preprocess
  size_t min_token_len = 3;
  bool drop_numeric = true;
  std::filesystem::path extra_stopwords;
  uint32_t min_doc_freq = 2;

  // bigram
  bool bigrams = true;
  BigramPolicy bigram;

  // models; their seeds are derived from `seed`
  LdaConfig lda;
  LsiConfig lsi;
  InferenceOptions inference;

  // grid
  std::vector<std::string> variants = {"lda", "bilda", "lsi"};
  int k_pilot = 10;
  int k_min = 2;
  int k_max = 15;
  double heldout_fraction = 0.1;
  size_t top_n = 10;
  size_t window = 110;

  // train: empty variant / zero k take the grid's choice
  std::string train_variant;
  int train_k = 0;

  // terms
  double lambda = 0.33;
  size_t concepts = 10;
  size_t pool = 30;
  RelevanceForm relevance = RelevanceForm::kLinear;

  // kg
  bool cross_topic_only = true;
  SpringOptions spring;

  void validate() const;
};

// Flat INI text, one section per stage. Unknown sections or keys are
// validation errors. Relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// INI snapshot of every output-affecting setting (not jobs or out_dir).
std::string config_text(const PipelineConfig& config);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

enum class Stage { kIngest, kGrid, kTrain, kTerms, kMap, kKg, kCompare, kReport };

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();
// Artifact file names a stage writes under out_dir.
std::vector<std::string> stage_outputs(Stage stage, const PipelineConfig& config);

struct StageRecord {
  std::string name;
  std::string status;  // done, cached, skipped, failed
  double seconds = 0.0;
  std::map<std::string, std::string> outputs;  // file name -> sha256
  std::string error;
};

struct RunManifest {
  std::string version{kToolVersion};
  std::string config;         // config_text snapshot
  std::string config_digest;  // over the snapshot and the corpus bytes
  std::vector<StageRecord> stages;

  // Every output digest across stages.
  std::map<std::string, std::string> digests() const;
  const StageRecord* find(std::string_view stage) const;
};

std::string manifest_json(const RunManifest& manifest);
RunManifest parse_manifest_json(std::string_view text);

// Runs one stage against artifacts already in out_dir and records it in the
// manifest there. Throws ValidationError when inputs are missing and
// StageError when the stage fails.
StageRecord run_stage(Stage stage, const PipelineConfig& config);

// Full flow. Stages whose recorded outputs are intact under the same config
// digest are reused; everything after the first rerun stage is rebuilt. On
// failure the manifest records the failed stage and earlier artifacts stay.
RunManifest run_pipeline(const PipelineConfig& config);

// Static HTML page from whatever artifacts exist in out_dir. Missing inputs
// mark their section unavailable.
std::string render_report(const std::filesystem::path& out_dir);

}  // namespace topictax
