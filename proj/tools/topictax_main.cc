// topictax command line: one subcommand per pipeline stage plus `run`.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "topictax/errors.h"
#include "topictax/pipeline.h"

namespace {

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::optional<int> jobs;
  std::string corpus;
  std::string reference;
  std::string variant;
  std::optional<int> k;
};

topictax::PipelineConfig build_config(const Flags& f) {
  topictax::PipelineConfig c = f.config.empty() ? topictax::PipelineConfig{} : topictax::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.corpus.empty()) c.corpus = f.corpus;
  if (!f.reference.empty()) c.reference = f.reference;
  if (!f.variant.empty()) c.train_variant = f.variant;
  if (f.k) c.train_k = *f.k;
  return c;
}

void print_record(const topictax::StageRecord& r) {
  std::cout << r.name << ": " << r.status;
  for (const auto& [file, digest] : r.outputs) std::cout << "\n  " << file << " " << digest;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus-to-taxonomy topic modeling pipeline"};
  app.set_version_flag("--version", std::string(topictax::kToolVersion));
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Random seed for every stage");
  app.add_option("--out-dir", f.out_dir, "Artifact directory");
  app.add_option("--jobs", f.jobs, "Worker threads (outputs do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--corpus", f.corpus, "JSON-lines corpus of {id, title, abstract}");

  auto* run = app.add_subcommand("run", "Full pipeline, resuming intact stages");
  run->add_option("corpus", f.corpus, "JSON-lines corpus");
  run->add_option("--reference", f.reference, "Reference taxonomy JSON");
  auto* ingest = app.add_subcommand("ingest", "Read, preprocess, detect bigrams, build the document-term matrix");
  ingest->add_option("corpus", f.corpus, "JSON-lines corpus");
  app.add_subcommand("grid", "Two-stage model and K selection");
  auto* train = app.add_subcommand("train", "Train the selected model on the full corpus");
  train->add_option("--variant", f.variant, "Override the selected variant (lda, bilda, lsi)");
  train->add_option("--k", f.k, "Override the selected number of topics")->check(CLI::PositiveNumber);
  app.add_subcommand("terms", "Rank concepts per topic by saliency and relevance");
  app.add_subcommand("map", "Inter-topic distance map");
  app.add_subcommand("kg", "Cross-topic knowledge graph and layouts");
  auto* compare = app.add_subcommand("compare", "Jaccard comparison against a reference taxonomy");
  compare->add_option("reference", f.reference, "Reference taxonomy JSON");
  app.add_subcommand("report", "Static HTML report from existing artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    topictax::PipelineConfig config = build_config(f);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "run") {
      auto manifest = topictax::run_pipeline(config);
      for (const auto& r : manifest.stages) print_record(r);
    } else {
      print_record(topictax::run_stage(topictax::parse_stage(name), config));
    }
    return 0;
  } catch (const topictax::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const topictax::StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  }
}
