#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "topictax/errors.h"
#include "topictax/pipeline.h"

using namespace topictax;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(TOPICTAX_FIXTURE_DIR) / "synthetic40.jsonl";
const fs::path kReference = fs::path(TOPICTAX_FIXTURE_DIR) / "synthetic40_reference.json";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("topictax_test_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

PipelineConfig fast_config(const fs::path& out) {
  PipelineConfig c;
  c.corpus = kFixture;
  c.reference = kReference;
  c.out_dir = out;
  c.lda.iterations = 150;
  c.lda.burn_in = 50;
  c.inference.iterations = 40;
  c.inference.burn_in = 20;
  c.k_max = 8;
  return c;
}

int cli(const std::string& args) {
  int status = std::system((std::string(TOPICTAX_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("sha256 reference vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config defaults follow the reference methodology") {
  PipelineConfig c = parse_config("");
  CHECK(c.k_pilot == 10);
  CHECK(c.k_min == 2);
  CHECK(c.k_max == 15);
  CHECK(c.lambda == 0.33);
  CHECK(c.top_n == 10);
  CHECK(c.window == 110);
  CHECK(c.concepts == 10);
  CHECK(c.variants == std::vector<std::string>{"lda", "bilda", "lsi"});
  CHECK(c.cross_topic_only);
}

TEST_CASE("config parsing") {
  auto c = parse_config(
      "[corpus]\npath = docs.jsonl\n[run]\nseed = 7\njobs = 3\n[grid]\nvariants = lda, lsi\nk_max = 9\n"
      "[terms]\nlambda = 0.6\nrelevance = log\n[bigram]\nenabled = false\n[kg]\ncross_topic_only = no\n",
      "/base");
  CHECK(c.corpus == fs::path("/base/docs.jsonl"));
  CHECK(c.seed == 7);
  CHECK(c.jobs == 3);
  CHECK(c.variants == std::vector<std::string>{"lda", "lsi"});
  CHECK(c.k_max == 9);
  CHECK(c.lambda == 0.6);
  CHECK(c.relevance == RelevanceForm::kLog);
  CHECK(!c.bigrams);
  CHECK(!c.cross_topic_only);
  c.validate();

  CHECK_THROWS_AS(parse_config("[grid]\nk_maxx = 3\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[grid]\nk_max = many\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[kg]\ncross_topic_only = maybe\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("loose = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[grid\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[bigram]\nenabled = false\n").validate(), ValidationError);
  CHECK_THROWS_AS(parse_config("[terms]\nlambda = 2\n").validate(), ValidationError);
  CHECK_THROWS_AS(parse_config("[grid]\nk_min = 5\nk_max = 4\n").validate(), ValidationError);
}

TEST_CASE("config snapshot round trips") {
  PipelineConfig c;
  c.seed = 42;
  c.lda.alpha = 0.25;
  c.variants = {"lsi", "lda"};
  c.spring.tolerance = 1e-7;
  const auto text = config_text(c);
  CHECK(config_text(parse_config(text)) == text);
  PipelineConfig j = c;
  j.jobs = 8;
  j.out_dir = "/elsewhere";
  CHECK(config_text(j) == text);
}

TEST_CASE("unreadable corpus writes nothing") {
  auto dir = scratch("missing");
  PipelineConfig c;
  c.corpus = dir / "absent.jsonl";
  c.out_dir = dir / "out";
  CHECK_THROWS_AS(run_pipeline(c), ValidationError);
  CHECK(!fs::exists(c.out_dir));
  CHECK(cli("--out-dir " + c.out_dir.string() + " run " + c.corpus.string()) == 2);
  CHECK(!fs::exists(c.out_dir));
}

TEST_CASE("full run on the bundled fixture") {
  auto dir = scratch("full");
  auto c = fast_config(dir / "a");
  RunManifest m = run_pipeline(c);
  REQUIRE(m.stages.size() == all_stages().size());
  for (const auto& s : m.stages) CHECK_MESSAGE(s.status == "done", s.name);
  for (Stage st : all_stages()) {
    for (const auto& f : stage_outputs(st, c)) CHECK_MESSAGE(fs::exists(c.out_dir / f), f);
  }
  auto stored = parse_manifest_json(slurp(c.out_dir / "manifest.json"));
  CHECK(stored.digests() == m.digests());
  CHECK(stored.config == config_text(c));

  SUBCASE("identical digests at any job count") {
    for (int jobs : {2, 4}) {
      auto other = fast_config(dir / ("jobs" + std::to_string(jobs)));
      other.jobs = jobs;
      CHECK(run_pipeline(other).digests() == m.digests());
    }
  }
  SUBCASE("rerun reuses intact stages") {
    RunManifest again = run_pipeline(c);
    for (const auto& s : again.stages) CHECK(s.status == "cached");
    CHECK(again.digests() == m.digests());
  }
  SUBCASE("deleted downstream artifacts are rebuilt identically") {
    fs::remove(c.out_dir / "kg.json");
    fs::remove(c.out_dir / "report.html");
    RunManifest again = run_pipeline(c);
    CHECK(again.find("terms")->status == "cached");
    CHECK(again.find("kg")->status == "done");
    CHECK(again.digests() == m.digests());
  }
  SUBCASE("single stages run against existing artifacts") {
    auto r = run_stage(Stage::kReport, c);
    CHECK(r.outputs.at("report.html") == m.digests().at("report.html"));
    CHECK(cli("--out-dir " + c.out_dir.string() + " --corpus " + kFixture.string() + " report") == 0);
  }
  SUBCASE("changed config invalidates records") {
    auto changed = c;
    changed.lambda = 0.5;
    RunManifest again = run_pipeline(changed);
    CHECK(again.find("ingest")->status == "done");
    CHECK(again.digests().at("corpus.json") == m.digests().at("corpus.json"));
  }
  fs::remove_all(dir);
}

TEST_CASE("missing inputs and stage failures") {
  auto dir = scratch("fail");
  auto c = fast_config(dir / "out");
  CHECK_THROWS_AS(run_stage(Stage::kTerms, c), ValidationError);

  SUBCASE("bad reference keeps earlier artifacts") {
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{\"themes\": 3}";
    c.reference = dir / "bad.json";
    CHECK_THROWS_AS(run_pipeline(c), ValidationError);
    auto m = parse_manifest_json(slurp(c.out_dir / "manifest.json"));
    REQUIRE(m.find("compare") != nullptr);
    CHECK(m.find("compare")->status == "failed");
    CHECK(m.find("kg")->status == "done");
    CHECK(fs::exists(c.out_dir / "kg.json"));
  }
  SUBCASE("degenerate corpus is a stage failure") {
    fs::create_directories(dir);
    std::ofstream(dir / "empty.jsonl") << "{\"id\": \"a\", \"title\": \"\", \"abstract\": \"the of and\"}\n";
    c.corpus = dir / "empty.jsonl";
    CHECK_THROWS_AS(run_pipeline(c), StageError);
    CHECK(parse_manifest_json(slurp(c.out_dir / "manifest.json")).find("ingest")->status == "failed");
    CHECK(cli("--out-dir " + (dir / "cli").string() + " run " + c.corpus.string()) == 3);
  }
  fs::remove_all(dir);
}

TEST_CASE("report degrades per section") {
  auto dir = scratch("report");
  fs::create_directories(dir);
  std::string empty = render_report(dir);
  size_t missing = 0;
  for (size_t p = empty.find("Section unavailable"); p != std::string::npos; p = empty.find("Section unavailable", p + 1)) {
    ++missing;
  }
  CHECK(missing == 5);

  std::ofstream(dir / "selection.json")
      << R"({"best_family":"LDA","best_variant":"lda","k_best":3,"best_cell":{"coherence":0.5},)"
      << R"("stage1":[{"algorithm":"lda","k":10,"failed":false,"coherence":0.4,"perplexity":9.0}],)"
      << R"("stage2":[{"algorithm":"lda","k":2,"failed":false,"coherence":0.3,"perplexity":8.0},)"
      << R"({"algorithm":"lda","k":3,"failed":false,"coherence":0.5,"perplexity":7.0}]})";
  std::string partial = render_report(dir);
  CHECK(partial.find("<polyline") != std::string::npos);
  size_t left = 0;
  for (size_t p = partial.find("Section unavailable"); p != std::string::npos;
       p = partial.find("Section unavailable", p + 1)) {
    ++left;
  }
  CHECK(left == 4);
  CHECK(render_report(dir) == partial);
  fs::remove_all(dir);
}
