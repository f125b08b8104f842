#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evochunk/annotate.hpp"
#include "evochunk/pipeline.hpp"
#include "evochunk/tagger.hpp"
#include "support/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace evochunk;

// Scratch directory for tests that exercise the file-based experiment entry
// point; removed on destruction.
struct TempDir {
  fs::path path;

  TempDir() {
    path = fs::temp_directory_path() /
           ("evochunk_pipeline_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<AuxColumns> gold_cols(const Treebank& t) {
  std::vector<AuxColumns> cols(t.sentences.size());
  for (std::size_t i = 0; i < t.sentences.size(); ++i) {
    for (const Token& tok : t.sentences[i].tokens) {
      cols[i].pos.push_back(tok.upos);
      cols[i].feats.push_back(tok.feats);
    }
  }
  return cols;
}

TEST_CASE("feature sources parse and print") {
  CHECK(parse_feature_sources("") == FeatureSources{});
  CHECK(parse_feature_sources("none") == FeatureSources{});
  const FeatureSources pc = parse_feature_sources(" pos , chunks ");
  CHECK(pc.pos);
  CHECK_FALSE(pc.feats);
  CHECK(pc.chunks);
  CHECK(feature_sources_name(pc) == "pos+chunks");
  CHECK(feature_sources_name(FeatureSources{}) == "none");
  CHECK(feature_sources_name(parse_feature_sources("pos,feats,chunks")) ==
        "pos+feats+chunks");
  CHECK_THROWS_AS(parse_feature_sources("pos,lemmas"), std::exception);
}

TEST_CASE("task sets parse and print") {
  const TaskSet t = parse_tasks("pos,deplabels");
  CHECK(t.pos);
  CHECK_FALSE(t.feats);
  CHECK_FALSE(t.chunks);
  CHECK(t.deplabels);
  CHECK(tasks_name(t) == "pos,deplabels");
  CHECK(tasks_name(parse_tasks("none")) == "none");
  CHECK_THROWS_AS(parse_tasks("pos,parsing"), std::exception);
}

TEST_CASE("gold_dep_labels stringifies the encoded tree") {
  const Sentence s = synth::make_sentence({{"the", "DET", 2, "det"},
                                           {"cat", "NOUN", 3, "nsubj"},
                                           {"sat", "VERB", 0}});
  CHECK(gold_dep_labels(s) ==
        std::vector<std::string>{"+1,det,NOUN", "+1,nsubj,VERB", "0,root,ROOT"});
}

TEST_CASE("dep labeler features reflect the enabled sources") {
  const std::vector<std::string> forms = {"the", "cat"};
  AuxColumns cols;
  cols.pos = {"DET", "NOUN"};
  cols.chunks = {"B-NOUN", "I-NOUN"};
  std::vector<std::string> out;
  auto has = [&](const std::string& f) {
    return std::find(out.begin(), out.end(), f) != out.end();
  };

  dep_labeler_features(forms, 0, "<s>", FeatureSources{}, cols, out);
  CHECK(has("w=the"));
  CHECK(has("t-1=<s>"));
  for (const std::string& f : out) {
    CHECK(f.rfind("p=", 0) != 0);
    CHECK(f.rfind("c=", 0) != 0);
  }

  FeatureSources pos_only;
  pos_only.pos = true;
  dep_labeler_features(forms, 0, "<s>", pos_only, cols, out);
  CHECK(has("p=DET"));
  CHECK(has("p+1=NOUN"));
  CHECK(has("pt0=<s>_DET_NOUN"));

  FeatureSources chunks_only;
  chunks_only.chunks = true;
  dep_labeler_features(forms, 1, "+1,det,NOUN", chunks_only, cols, out);
  CHECK(has("c=I-NOUN"));
  CHECK(has("c-1=B-NOUN"));
  CHECK(has("cb+1=I-NOUN_</s>"));
  CHECK(has("t-1=+1,det,NOUN"));
}

TEST_CASE("dep labeler learns template dependency labels") {
  const Treebank train = synth::make_udlike_corpus(21, 200);
  const Treebank dev = synth::make_udlike_corpus(22, 50);
  const auto train_cols = gold_cols(train);
  const auto dev_cols = gold_cols(dev);
  FeatureSources sources;
  sources.pos = true;
  DepLabelerOptions opts;
  opts.epochs = 5;
  opts.seed = 3;
  const DepLabeler labeler =
      DepLabeler::train(train, train_cols, sources, opts, &dev, &dev_cols);
  CHECK(labeler.best_epoch() >= 1);
  CHECK(labeler.best_epoch() <= 5);

  const auto pred = labeler.predict(dev, dev_cols);
  long long total = 0, correct = 0;
  for (std::size_t i = 0; i < dev.sentences.size(); ++i) {
    const auto gold = gold_dep_labels(dev.sentences[i]);
    REQUIRE(pred[i].size() == gold.size());
    for (std::size_t j = 0; j < gold.size(); ++j) {
      ++total;
      if (gold[j] == pred[i][j]) ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("dep labeler rejects misaligned columns") {
  const Treebank train = synth::make_udlike_corpus(21, 10);
  FeatureSources sources;
  sources.pos = true;
  DepLabelerOptions opts;
  opts.epochs = 1;
  CHECK_THROWS_AS(
      DepLabeler::train(train, std::vector<AuxColumns>(3), sources, opts),
      std::invalid_argument);
  std::vector<AuxColumns> short_cols(train.sentences.size());  // empty pos columns
  CHECK_THROWS_AS(DepLabeler::train(train, short_cols, sources, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(DepLabeler::train(Treebank{}, {}, sources, opts),
                  std::invalid_argument);

  const auto cols = gold_cols(train);
  const DepLabeler labeler = DepLabeler::train(train, cols, sources, opts);
  AuxColumns wrong;
  wrong.pos = {"DET"};
  CHECK_THROWS_AS(labeler.predict(train.sentences[0], wrong), std::invalid_argument);
  CHECK_THROWS_AS(labeler.predict(train, std::vector<AuxColumns>(1)),
                  std::invalid_argument);
}

TEST_CASE("dep labeler models survive save/load") {
  const Treebank train = synth::make_udlike_corpus(21, 60);
  const auto cols = gold_cols(train);
  FeatureSources sources = parse_feature_sources("pos,feats");
  DepLabelerOptions opts;
  opts.epochs = 2;
  opts.seed = 5;
  const DepLabeler labeler = DepLabeler::train(train, cols, sources, opts);
  std::ostringstream out;
  labeler.save(out);
  std::istringstream in(out.str());
  const DepLabeler back = DepLabeler::load(in);
  CHECK(back.sources() == sources);
  CHECK(back.best_epoch() == labeler.best_epoch());
  CHECK(back.predict(train, cols) == labeler.predict(train, cols));

  std::string bytes = out.str();
  const auto pos = bytes.find("deplabeler");
  REQUIRE(pos != std::string::npos);
  bytes.replace(pos, 10, "otherthing");
  std::istringstream wrong(bytes);
  CHECK_THROWS_AS(DepLabeler::load(wrong), std::exception);
}

TEST_CASE("experiment config round-trips through its file format") {
  ExperimentConfig cfg;
  cfg.train_path = "train.conllu";
  cfg.dev_path = "dev.conllu";
  cfg.test_path = "test.conllu";
  cfg.ruleset75_path = "rules75.tsv";
  cfg.ruleset95_path = "rules95.tsv";
  cfg.tasks = parse_tasks("pos,chunks,deplabels");
  cfg.feature_sources = parse_feature_sources("pos,chunks");
  cfg.runtime_gold_features = true;
  cfg.tagger_epochs = 7;
  cfg.chunker_epochs = 4;
  cfg.labeler_epochs = 6;
  cfg.seed = 12;
  std::ostringstream out;
  save_experiment_config(cfg, out);
  std::istringstream in(out.str());
  const ExperimentConfig back = load_experiment_config(in);
  CHECK(back.train_path == cfg.train_path);
  CHECK(back.dev_path == cfg.dev_path);
  CHECK(back.test_path == cfg.test_path);
  CHECK(back.ruleset75_path == cfg.ruleset75_path);
  CHECK(back.ruleset95_path == cfg.ruleset95_path);
  CHECK(tasks_name(back.tasks) == tasks_name(cfg.tasks));
  CHECK(back.feature_sources == cfg.feature_sources);
  CHECK(back.runtime_gold_features == cfg.runtime_gold_features);
  CHECK(back.tagger_epochs == 7);
  CHECK(back.chunker_epochs == 4);
  CHECK(back.labeler_epochs == 6);
  CHECK(back.seed == 12);

  std::istringstream unknown("train = a.conllu\nmystery = 1\n");
  CHECK_THROWS_AS(load_experiment_config(unknown), std::exception);
  std::istringstream bad("runtime_features = sometimes\n");
  CHECK_THROWS_AS(load_experiment_config(bad), std::exception);
  std::istringstream bad_int("tagger_epochs = few\n");
  CHECK_THROWS_AS(load_experiment_config(bad_int), std::exception);
}

TEST_CASE("report formats parse") {
  CHECK(parse_report_format("text") == ReportFormat::kText);
  CHECK(parse_report_format("tsv") == ReportFormat::kTsv);
  CHECK_THROWS_AS(parse_report_format("json"), std::exception);
}

ExperimentReport sample_report() {
  ExperimentReport report;
  report.config_echo = {{"train", "a.conllu"}, {"tasks", "pos,deplabels"}};
  report.task_metrics = {{"pos_accuracy", 97.251}, {"chunk_f1", 88.0}};
  report.has_chunk_block = true;
  report.chunk_block.ruleset = "75";
  report.chunk_block.rules = 14;
  report.chunk_block.chunks = 120;
  report.chunk_block.outside = 310;
  report.chunk_block.rate = 1.4362;
  report.chunk_block.chunks_per_sentence = 2.41;
  report.ablation = {{"none", 61.4, 55.2}, {"pos", 72.0, 66.6}};
  report.wall_clock_seconds = 3.5;  // must never appear in the output
  return report;
}

TEST_CASE("tsv reports round-trip byte for byte") {
  const ExperimentReport report = sample_report();
  std::ostringstream tsv;
  emit_report(report, ReportFormat::kTsv, tsv);
  CHECK(tsv.str().find("task\tpos_accuracy\t97.25\n") != std::string::npos);
  CHECK(tsv.str().find("chunkstats\trate\t1.44\n") != std::string::npos);
  CHECK(tsv.str().find("ablation\tpos\t72.00\t66.60\n") != std::string::npos);
  CHECK(tsv.str().find("wall") == std::string::npos);

  std::istringstream in(tsv.str());
  const ExperimentReport parsed = parse_report_tsv(in);
  CHECK(parsed.config_echo == report.config_echo);
  CHECK(parsed.has_chunk_block);
  CHECK(parsed.chunk_block.ruleset == "75");
  CHECK(parsed.chunk_block.rules == 14);
  std::ostringstream again;
  emit_report(parsed, ReportFormat::kTsv, again);
  CHECK(again.str() == tsv.str());
}

TEST_CASE("text reports carry the same numbers in sections") {
  std::ostringstream text;
  emit_report(sample_report(), ReportFormat::kText, text);
  CHECK(text.str().find("== config ==\n") != std::string::npos);
  CHECK(text.str().find("pos_accuracy = 97.25\n") != std::string::npos);
  CHECK(text.str().find("== chunk statistics ==\n") != std::string::npos);
  CHECK(text.str().find("features\tuas\tlas\n") != std::string::npos);
  CHECK(text.str().find("pos\t72.00\t66.60\n") != std::string::npos);
}

TEST_CASE("tsv report parsing reports the offending line") {
  std::istringstream bad("config\ttrain\ta.conllu\nwhat\tis\tthis\n");
  try {
    parse_report_tsv(bad);
    FAIL("expected an exception");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream short_row("config\ttrain\n");
  CHECK_THROWS_AS(parse_report_tsv(short_row), std::exception);
  std::istringstream bad_value("task\tpos_accuracy\thigh\n");
  CHECK_THROWS_AS(parse_report_tsv(bad_value), std::exception);
}

TEST_CASE("run_experiment produces a full deterministic report") {
  TempDir dir;
  const Treebank train = synth::make_udlike_corpus(31, 150);
  const Treebank dev = synth::make_udlike_corpus(32, 40);
  write_conllu_file(train, dir.file("train.conllu"));
  write_conllu_file(dev, dir.file("dev.conllu"));
  const RuleSet rules = extract_candidate_rules(train);
  REQUIRE(rules.size() >= 3);
  save_ruleset_file(rules, dir.file("rules.tsv"));

  ExperimentConfig cfg;
  cfg.train_path = dir.file("train.conllu");
  cfg.dev_path = dir.file("dev.conllu");
  cfg.ruleset75_path = dir.file("rules.tsv");
  cfg.tasks = parse_tasks("pos,chunks,deplabels");
  cfg.feature_sources = parse_feature_sources("pos,chunks");
  cfg.tagger_epochs = 3;
  cfg.chunker_epochs = 3;
  cfg.labeler_epochs = 3;
  cfg.seed = 7;

  const ExperimentReport report = run_experiment(cfg);

  auto metric = [&](const std::string& name) {
    for (const auto& [key, value] : report.task_metrics) {
      if (key == name) return value;
    }
    FAIL("missing metric " << name);
    return 0.0;
  };
  // Percent-scaled metrics: the synthetic corpus is fully disambiguable.
  CHECK(metric("pos_accuracy") >= 95.0);
  CHECK(metric("chunk_f1") >= 90.0);
  CHECK(report.has_chunk_block);
  CHECK(report.chunk_block.ruleset == "75");
  CHECK(report.chunk_block.rules == static_cast<long long>(rules.size()));
  CHECK(report.chunk_block.chunks > 0);
  CHECK(report.chunk_block.rate > 1.0);

  // One ablation row per subset of {pos, chunks}, in mask order.
  REQUIRE(report.ablation.size() == 4);
  CHECK(report.ablation[0].features == "none");
  CHECK(report.ablation[1].features == "pos");
  CHECK(report.ablation[2].features == "chunks");
  CHECK(report.ablation[3].features == "pos+chunks");
  for (const AblationRow& row : report.ablation) {
    CHECK(row.uas >= 0.0);
    CHECK(row.uas <= 100.0);
    CHECK(row.las <= row.uas + 1e-9);
  }
  CHECK(report.wall_clock_seconds > 0.0);

  // Bit-identical reports on a re-run: nothing volatile is serialized.
  const ExperimentReport rerun = run_experiment(cfg);
  std::ostringstream a, b;
  emit_report(report, ReportFormat::kTsv, a);
  emit_report(rerun, ReportFormat::kTsv, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("run_experiment diagnostic mode uses gold run-time columns") {
  TempDir dir;
  const Treebank train = synth::make_udlike_corpus(33, 80);
  const Treebank dev = synth::make_udlike_corpus(34, 25);
  write_conllu_file(train, dir.file("train.conllu"));
  write_conllu_file(dev, dir.file("dev.conllu"));

  ExperimentConfig cfg;
  cfg.train_path = dir.file("train.conllu");
  cfg.dev_path = dir.file("dev.conllu");
  cfg.tasks = parse_tasks("deplabels");
  cfg.feature_sources = parse_feature_sources("pos");
  cfg.runtime_gold_features = true;
  cfg.tagger_epochs = 2;
  cfg.labeler_epochs = 2;
  const ExperimentReport report = run_experiment(cfg);
  REQUIRE(report.ablation.size() == 2);
  CHECK(report.task_metrics.empty());
  CHECK_FALSE(report.has_chunk_block);
}

TEST_CASE("run_experiment validates its configuration") {
  TempDir dir;
  const Treebank train = synth::make_udlike_corpus(35, 10);
  write_conllu_file(train, dir.file("train.conllu"));

  ExperimentConfig cfg;
  cfg.train_path = dir.file("train.conllu");
  cfg.dev_path = dir.file("train.conllu");
  SUBCASE("no tasks selected") {
    cfg.tasks = parse_tasks("none");
    CHECK_THROWS_AS(run_experiment(cfg), std::exception);
  }
  SUBCASE("chunk tasks need a ruleset") {
    cfg.tasks = parse_tasks("chunks");
    CHECK_THROWS_AS(run_experiment(cfg), std::exception);
  }
  SUBCASE("feats task fails on a featureless corpus") {
    cfg.tasks = parse_tasks("feats");
    CHECK_THROWS_AS(run_experiment(cfg), UnsupportedTaskError);
  }
  SUBCASE("missing treebank path") {
    cfg.tasks = parse_tasks("pos");
    cfg.dev_path.clear();
    CHECK_THROWS_AS(run_experiment(cfg), std::exception);
  }
}

}  // namespace
