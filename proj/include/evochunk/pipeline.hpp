#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "evochunk/chunk_rules.hpp"
#include "evochunk/conllu.hpp"
#include "evochunk/dep_encoding.hpp"
#include "evochunk/perceptron.hpp"

namespace evochunk {

// Which auxiliary columns feed the dependency labeler's features.
struct FeatureSources {
  bool pos = false;
  bool feats = false;
  bool chunks = false;

  bool any() const { return pos || feats || chunks; }
  friend bool operator==(const FeatureSources&, const FeatureSources&) = default;
};

FeatureSources parse_feature_sources(const std::string& csv);  // "pos,chunks"
std::string feature_sources_name(const FeatureSources& src);   // "pos+chunks", "none"

// Per-token auxiliary columns aligned with a sentence; empty vector = unused.
struct AuxColumns {
  std::vector<std::string> pos;
  std::vector<std::string> feats;
  std::vector<std::string> chunks;
};

struct DepLabelerOptions {
  int epochs = 10;
  std::uint64_t seed = 0;
  bool best_epoch_on_dev = true;
};

// Greedy averaged-perceptron sequence labeler over dependency labels
// ("+1,nsubj,VERB"); aux features are gold at train time, predicted (or gold,
// in the diagnostic mode) at run time.
class DepLabeler {
 public:
  static DepLabeler train(const Treebank& train, const std::vector<AuxColumns>& cols,
                          const FeatureSources& sources, const DepLabelerOptions& opts,
                          const Treebank* dev = nullptr,
                          const std::vector<AuxColumns>* dev_cols = nullptr);

  std::vector<std::string> predict(const Sentence& s, const AuxColumns& cols) const;
  std::vector<std::vector<std::string>> predict(const Treebank& t,
                                                const std::vector<AuxColumns>& cols) const;

  const FeatureSources& sources() const { return sources_; }
  int best_epoch() const { return best_epoch_; }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static DepLabeler load(std::istream& in);
  static DepLabeler load_file(const std::string& path);

 private:
  DepLabeler() = default;

  SequenceModel model_;
  FeatureSources sources_;
  int best_epoch_ = 0;
};

void dep_labeler_features(const std::vector<std::string>& forms, int i,
                          const std::string& prev1, const FeatureSources& sources,
                          const AuxColumns& cols, std::vector<std::string>& out);

// Gold per-token dependency labels (the encoding of the gold tree).
std::vector<std::string> gold_dep_labels(const Sentence& s);

struct TaskSet {
  bool pos = false;
  bool feats = false;
  bool chunks = false;
  bool deplabels = false;
};

TaskSet parse_tasks(const std::string& csv);
std::string tasks_name(const TaskSet& tasks);

struct ExperimentConfig {
  std::string train_path;
  std::string dev_path;
  std::string test_path;       // optional; metrics fall back to dev
  std::string ruleset75_path;  // at least one ruleset needed for chunk work
  std::string ruleset95_path;
  TaskSet tasks;
  FeatureSources feature_sources;   // dep-labeler ablation universe
  bool runtime_gold_features = false;  // diagnostic: gold columns at run time
  int tagger_epochs = 10;
  int chunker_epochs = 5;
  int labeler_epochs = 10;
  std::uint64_t seed = 0;
};

ExperimentConfig load_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config_file(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, std::ostream& out);

struct AblationRow {
  std::string features;  // "none", "pos", "pos+chunks", ...
  double uas = 0;
  double las = 0;
};

struct ChunkStatsBlock {
  std::string ruleset;  // which consensus file won ("75", "95" or "given")
  long long rules = 0;
  long long chunks = 0;
  long long outside = 0;
  double rate = 0;
  double chunks_per_sentence = 0;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::pair<std::string, double>> task_metrics;
  bool has_chunk_block = false;
  ChunkStatsBlock chunk_block;
  std::vector<AblationRow> ablation;
  double wall_clock_seconds = 0;  // informational only; never serialized
};

enum class ReportFormat { kText, kTsv };
ReportFormat parse_report_format(const std::string& name);

void emit_report(const ExperimentReport& report, ReportFormat format,
                 std::ostream& out);
ExperimentReport parse_report_tsv(std::istream& in);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace evochunk
