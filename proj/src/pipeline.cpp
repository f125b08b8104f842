#include "evochunk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "evochunk/annotate.hpp"
#include "evochunk/chunker.hpp"
#include "evochunk/rng.hpp"
#include "evochunk/tagger.hpp"
#include "evochunk/util.hpp"

namespace evochunk {

FeatureSources parse_feature_sources(const std::string& csv) {
  FeatureSources src;
  std::string stripped = trim(csv);
  if (stripped.empty() || stripped == "none") return src;
  // Accept the joined display form ("pos+chunks") as well as the CSV form.
  std::replace(stripped.begin(), stripped.end(), '+', ',');
  for (const std::string& part : split(stripped, ',')) {
    const std::string name = trim(part);
    if (name == "pos") src.pos = true;
    else if (name == "feats") src.feats = true;
    else if (name == "chunks") src.chunks = true;
    else throw std::runtime_error("unknown feature source '" + name +
                                  "' (want pos|feats|chunks)");
  }
  return src;
}

std::string feature_sources_name(const FeatureSources& src) {
  std::vector<std::string> parts;
  if (src.pos) parts.push_back("pos");
  if (src.feats) parts.push_back("feats");
  if (src.chunks) parts.push_back("chunks");
  return parts.empty() ? "none" : join(parts, "+");
}

TaskSet parse_tasks(const std::string& csv) {
  TaskSet tasks;
  const std::string stripped = trim(csv);
  if (stripped.empty() || stripped == "none") return tasks;
  for (const std::string& part : split(stripped, ',')) {
    const std::string name = trim(part);
    if (name == "pos") tasks.pos = true;
    else if (name == "feats") tasks.feats = true;
    else if (name == "chunks") tasks.chunks = true;
    else if (name == "deplabels") tasks.deplabels = true;
    else throw std::runtime_error("unknown task '" + name +
                                  "' (want pos|feats|chunks|deplabels)");
  }
  return tasks;
}

std::string tasks_name(const TaskSet& tasks) {
  std::vector<std::string> parts;
  if (tasks.pos) parts.push_back("pos");
  if (tasks.feats) parts.push_back("feats");
  if (tasks.chunks) parts.push_back("chunks");
  if (tasks.deplabels) parts.push_back("deplabels");
  return parts.empty() ? "none" : join(parts, ",");
}

std::vector<std::string> gold_dep_labels(const Sentence& s) {
  std::vector<std::string> labels;
  for (const DepLabel& label : encode_dependencies(s)) {
    labels.push_back(dep_label_string(label));
  }
  return labels;
}

void dep_labeler_features(const std::vector<std::string>& forms, int i,
                          const std::string& prev1, const FeatureSources& sources,
                          const AuxColumns& cols, std::vector<std::string>& out) {
  const int n = static_cast<int>(forms.size());
  auto at = [&](const std::vector<std::string>& col, int k) -> std::string {
    if (k < 0) return "<s>";
    if (k >= n) return "</s>";
    return col[static_cast<std::size_t>(k)];
  };
  auto word_at = [&](int k) -> std::string {
    if (k < 0) return "<s>";
    if (k >= n) return "</s>";
    return to_lower_ascii(forms[static_cast<std::size_t>(k)]);
  };
  const std::string& form = forms[static_cast<std::size_t>(i)];

  out.clear();
  out.push_back("b");
  out.push_back("w=" + form);
  out.push_back("lw=" + word_at(i));
  out.push_back("lw-1=" + word_at(i - 1));
  out.push_back("lw+1=" + word_at(i + 1));
  out.push_back("sh=" + word_shape(form));
  out.push_back("t-1=" + prev1);
  for (int k = 1; k <= 3; ++k) {
    out.push_back("pre" + std::to_string(k) + "=" + utf8_prefix(form, k));
    out.push_back("suf" + std::to_string(k) + "=" + utf8_suffix(form, k));
  }
  if (sources.pos) {
    out.push_back("p=" + at(cols.pos, i));
    out.push_back("p-1=" + at(cols.pos, i - 1));
    out.push_back("p-2=" + at(cols.pos, i - 2));
    out.push_back("p+1=" + at(cols.pos, i + 1));
    out.push_back("p+2=" + at(cols.pos, i + 2));
    out.push_back("pb-1=" + at(cols.pos, i - 1) + "_" + at(cols.pos, i));
    out.push_back("pb+1=" + at(cols.pos, i) + "_" + at(cols.pos, i + 1));
    out.push_back("pt0=" + at(cols.pos, i - 1) + "_" + at(cols.pos, i) + "_" +
                  at(cols.pos, i + 1));
  }
  if (sources.feats) {
    out.push_back("f=" + at(cols.feats, i));
    out.push_back("f-1=" + at(cols.feats, i - 1));
    out.push_back("f+1=" + at(cols.feats, i + 1));
  }
  if (sources.chunks) {
    out.push_back("c=" + at(cols.chunks, i));
    out.push_back("c-1=" + at(cols.chunks, i - 1));
    out.push_back("c+1=" + at(cols.chunks, i + 1));
    out.push_back("cb+1=" + at(cols.chunks, i) + "_" + at(cols.chunks, i + 1));
  }
}

namespace {

std::vector<std::string> sentence_forms(const Sentence& s) {
  std::vector<std::string> forms;
  forms.reserve(s.tokens.size());
  for (const Token& t : s.tokens) forms.push_back(t.form);
  return forms;
}

void check_columns(const FeatureSources& sources, const Sentence& s,
                   const AuxColumns& cols) {
  const std::size_t n = s.tokens.size();
  if (sources.pos && cols.pos.size() != n)
    throw std::invalid_argument("dep labeler: pos column does not align");
  if (sources.feats && cols.feats.size() != n)
    throw std::invalid_argument("dep labeler: feats column does not align");
  if (sources.chunks && cols.chunks.size() != n)
    throw std::invalid_argument("dep labeler: chunks column does not align");
}

double label_accuracy(const DepLabeler& labeler, const Treebank& dev,
                      const std::vector<AuxColumns>& dev_cols) {
  long long total = 0, correct = 0;
  for (std::size_t i = 0; i < dev.sentences.size(); ++i) {
    const Sentence& sent = dev.sentences[i];
    if (sent.size() == 0) continue;
    const std::vector<std::string> gold = gold_dep_labels(sent);
    const std::vector<std::string> pred = labeler.predict(sent, dev_cols[i]);
    for (std::size_t j = 0; j < gold.size(); ++j) {
      ++total;
      if (gold[j] == pred[j]) ++correct;
    }
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace

DepLabeler DepLabeler::train(const Treebank& train, const std::vector<AuxColumns>& cols,
                             const FeatureSources& sources, const DepLabelerOptions& opts,
                             const Treebank* dev,
                             const std::vector<AuxColumns>* dev_cols) {
  if (train.sentences.empty())
    throw std::invalid_argument("dep labeler: empty training set");
  if (train.sentences.size() != cols.size())
    throw std::invalid_argument("dep labeler: column sets do not align");
  if (dev && (!dev_cols || dev->sentences.size() != dev_cols->size()))
    throw std::invalid_argument("dep labeler: dev column sets do not align");

  std::vector<std::vector<std::string>> gold;
  std::set<std::string> inventory;
  gold.reserve(train.sentences.size());
  for (std::size_t i = 0; i < train.sentences.size(); ++i) {
    check_columns(sources, train.sentences[i], cols[i]);
    gold.push_back(gold_dep_labels(train.sentences[i]));
    for (const std::string& label : gold.back()) inventory.insert(label);
  }
  if (inventory.empty())
    throw std::invalid_argument("dep labeler: no labeled tokens in training set");

  DepLabeler labeler;
  labeler.sources_ = sources;
  labeler.model_ = SequenceModel(std::vector<std::string>(inventory.begin(), inventory.end()));
  SequenceModel& model = labeler.model_;

  std::vector<std::size_t> order(train.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(opts.seed);
  std::vector<std::string> feats;
  std::vector<double> scores(static_cast<std::size_t>(model.label_count()), 0.0);
  const bool track_best = opts.best_epoch_on_dev && dev != nullptr && dev_cols != nullptr;
  SequenceModel best_model;
  double best_acc = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t si : order) {
      const Sentence& sent = train.sentences[si];
      if (sent.size() == 0) continue;
      const std::vector<std::string> forms = sentence_forms(sent);
      std::string prev1 = "<s>";
      for (int i = 0; i < sent.size(); ++i) {
        std::fill(scores.begin(), scores.end(), 0.0);
        dep_labeler_features(forms, i, prev1, sources, cols[si], feats);
        for (const auto& f : feats) model.score_into(f, scores);
        int pred = 0;
        for (int y = 1; y < model.label_count(); ++y) {
          if (scores[static_cast<std::size_t>(y)] > scores[static_cast<std::size_t>(pred)])
            pred = y;
        }
        const int gold_id = model.label_index(gold[si][static_cast<std::size_t>(i)]);
        if (pred != gold_id) {
          for (const auto& f : feats) {
            model.adjust(f, gold_id, +1.0);
            model.adjust(f, pred, -1.0);
          }
        }
        prev1 = model.labels()[static_cast<std::size_t>(pred)];
      }
      model.advance();
    }
    if (track_best) {
      DepLabeler snapshot;
      snapshot.sources_ = sources;
      snapshot.model_ = model.averaged_snapshot();
      const double acc = label_accuracy(snapshot, *dev, *dev_cols);
      if (acc > best_acc) {
        best_acc = acc;
        best_model = std::move(snapshot.model_);
        best_epoch = epoch;
      }
    }
  }

  if (track_best && best_acc >= 0) {
    labeler.model_ = std::move(best_model);
    labeler.best_epoch_ = best_epoch;
  } else {
    labeler.model_.finalize_average();
    labeler.best_epoch_ = opts.epochs;
  }
  return labeler;
}

std::vector<std::string> DepLabeler::predict(const Sentence& s,
                                             const AuxColumns& cols) const {
  std::vector<std::string> out;
  if (s.size() == 0) return out;
  check_columns(sources_, s, cols);
  const std::vector<std::string> forms = sentence_forms(s);
  std::vector<std::string> feats;
  std::vector<double> scores(static_cast<std::size_t>(model_.label_count()), 0.0);
  std::string prev1 = "<s>";
  out.reserve(forms.size());
  for (int i = 0; i < s.size(); ++i) {
    std::fill(scores.begin(), scores.end(), 0.0);
    dep_labeler_features(forms, i, prev1, sources_, cols, feats);
    for (const auto& f : feats) model_.score_into(f, scores);
    int best = 0;
    for (int y = 1; y < model_.label_count(); ++y) {
      if (scores[static_cast<std::size_t>(y)] > scores[static_cast<std::size_t>(best)])
        best = y;
    }
    prev1 = model_.labels()[static_cast<std::size_t>(best)];
    out.push_back(prev1);
  }
  return out;
}

std::vector<std::vector<std::string>> DepLabeler::predict(
    const Treebank& t, const std::vector<AuxColumns>& cols) const {
  if (t.sentences.size() != cols.size())
    throw std::invalid_argument("dep labeler: column sets do not align");
  std::vector<std::vector<std::string>> out;
  out.reserve(t.sentences.size());
  for (std::size_t i = 0; i < t.sentences.size(); ++i) {
    out.push_back(predict(t.sentences[i], cols[i]));
  }
  return out;
}

void DepLabeler::save(std::ostream& out) const {
  model_.save(out, "deplabeler", {{"sources", feature_sources_name(sources_)},
                                  {"best_epoch", std::to_string(best_epoch_)}});
}

void DepLabeler::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  save(out);
}

DepLabeler DepLabeler::load(std::istream& in) {
  std::string kind;
  std::map<std::string, std::string> meta;
  SequenceModel model = SequenceModel::load(in, kind, meta);
  if (kind != "deplabeler")
    throw std::runtime_error("expected a deplabeler model, got '" + kind + "'");
  DepLabeler labeler;
  labeler.model_ = std::move(model);
  auto it = meta.find("sources");
  if (it == meta.end())
    throw std::runtime_error("deplabeler model is missing its feature sources");
  labeler.sources_ = parse_feature_sources(it->second);
  if (auto epoch_it = meta.find("best_epoch"); epoch_it != meta.end())
    parse_int(epoch_it->second, labeler.best_epoch_);
  return labeler;
}

DepLabeler DepLabeler::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load(in);
}

ExperimentConfig load_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : parse_key_values(in)) {
    bool ok = true;
    if (key == "train") cfg.train_path = value;
    else if (key == "dev") cfg.dev_path = value;
    else if (key == "test") cfg.test_path = value;
    else if (key == "ruleset75") cfg.ruleset75_path = value;
    else if (key == "ruleset95") cfg.ruleset95_path = value;
    else if (key == "tasks") cfg.tasks = parse_tasks(value);
    else if (key == "feature_sources") cfg.feature_sources = parse_feature_sources(value);
    else if (key == "runtime_features") {
      if (value == "gold") cfg.runtime_gold_features = true;
      else if (value == "predicted") cfg.runtime_gold_features = false;
      else ok = false;
    }
    else if (key == "tagger_epochs") ok = parse_int(value, cfg.tagger_epochs);
    else if (key == "chunker_epochs") ok = parse_int(value, cfg.chunker_epochs);
    else if (key == "labeler_epochs") ok = parse_int(value, cfg.labeler_epochs);
    else if (key == "seed") {
      int seed = 0;
      ok = parse_int(value, seed) && seed >= 0;
      cfg.seed = static_cast<std::uint64_t>(seed);
    } else {
      throw std::runtime_error("experiment config: unknown key '" + key + "'");
    }
    if (!ok) {
      throw std::runtime_error("experiment config: bad value for '" + key + "': '" +
                               value + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return load_experiment_config(in);
}

namespace {

std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.emplace_back("train", cfg.train_path);
  pairs.emplace_back("dev", cfg.dev_path);
  if (!cfg.test_path.empty()) pairs.emplace_back("test", cfg.test_path);
  if (!cfg.ruleset75_path.empty()) pairs.emplace_back("ruleset75", cfg.ruleset75_path);
  if (!cfg.ruleset95_path.empty()) pairs.emplace_back("ruleset95", cfg.ruleset95_path);
  pairs.emplace_back("tasks", tasks_name(cfg.tasks));
  pairs.emplace_back("feature_sources", feature_sources_name(cfg.feature_sources));
  pairs.emplace_back("runtime_features", cfg.runtime_gold_features ? "gold" : "predicted");
  pairs.emplace_back("tagger_epochs", std::to_string(cfg.tagger_epochs));
  pairs.emplace_back("chunker_epochs", std::to_string(cfg.chunker_epochs));
  pairs.emplace_back("labeler_epochs", std::to_string(cfg.labeler_epochs));
  pairs.emplace_back("seed", std::to_string(cfg.seed));
  return pairs;
}

}  // namespace

void save_experiment_config(const ExperimentConfig& cfg, std::ostream& out) {
  for (const auto& [key, value] : config_pairs(cfg)) {
    out << key << " = " << value << "\n";
  }
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "tsv") return ReportFormat::kTsv;
  throw std::runtime_error("unknown report format '" + name + "' (want text|tsv)");
}

namespace {

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void emit_tsv(const ExperimentReport& report, std::ostream& out) {
  for (const auto& [key, value] : report.config_echo) {
    out << "config\t" << key << "\t" << value << "\n";
  }
  for (const auto& [name, value] : report.task_metrics) {
    out << "task\t" << name << "\t" << two_decimals(value) << "\n";
  }
  if (report.has_chunk_block) {
    const ChunkStatsBlock& b = report.chunk_block;
    out << "chunkstats\truleset\t" << b.ruleset << "\n";
    out << "chunkstats\trules\t" << b.rules << "\n";
    out << "chunkstats\tchunks\t" << b.chunks << "\n";
    out << "chunkstats\toutside\t" << b.outside << "\n";
    out << "chunkstats\trate\t" << two_decimals(b.rate) << "\n";
    out << "chunkstats\tchunks_per_sentence\t" << two_decimals(b.chunks_per_sentence)
        << "\n";
  }
  for (const AblationRow& row : report.ablation) {
    out << "ablation\t" << row.features << "\t" << two_decimals(row.uas) << "\t"
        << two_decimals(row.las) << "\n";
  }
}

void emit_text(const ExperimentReport& report, std::ostream& out) {
  out << "== config ==\n";
  for (const auto& [key, value] : report.config_echo) {
    out << key << " = " << value << "\n";
  }
  if (!report.task_metrics.empty()) {
    out << "\n== task metrics ==\n";
    for (const auto& [name, value] : report.task_metrics) {
      out << name << " = " << two_decimals(value) << "\n";
    }
  }
  if (report.has_chunk_block) {
    const ChunkStatsBlock& b = report.chunk_block;
    out << "\n== chunk statistics ==\n";
    out << "ruleset = " << b.ruleset << "\n";
    out << "rules = " << b.rules << "\n";
    out << "chunks = " << b.chunks << "\n";
    out << "outside = " << b.outside << "\n";
    out << "rate = " << two_decimals(b.rate) << "\n";
    out << "chunks_per_sentence = " << two_decimals(b.chunks_per_sentence) << "\n";
  }
  if (!report.ablation.empty()) {
    out << "\n== dependency ablation ==\n";
    out << "features\tuas\tlas\n";
    for (const AblationRow& row : report.ablation) {
      out << row.features << "\t" << two_decimals(row.uas) << "\t"
          << two_decimals(row.las) << "\n";
    }
  }
}

}  // namespace

void emit_report(const ExperimentReport& report, ReportFormat format,
                 std::ostream& out) {
  if (format == ReportFormat::kTsv) emit_tsv(report, out);
  else emit_text(report, out);
}

ExperimentReport parse_report_tsv(std::istream& in) {
  ExperimentReport report;
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& msg) {
    throw std::runtime_error("report line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cols = split(line, '\t');
    if (cols[0] == "config") {
      if (cols.size() != 3) bad("config rows need 3 columns");
      report.config_echo.emplace_back(cols[1], cols[2]);
    } else if (cols[0] == "task") {
      if (cols.size() != 3) bad("task rows need 3 columns");
      double value = 0;
      if (!parse_double(cols[2], value)) bad("bad task value '" + cols[2] + "'");
      report.task_metrics.emplace_back(cols[1], value);
    } else if (cols[0] == "chunkstats") {
      if (cols.size() != 3) bad("chunkstats rows need 3 columns");
      report.has_chunk_block = true;
      ChunkStatsBlock& b = report.chunk_block;
      const std::string& key = cols[1];
      const std::string& value = cols[2];
      bool ok = true;
      if (key == "ruleset") b.ruleset = value;
      else if (key == "rules") { int v = 0; ok = parse_int(value, v); b.rules = v; }
      else if (key == "chunks") { int v = 0; ok = parse_int(value, v); b.chunks = v; }
      else if (key == "outside") { int v = 0; ok = parse_int(value, v); b.outside = v; }
      else if (key == "rate") ok = parse_double(value, b.rate);
      else if (key == "chunks_per_sentence") ok = parse_double(value, b.chunks_per_sentence);
      else bad("unknown chunkstats key '" + key + "'");
      if (!ok) bad("bad chunkstats value '" + value + "'");
    } else if (cols[0] == "ablation") {
      if (cols.size() != 4) bad("ablation rows need 4 columns");
      AblationRow row;
      row.features = cols[1];
      if (!parse_double(cols[2], row.uas)) bad("bad uas '" + cols[2] + "'");
      if (!parse_double(cols[3], row.las)) bad("bad las '" + cols[3] + "'");
      report.ablation.push_back(std::move(row));
    } else {
      bad("unknown row type '" + cols[0] + "'");
    }
  }
  return report;
}

namespace {

Treebank load_treebank(const std::string& path, const std::string& split) {
  if (path.empty())
    throw std::runtime_error("experiment config: missing " + split + " treebank path");
  Treebank t = parse_conllu_file(path);
  t.split = split;
  if (t.sentences.empty())
    throw std::runtime_error("empty treebank: " + path);
  return t;
}

// All subsets of the configured sources: mask order with pos as the lowest
// bit, so rows come out none, pos, feats, pos+feats, chunks, ...
std::vector<FeatureSources> ablation_subsets(const FeatureSources& universe) {
  std::vector<bool FeatureSources::*> dims;
  if (universe.pos) dims.push_back(&FeatureSources::pos);
  if (universe.feats) dims.push_back(&FeatureSources::feats);
  if (universe.chunks) dims.push_back(&FeatureSources::chunks);
  std::vector<FeatureSources> subsets;
  for (unsigned mask = 0; mask < (1u << dims.size()); ++mask) {
    FeatureSources sub;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      if (mask & (1u << d)) sub.*dims[d] = true;
    }
    subsets.push_back(sub);
  }
  return subsets;
}

std::vector<std::string> chunk_label_column(const ChunkLabeling& labeling) {
  return labeling.labels;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const TaskSet& tasks = cfg.tasks;
  if (!tasks.pos && !tasks.feats && !tasks.chunks && !tasks.deplabels)
    throw std::runtime_error("experiment config selects no tasks");

  const Treebank train = load_treebank(cfg.train_path, "train");
  const Treebank dev = load_treebank(cfg.dev_path, "dev");
  const Treebank eval =
      cfg.test_path.empty() ? load_treebank(cfg.dev_path, "dev")
                            : load_treebank(cfg.test_path, "test");

  ExperimentReport report;
  report.config_echo = config_pairs(cfg);

  const bool runtime_gold = cfg.runtime_gold_features;
  const bool need_pos_tagger = tasks.pos || (tasks.deplabels && !runtime_gold);
  const bool need_feats_tagger =
      tasks.feats || (tasks.deplabels && cfg.feature_sources.feats && !runtime_gold);
  const bool need_ruleset = tasks.chunks || (tasks.deplabels && cfg.feature_sources.chunks);
  const bool need_chunker =
      tasks.chunks || (tasks.deplabels && cfg.feature_sources.chunks && !runtime_gold);

  TaggerOptions tagger_opts;
  tagger_opts.epochs = cfg.tagger_epochs;

  std::optional<Tagger> pos_tagger;
  if (need_pos_tagger) {
    tagger_opts.seed = Rng::mix(cfg.seed, 1);
    pos_tagger = Tagger::train(TagTask::kPos, train, tagger_opts, &dev);
  }
  std::optional<Tagger> feats_tagger;
  if (need_feats_tagger) {
    tagger_opts.seed = Rng::mix(cfg.seed, 2);
    feats_tagger = Tagger::train(TagTask::kFeats, train, tagger_opts, &dev);
  }

  RuleSet ruleset;
  std::string ruleset_label;
  std::optional<Chunker> chunker;
  std::vector<ChunkLabeling> train_chunk_gold, dev_chunk_gold, eval_chunk_gold;
  if (need_ruleset) {
    if (cfg.ruleset75_path.empty() && cfg.ruleset95_path.empty())
      throw std::runtime_error("experiment config: chunk work needs ruleset75/ruleset95");
    struct Candidate {
      RuleSet rules;
      std::string label;
      std::uint64_t seed;
    };
    std::vector<Candidate> rulesets;
    if (!cfg.ruleset75_path.empty())
      rulesets.push_back({load_ruleset_file(cfg.ruleset75_path), "75", Rng::mix(cfg.seed, 3)});
    if (!cfg.ruleset95_path.empty())
      rulesets.push_back({load_ruleset_file(cfg.ruleset95_path), "95", Rng::mix(cfg.seed, 4)});

    if (need_chunker && rulesets.size() > 1) {
      // "Best predictions": keep whichever consensus ruleset's chunker does
      // better on dev.
      double best_f1 = -1.0;
      for (const Candidate& cand : rulesets) {
        const auto cand_train = annotate_treebank(train, cand.rules, MatchMode::kTreeValidated);
        const auto cand_dev = annotate_treebank(dev, cand.rules, MatchMode::kTreeValidated);
        ChunkerOptions chunk_opts;
        chunk_opts.epochs = cfg.chunker_epochs;
        chunk_opts.seed = cand.seed;
        Chunker cand_chunker = Chunker::train(train, cand_train, chunk_opts, &dev, &cand_dev);
        const double f1 = span_f1(cand_dev, cand_chunker.predict(dev)).f1;
        if (f1 > best_f1) {
          best_f1 = f1;
          ruleset = cand.rules;
          ruleset_label = cand.label;
          chunker = std::move(cand_chunker);
        }
      }
      train_chunk_gold = annotate_treebank(train, ruleset, MatchMode::kTreeValidated);
      dev_chunk_gold = annotate_treebank(dev, ruleset, MatchMode::kTreeValidated);
    } else {
      ruleset = rulesets.front().rules;
      ruleset_label = rulesets.front().label;
      train_chunk_gold = annotate_treebank(train, ruleset, MatchMode::kTreeValidated);
      dev_chunk_gold = annotate_treebank(dev, ruleset, MatchMode::kTreeValidated);
      if (need_chunker) {
        ChunkerOptions chunk_opts;
        chunk_opts.epochs = cfg.chunker_epochs;
        chunk_opts.seed = rulesets.front().seed;
        chunker = Chunker::train(train, train_chunk_gold, chunk_opts, &dev, &dev_chunk_gold);
      }
    }
    eval_chunk_gold = annotate_treebank(eval, ruleset, MatchMode::kTreeValidated);
  }

  if (tasks.pos) {
    report.task_metrics.emplace_back("pos_accuracy", 100.0 * pos_tagger->accuracy(eval));
  }
  if (tasks.feats) {
    report.task_metrics.emplace_back("feats_accuracy", 100.0 * feats_tagger->accuracy(eval));
  }
  if (tasks.chunks) {
    const double f1 = span_f1(eval_chunk_gold, chunker->predict(eval)).f1;
    report.task_metrics.emplace_back("chunk_f1", 100.0 * f1);
    const CompressionStats stats = compression_stats(eval, eval_chunk_gold);
    report.has_chunk_block = true;
    report.chunk_block.ruleset = ruleset_label;
    report.chunk_block.rules = static_cast<long long>(ruleset.size());
    report.chunk_block.chunks = stats.chunks;
    report.chunk_block.outside = stats.outside;
    report.chunk_block.rate = stats.rate();
    report.chunk_block.chunks_per_sentence = stats.chunks_per_sentence();
  }

  if (tasks.deplabels) {
    // Gold columns for training and model selection.
    auto gold_columns = [&](const Treebank& t,
                            const std::vector<ChunkLabeling>* chunk_gold) {
      std::vector<AuxColumns> cols(t.sentences.size());
      for (std::size_t i = 0; i < t.sentences.size(); ++i) {
        AuxColumns& c = cols[i];
        const Sentence& s = t.sentences[i];
        c.pos.reserve(s.tokens.size());
        c.feats.reserve(s.tokens.size());
        for (const Token& tok : s.tokens) {
          c.pos.push_back(tok.upos);
          c.feats.push_back(tok.feats);
        }
        if (chunk_gold) c.chunks = chunk_label_column((*chunk_gold)[i]);
      }
      return cols;
    };
    const std::vector<AuxColumns> train_cols =
        gold_columns(train, need_ruleset ? &train_chunk_gold : nullptr);
    const std::vector<AuxColumns> dev_cols =
        gold_columns(dev, need_ruleset ? &dev_chunk_gold : nullptr);

    // Shared run-time columns on the eval split: predicted by the trained
    // models, or gold in the diagnostic mode.
    std::vector<AuxColumns> eval_cols(eval.sentences.size());
    if (runtime_gold) {
      eval_cols = gold_columns(eval, need_ruleset ? &eval_chunk_gold : nullptr);
    } else {
      const auto pos_pred = pos_tagger->predict(eval);
      for (std::size_t i = 0; i < eval.sentences.size(); ++i) {
        eval_cols[i].pos = pos_pred[i];
      }
      if (cfg.feature_sources.feats) {
        const auto feats_pred = feats_tagger->predict(eval);
        for (std::size_t i = 0; i < eval.sentences.size(); ++i) {
          eval_cols[i].feats = feats_pred[i];
        }
      }
      if (cfg.feature_sources.chunks) {
        // The chunker, too, only sees predicted POS at run time.
        Treebank eval_pred_pos = eval;
        for (std::size_t i = 0; i < eval_pred_pos.sentences.size(); ++i) {
          Sentence& sent = eval_pred_pos.sentences[i];
          for (int j = 0; j < sent.size(); ++j)
            sent.tokens[static_cast<std::size_t>(j)].upos =
                pos_pred[i][static_cast<std::size_t>(j)];
        }
        const auto chunk_pred = chunker->predict(eval_pred_pos);
        for (std::size_t i = 0; i < eval.sentences.size(); ++i) {
          eval_cols[i].chunks = chunk_label_column(chunk_pred[i]);
        }
      }
    }

    DepLabelerOptions labeler_opts;
    labeler_opts.epochs = cfg.labeler_epochs;
    unsigned mask = 0;
    for (const FeatureSources& sub : ablation_subsets(cfg.feature_sources)) {
      labeler_opts.seed = Rng::mix(cfg.seed, 5, mask++);
      const DepLabeler labeler =
          DepLabeler::train(train, train_cols, sub, labeler_opts, &dev, &dev_cols);
      const auto pred_labels = labeler.predict(eval, eval_cols);

      Treebank predicted = eval;
      for (std::size_t i = 0; i < eval.sentences.size(); ++i) {
        Sentence& sent = predicted.sentences[i];
        if (sent.size() == 0) continue;
        std::vector<DepLabel> labels;
        labels.reserve(pred_labels[i].size());
        for (const std::string& text : pred_labels[i]) {
          labels.push_back(parse_dep_label(text));
        }
        // Heads resolve against the run-time POS column.
        std::vector<int> heads;
        std::vector<std::string> deprels;
        decode_dependencies(eval_cols[i].pos, labels, heads, deprels);
        for (int j = 0; j < sent.size(); ++j) {
          sent.tokens[static_cast<std::size_t>(j)].head = heads[static_cast<std::size_t>(j)];
          sent.tokens[static_cast<std::size_t>(j)].deprel = deprels[static_cast<std::size_t>(j)];
        }
      }
      const ParseScore score = attachment_score(eval, predicted);
      report.ablation.push_back(
          {feature_sources_name(sub), 100.0 * score.uas, 100.0 * score.las});
    }
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace evochunk
