#include "evochunk/tagger.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "evochunk/rng.hpp"
#include "evochunk/util.hpp"

namespace evochunk {

TagTask parse_tag_task(const std::string& name) {
  if (name == "pos") return TagTask::kPos;
  if (name == "feats") return TagTask::kFeats;
  throw std::runtime_error("unknown tagging task '" + name + "' (want pos|feats)");
}

std::string tag_task_name(TagTask task) {
  return task == TagTask::kPos ? "pos" : "feats";
}

std::vector<std::string> gold_tags(TagTask task, const Sentence& s) {
  std::vector<std::string> tags;
  tags.reserve(s.tokens.size());
  for (const Token& t : s.tokens) {
    tags.push_back(task == TagTask::kPos ? t.upos : t.feats);
  }
  return tags;
}

double token_accuracy(const std::vector<std::vector<std::string>>& gold,
                      const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("token_accuracy: corpora have different sizes");
  long long total = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size())
      throw std::invalid_argument("token_accuracy: sentences have different lengths");
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      ++total;
      if (gold[i][j] == pred[i][j]) ++correct;
    }
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

void tagger_features(const std::vector<std::string>& forms, int i,
                     const std::string& prev1, const std::string& prev2,
                     std::vector<std::string>& out) {
  const int n = static_cast<int>(forms.size());
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
  out.push_back("lw-2=" + word_at(i - 2));
  out.push_back("lw+1=" + word_at(i + 1));
  out.push_back("lw+2=" + word_at(i + 2));
  out.push_back("sh=" + word_shape(form));
  out.push_back("t-1=" + prev1);
  out.push_back("t-2=" + prev2);
  out.push_back("tb=" + prev2 + "_" + prev1);
  out.push_back("tw=" + prev1 + "_" + word_at(i));
  for (int k = 1; k <= 4; ++k) {
    out.push_back("pre" + std::to_string(k) + "=" + utf8_prefix(form, k));
    out.push_back("suf" + std::to_string(k) + "=" + utf8_suffix(form, k));
  }
}

namespace {

// Greedy left-to-right decode; ties go to the lowest label index.
std::vector<int> greedy_decode(const std::vector<std::string>& forms,
                               const SequenceModel& model) {
  const int n = static_cast<int>(forms.size());
  const int L = model.label_count();
  std::vector<int> path(static_cast<std::size_t>(n), 0);
  std::vector<std::string> feats;
  std::vector<double> scores(static_cast<std::size_t>(L), 0.0);
  std::string prev1 = "<s>", prev2 = "<s>";
  for (int i = 0; i < n; ++i) {
    std::fill(scores.begin(), scores.end(), 0.0);
    tagger_features(forms, i, prev1, prev2, feats);
    for (const auto& f : feats) model.score_into(f, scores);
    int best = 0;
    for (int y = 1; y < L; ++y) {
      if (scores[static_cast<std::size_t>(y)] > scores[static_cast<std::size_t>(best)])
        best = y;
    }
    path[static_cast<std::size_t>(i)] = best;
    prev2 = std::move(prev1);
    prev1 = model.labels()[static_cast<std::size_t>(best)];
  }
  return path;
}

std::vector<std::string> sentence_forms(const Sentence& s) {
  std::vector<std::string> forms;
  forms.reserve(s.tokens.size());
  for (const Token& t : s.tokens) forms.push_back(t.form);
  return forms;
}

}  // namespace

Tagger Tagger::train(TagTask task, const Treebank& train, const TaggerOptions& opts,
                     const Treebank* dev) {
  if (train.sentences.empty())
    throw std::invalid_argument("train_tagger: empty training set");
  if (task == TagTask::kFeats) {
    bool any = false;
    for (const Sentence& s : train.sentences) {
      for (const Token& t : s.tokens) {
        if (t.has_feats()) { any = true; break; }
      }
      if (any) break;
    }
    if (!any) {
      throw UnsupportedTaskError(
          "feats task unsupported: the treebank carries no morphological features");
    }
  }

  std::set<std::string> inventory;
  for (const Sentence& s : train.sentences) {
    for (const std::string& tag : gold_tags(task, s)) inventory.insert(tag);
  }
  Tagger tagger;
  tagger.task_ = task;
  tagger.model_ = SequenceModel(std::vector<std::string>(inventory.begin(), inventory.end()));
  SequenceModel& model = tagger.model_;

  std::vector<std::size_t> order(train.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(opts.seed);
  std::vector<std::string> feats;
  std::vector<double> scores(static_cast<std::size_t>(model.label_count()), 0.0);
  const bool track_best = opts.best_epoch_on_dev && dev != nullptr;
  SequenceModel best_model;
  double best_acc = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t si : order) {
      const Sentence& sent = train.sentences[si];
      if (sent.size() == 0) continue;
      const std::vector<std::string> forms = sentence_forms(sent);
      const std::vector<std::string> gold = gold_tags(task, sent);
      std::string prev1 = "<s>", prev2 = "<s>";
      for (int i = 0; i < sent.size(); ++i) {
        std::fill(scores.begin(), scores.end(), 0.0);
        tagger_features(forms, i, prev1, prev2, feats);
        for (const auto& f : feats) model.score_into(f, scores);
        int pred = 0;
        for (int y = 1; y < model.label_count(); ++y) {
          if (scores[static_cast<std::size_t>(y)] > scores[static_cast<std::size_t>(pred)])
            pred = y;
        }
        const int gold_id = model.label_index(gold[static_cast<std::size_t>(i)]);
        if (pred != gold_id) {
          for (const auto& f : feats) {
            model.adjust(f, gold_id, +1.0);
            model.adjust(f, pred, -1.0);
          }
        }
        prev2 = std::move(prev1);
        prev1 = model.labels()[static_cast<std::size_t>(pred)];
      }
      model.advance();
    }
    if (track_best) {
      Tagger snapshot;
      snapshot.task_ = task;
      snapshot.model_ = model.averaged_snapshot();
      const double acc = snapshot.accuracy(*dev);
      if (acc > best_acc) {
        best_acc = acc;
        best_model = std::move(snapshot.model_);
        best_epoch = epoch;
      }
    }
  }

  if (track_best && best_acc >= 0) {
    tagger.model_ = std::move(best_model);
    tagger.best_epoch_ = best_epoch;
  } else {
    tagger.model_.finalize_average();
    tagger.best_epoch_ = opts.epochs;
  }
  return tagger;
}

std::vector<std::string> Tagger::predict(const Sentence& s) const {
  std::vector<std::string> tags;
  if (s.size() == 0) return tags;
  const std::vector<int> path = greedy_decode(sentence_forms(s), model_);
  tags.reserve(path.size());
  for (int y : path) tags.push_back(model_.labels()[static_cast<std::size_t>(y)]);
  return tags;
}

std::vector<std::vector<std::string>> Tagger::predict(const Treebank& t) const {
  std::vector<std::vector<std::string>> out;
  out.reserve(t.sentences.size());
  for (const Sentence& s : t.sentences) out.push_back(predict(s));
  return out;
}

double Tagger::accuracy(const Treebank& gold) const {
  std::vector<std::vector<std::string>> gold_all;
  gold_all.reserve(gold.sentences.size());
  for (const Sentence& s : gold.sentences) gold_all.push_back(gold_tags(task_, s));
  return token_accuracy(gold_all, predict(gold));
}

void Tagger::save(std::ostream& out) const {
  model_.save(out, "tagger", {{"task", tag_task_name(task_)},
                              {"best_epoch", std::to_string(best_epoch_)}});
}

void Tagger::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  save(out);
}

Tagger Tagger::load(std::istream& in) {
  std::string kind;
  std::map<std::string, std::string> meta;
  SequenceModel model = SequenceModel::load(in, kind, meta);
  if (kind != "tagger")
    throw std::runtime_error("expected a tagger model, got '" + kind + "'");
  Tagger tagger;
  tagger.model_ = std::move(model);
  auto task_it = meta.find("task");
  if (task_it == meta.end())
    throw std::runtime_error("tagger model is missing its task");
  tagger.task_ = parse_tag_task(task_it->second);
  if (auto it = meta.find("best_epoch"); it != meta.end())
    parse_int(it->second, tagger.best_epoch_);
  return tagger;
}

Tagger Tagger::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load(in);
}

}  // namespace evochunk
