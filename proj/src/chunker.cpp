#include "evochunk/chunker.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "evochunk/rng.hpp"
#include "evochunk/util.hpp"

namespace evochunk {

namespace {

F1Score f1_from_counts(long long tp, long long pred, long long gold) {
  F1Score score;
  score.tp = tp;
  score.pred_count = pred;
  score.gold_count = gold;
  score.precision = pred > 0 ? static_cast<double>(tp) / static_cast<double>(pred) : 0.0;
  score.recall = gold > 0 ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
  score.f1 = (score.precision + score.recall) > 0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

long long count_matches(const ChunkLabeling& gold, const ChunkLabeling& pred) {
  long long tp = 0;
  for (const LabeledSpan& p : pred.spans) {
    for (const LabeledSpan& g : gold.spans) {
      if (p == g) { ++tp; break; }
    }
  }
  return tp;
}

}  // namespace

F1Score span_f1(const ChunkLabeling& gold, const ChunkLabeling& pred) {
  if (gold.labels.size() != pred.labels.size())
    throw std::invalid_argument("span_f1: labelings have different lengths");
  return f1_from_counts(count_matches(gold, pred),
                        static_cast<long long>(pred.spans.size()),
                        static_cast<long long>(gold.spans.size()));
}

F1Score span_f1(const std::vector<ChunkLabeling>& gold,
                const std::vector<ChunkLabeling>& pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("span_f1: corpora have different sizes");
  long long tp = 0, p = 0, g = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].labels.size() != pred[i].labels.size())
      throw std::invalid_argument("span_f1: labelings have different lengths");
    tp += count_matches(gold[i], pred[i]);
    p += static_cast<long long>(pred[i].spans.size());
    g += static_cast<long long>(gold[i].spans.size());
  }
  return f1_from_counts(tp, p, g);
}

void chunker_features(const std::vector<std::string>& forms,
                      const std::vector<std::string>& upos, int i,
                      std::vector<std::string>& out) {
  const int n = static_cast<int>(forms.size());
  auto pos_at = [&](int k) -> std::string {
    if (k < 0) return "<s>";
    if (k >= n) return "</s>";
    return upos[static_cast<std::size_t>(k)];
  };
  const std::string& form = forms[static_cast<std::size_t>(i)];
  const std::string lower = to_lower_ascii(form);

  out.clear();
  out.push_back("b");
  out.push_back("w=" + form);
  out.push_back("lw=" + lower);
  out.push_back("p=" + pos_at(i));
  out.push_back("p-1=" + pos_at(i - 1));
  out.push_back("p-2=" + pos_at(i - 2));
  out.push_back("p+1=" + pos_at(i + 1));
  out.push_back("p+2=" + pos_at(i + 2));
  out.push_back("pb-2=" + pos_at(i - 2) + "_" + pos_at(i - 1));
  out.push_back("pb-1=" + pos_at(i - 1) + "_" + pos_at(i));
  out.push_back("pb+1=" + pos_at(i) + "_" + pos_at(i + 1));
  out.push_back("pb+2=" + pos_at(i + 1) + "_" + pos_at(i + 2));
  out.push_back("pt-1=" + pos_at(i - 2) + "_" + pos_at(i - 1) + "_" + pos_at(i));
  out.push_back("pt0=" + pos_at(i - 1) + "_" + pos_at(i) + "_" + pos_at(i + 1));
  out.push_back("pt+1=" + pos_at(i) + "_" + pos_at(i + 1) + "_" + pos_at(i + 2));
  out.push_back("sh=" + word_shape(form));
  for (int k = 1; k <= 3; ++k) {
    out.push_back("pre" + std::to_string(k) + "=" + utf8_prefix(form, k));
    out.push_back("suf" + std::to_string(k) + "=" + utf8_suffix(form, k));
  }
}

Chunker::Chunker(SequenceModel model) : model_(std::move(model)) {
  build_transition_tables();
}

void Chunker::build_transition_tables() {
  const auto& labels = model_.labels();
  const std::size_t n = labels.size();
  allowed_.assign(n, std::vector<std::uint8_t>(n, 1));
  allowed_start_.assign(n, 1);
  for (std::size_t cur = 0; cur < n; ++cur) {
    if (labels[cur].rfind("I-", 0) != 0) continue;
    const std::string type = labels[cur].substr(2);
    allowed_start_[cur] = 0;
    for (std::size_t prev = 0; prev < n; ++prev) {
      const std::string& p = labels[prev];
      const bool continues = (p == "B-" + type || p == "I-" + type);
      allowed_[prev][cur] = continues ? 1 : 0;
    }
  }
}

std::vector<int> Chunker::viterbi(const std::vector<std::string>& forms,
                                  const std::vector<std::string>& upos,
                                  const SequenceModel& model) const {
  const int n = static_cast<int>(forms.size());
  const int L = model.label_count();
  if (n == 0) return {};
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Transition scores from the "T=<prev>" features.
  std::vector<std::vector<double>> trans(static_cast<std::size_t>(L),
                                         std::vector<double>(static_cast<std::size_t>(L), 0.0));
  for (int prev = 0; prev < L; ++prev)
    model.score_into("T=" + model.labels()[static_cast<std::size_t>(prev)],
                     trans[static_cast<std::size_t>(prev)]);

  std::vector<std::string> feats;
  std::vector<double> emis(static_cast<std::size_t>(L), 0.0);
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(L), kNegInf));
  std::vector<std::vector<int>> back(static_cast<std::size_t>(n),
                                     std::vector<int>(static_cast<std::size_t>(L), -1));

  for (int i = 0; i < n; ++i) {
    std::fill(emis.begin(), emis.end(), 0.0);
    chunker_features(forms, upos, i, feats);
    for (const auto& f : feats) model.score_into(f, emis);
    for (int y = 0; y < L; ++y) {
      if (i == 0) {
        if (allowed_start_[static_cast<std::size_t>(y)])
          delta[0][static_cast<std::size_t>(y)] = emis[static_cast<std::size_t>(y)];
        continue;
      }
      double best = kNegInf;
      int best_prev = -1;
      for (int prev = 0; prev < L; ++prev) {
        if (!allowed_[static_cast<std::size_t>(prev)][static_cast<std::size_t>(y)]) continue;
        const double cand = delta[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(prev)] +
                            trans[static_cast<std::size_t>(prev)][static_cast<std::size_t>(y)];
        if (cand > best) { best = cand; best_prev = prev; }
      }
      if (best_prev >= 0) {
        delta[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] =
            best + emis[static_cast<std::size_t>(y)];
        back[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] = best_prev;
      }
    }
  }

  int best_final = 0;
  for (int y = 1; y < L; ++y) {
    if (delta[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(y)] >
        delta[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(best_final)])
      best_final = y;
  }
  std::vector<int> path(static_cast<std::size_t>(n));
  path[static_cast<std::size_t>(n - 1)] = best_final;
  for (int i = n - 1; i > 0; --i)
    path[static_cast<std::size_t>(i - 1)] =
        back[static_cast<std::size_t>(i)][static_cast<std::size_t>(path[static_cast<std::size_t>(i)])];
  return path;
}

namespace {

void sentence_strings(const Sentence& s, std::vector<std::string>& forms,
                      std::vector<std::string>& upos) {
  forms.clear();
  upos.clear();
  for (const Token& t : s.tokens) {
    forms.push_back(t.form);
    upos.push_back(t.upos);
  }
}

}  // namespace

Chunker Chunker::train(const Treebank& train, const std::vector<ChunkLabeling>& gold,
                       const ChunkerOptions& opts, const Treebank* dev,
                       const std::vector<ChunkLabeling>* dev_gold) {
  if (train.sentences.empty())
    throw std::invalid_argument("train_chunker: empty training set");
  if (train.sentences.size() != gold.size())
    throw std::invalid_argument("train_chunker: labelings do not align");

  // Label inventory, closed under IOB pairing.
  std::set<std::string> types;
  for (const auto& labeling : gold)
    for (const auto& l : labeling.labels)
      if (l.size() > 2 && (l[0] == 'B' || l[0] == 'I')) types.insert(l.substr(2));
  std::vector<std::string> labels = {"O"};
  for (const auto& t : types) {
    labels.push_back("B-" + t);
    labels.push_back("I-" + t);
  }

  Chunker chunker{SequenceModel(labels)};
  SequenceModel& model = chunker.model_;

  std::vector<std::size_t> order(train.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(opts.seed);
  std::vector<std::string> forms, upos, feats;
  const bool track_best = opts.best_epoch_on_dev && dev != nullptr && dev_gold != nullptr;
  SequenceModel best_model;
  double best_f1 = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t si : order) {
      const Sentence& sent = train.sentences[si];
      if (sent.size() == 0) continue;
      sentence_strings(sent, forms, upos);
      const auto& gold_labels = gold[si].labels;
      std::vector<int> gold_ids(gold_labels.size());
      for (std::size_t i = 0; i < gold_labels.size(); ++i)
        gold_ids[i] = model.label_index(gold_labels[i]);
      std::vector<int> pred = chunker.viterbi(forms, upos, model);
      if (pred != gold_ids) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
          if (pred[i] == gold_ids[i]) continue;
          chunker_features(forms, upos, static_cast<int>(i), feats);
          for (const auto& f : feats) {
            model.adjust(f, gold_ids[i], +1.0);
            model.adjust(f, pred[i], -1.0);
          }
        }
        for (std::size_t i = 1; i < pred.size(); ++i) {
          if (gold_ids[i - 1] == pred[i - 1] && gold_ids[i] == pred[i]) continue;
          model.adjust("T=" + model.labels()[static_cast<std::size_t>(gold_ids[i - 1])],
                       gold_ids[i], +1.0);
          model.adjust("T=" + model.labels()[static_cast<std::size_t>(pred[i - 1])],
                       pred[i], -1.0);
        }
      }
      model.advance();
    }
    if (track_best) {
      Chunker snapshot{model.averaged_snapshot()};
      const double f1 = span_f1(*dev_gold, snapshot.predict(*dev)).f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_model = std::move(snapshot.model_);
        best_epoch = epoch;
      }
    }
  }

  if (track_best && best_f1 >= 0) {
    chunker.model_ = std::move(best_model);
    chunker.best_epoch_ = best_epoch;
  } else {
    chunker.model_.finalize_average();
    chunker.best_epoch_ = opts.epochs;
  }
  chunker.build_transition_tables();
  return chunker;
}

ChunkLabeling Chunker::predict(const Sentence& s) const {
  ChunkLabeling out;
  if (s.size() == 0) return out;
  std::vector<std::string> forms, upos;
  sentence_strings(s, forms, upos);
  const std::vector<int> path = viterbi(forms, upos, model_);
  out.labels.reserve(path.size());
  for (int y : path) out.labels.push_back(model_.labels()[static_cast<std::size_t>(y)]);
  out.spans = spans_from_labels(out.labels);
  return out;
}

std::vector<ChunkLabeling> Chunker::predict(const Treebank& t) const {
  std::vector<ChunkLabeling> out;
  out.reserve(t.sentences.size());
  for (const Sentence& s : t.sentences) out.push_back(predict(s));
  return out;
}

void Chunker::save(std::ostream& out) const {
  model_.save(out, "chunker", {{"best_epoch", std::to_string(best_epoch_)}});
}

void Chunker::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  save(out);
}

Chunker Chunker::load(std::istream& in) {
  std::string kind;
  std::map<std::string, std::string> meta;
  SequenceModel model = SequenceModel::load(in, kind, meta);
  if (kind != "chunker")
    throw std::runtime_error("expected a chunker model, got '" + kind + "'");
  Chunker chunker{std::move(model)};
  if (auto it = meta.find("best_epoch"); it != meta.end())
    parse_int(it->second, chunker.best_epoch_);
  return chunker;
}

Chunker Chunker::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load(in);
}

}  // namespace evochunk
