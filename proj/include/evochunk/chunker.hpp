#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evochunk/annotate.hpp"
#include "evochunk/conllu.hpp"
#include "evochunk/perceptron.hpp"

namespace evochunk {

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long long tp = 0;
  long long pred_count = 0;
  long long gold_count = 0;
};

// Exact-match span scoring: a predicted span is correct iff start, end and
// head-POS type all match a gold span.
F1Score span_f1(const ChunkLabeling& gold, const ChunkLabeling& pred);
F1Score span_f1(const std::vector<ChunkLabeling>& gold,
                const std::vector<ChunkLabeling>& pred);

struct ChunkerOptions {
  int epochs = 5;
  std::uint64_t seed = 0;
  // Keep the epoch snapshot that scores best on dev (when dev data is given);
  // otherwise the averaged final-epoch model is used.
  bool best_epoch_on_dev = true;
};

// Statistical IOB chunker: structured averaged perceptron over token features
// with Viterbi decoding constrained to well-formed IOB transitions.
class Chunker {
 public:
  static Chunker train(const Treebank& train,
                       const std::vector<ChunkLabeling>& gold,
                       const ChunkerOptions& opts,
                       const Treebank* dev = nullptr,
                       const std::vector<ChunkLabeling>* dev_gold = nullptr);

  ChunkLabeling predict(const Sentence& s) const;
  std::vector<ChunkLabeling> predict(const Treebank& t) const;

  const std::vector<std::string>& labels() const { return model_.labels(); }
  int best_epoch() const { return best_epoch_; }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static Chunker load(std::istream& in);
  static Chunker load_file(const std::string& path);

 private:
  Chunker() = default;
  explicit Chunker(SequenceModel model);
  void build_transition_tables();
  std::vector<int> viterbi(const std::vector<std::string>& forms,
                           const std::vector<std::string>& upos,
                           const SequenceModel& model) const;

  SequenceModel model_;
  std::vector<std::vector<std::uint8_t>> allowed_;  // [prev][cur]
  std::vector<std::uint8_t> allowed_start_;
  int best_epoch_ = 0;
};

// Token feature templates shared between training and prediction.
void chunker_features(const std::vector<std::string>& forms,
                      const std::vector<std::string>& upos, int i,
                      std::vector<std::string>& out);

}  // namespace evochunk
