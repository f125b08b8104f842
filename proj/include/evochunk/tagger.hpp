#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "evochunk/conllu.hpp"
#include "evochunk/perceptron.hpp"

namespace evochunk {

enum class TagTask {
  kPos,    // UPOS column
  kFeats,  // FEATS column, scored as the full bundle string
};

TagTask parse_tag_task(const std::string& name);
std::string tag_task_name(TagTask task);

// Raised when the treebank does not carry the column a task needs
// (e.g. a corpus whose FEATS are entirely "_").
class UnsupportedTaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gold tags for one sentence under the task's view.
std::vector<std::string> gold_tags(TagTask task, const Sentence& s);

double token_accuracy(const std::vector<std::vector<std::string>>& gold,
                      const std::vector<std::vector<std::string>>& pred);

struct TaggerOptions {
  int epochs = 10;
  std::uint64_t seed = 0;
  bool best_epoch_on_dev = true;
};

// Greedy left-to-right averaged-perceptron tagger over word features plus
// the two previously predicted tags.
class Tagger {
 public:
  static Tagger train(TagTask task, const Treebank& train, const TaggerOptions& opts,
                      const Treebank* dev = nullptr);

  std::vector<std::string> predict(const Sentence& s) const;
  std::vector<std::vector<std::string>> predict(const Treebank& t) const;
  double accuracy(const Treebank& gold) const;

  TagTask task() const { return task_; }
  int best_epoch() const { return best_epoch_; }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static Tagger load(std::istream& in);
  static Tagger load_file(const std::string& path);

 private:
  Tagger() = default;

  SequenceModel model_;
  TagTask task_ = TagTask::kPos;
  int best_epoch_ = 0;
};

// Feature templates shared between training and prediction; prev1/prev2 are
// the previously assigned tags ("<s>" at the sentence start).
void tagger_features(const std::vector<std::string>& forms, int i,
                     const std::string& prev1, const std::string& prev2,
                     std::vector<std::string>& out);

}  // namespace evochunk
