#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evochunk {

// Sparse averaged-perceptron weight table shared by the chunker, the taggers
// and the dependency labeler. Weights live per (feature, label); averaging
// uses the usual accumulator-with-timestamps trick.
class SequenceModel {
 public:
  SequenceModel() = default;
  explicit SequenceModel(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  int label_count() const { return static_cast<int>(labels_.size()); }
  int label_index(std::string_view label) const;  // -1 when unknown

  // Adds this feature's weights into scores (size label_count).
  void score_into(std::string_view feature, std::vector<double>& scores) const;

  // Training update; creates the (feature, label) cell on first touch.
  void adjust(std::string_view feature, int label, double delta);

  // One training instance consumed (advances the averaging clock).
  void advance() { ++t_; }

  // Replace raw weights with their running averages. Call once, after
  // training; scoring before finalization sees the raw weights.
  void finalize_average();
  SequenceModel averaged_snapshot() const;

  void save(std::ostream& out, const std::string& kind,
            const std::map<std::string, std::string>& meta) const;
  static SequenceModel load(std::istream& in, std::string& kind_out,
                            std::map<std::string, std::string>& meta_out);

 private:
  struct Cell {
    std::int32_t label = 0;
    double weight = 0;
    double accum = 0;
    std::int64_t updated_at = 0;
  };

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> label_ids_;
  std::unordered_map<std::string, std::uint32_t> feature_ids_;
  std::vector<std::vector<Cell>> rows_;
  std::int64_t t_ = 1;
};

}  // namespace evochunk
