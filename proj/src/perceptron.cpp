#include "evochunk/perceptron.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "evochunk/util.hpp"

namespace evochunk {

SequenceModel::SequenceModel(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    label_ids_[labels_[i]] = static_cast<int>(i);
  if (label_ids_.size() != labels_.size())
    throw std::invalid_argument("duplicate labels in model");
}

int SequenceModel::label_index(std::string_view label) const {
  auto it = label_ids_.find(std::string(label));
  return it == label_ids_.end() ? -1 : it->second;
}

void SequenceModel::score_into(std::string_view feature,
                               std::vector<double>& scores) const {
  auto it = feature_ids_.find(std::string(feature));
  if (it == feature_ids_.end()) return;
  for (const Cell& c : rows_[it->second])
    scores[static_cast<std::size_t>(c.label)] += c.weight;
}

void SequenceModel::adjust(std::string_view feature, int label, double delta) {
  auto [it, inserted] = feature_ids_.try_emplace(
      std::string(feature), static_cast<std::uint32_t>(rows_.size()));
  if (inserted) rows_.emplace_back();
  std::vector<Cell>& row = rows_[it->second];
  for (Cell& c : row) {
    if (c.label == label) {
      c.accum += c.weight * static_cast<double>(t_ - c.updated_at);
      c.weight += delta;
      c.updated_at = t_;
      return;
    }
  }
  row.push_back({label, delta, 0.0, t_});
}

void SequenceModel::finalize_average() {
  for (auto& row : rows_) {
    for (Cell& c : row) {
      c.accum += c.weight * static_cast<double>(t_ - c.updated_at);
      c.updated_at = t_;
      c.weight = c.accum / static_cast<double>(t_);
    }
  }
}

SequenceModel SequenceModel::averaged_snapshot() const {
  SequenceModel copy = *this;
  copy.finalize_average();
  return copy;
}

void SequenceModel::save(std::ostream& out, const std::string& kind,
                         const std::map<std::string, std::string>& meta) const {
  out << "evochunk-model 1 " << kind << '\n';
  for (const auto& [k, v] : meta) out << "meta\t" << k << '\t' << v << '\n';
  out << "labels\t" << labels_.size() << '\n';
  for (const auto& l : labels_) out << l << '\n';

  // Sorted dump so that identical models serialize identically.
  std::vector<std::pair<std::string, std::uint32_t>> feats(feature_ids_.begin(),
                                                           feature_ids_.end());
  std::sort(feats.begin(), feats.end());
  std::size_t n_cells = 0;
  for (const auto& [name, row] : feats) n_cells += rows_[row].size();
  out << "weights\t" << n_cells << '\n';
  char buf[64];
  for (const auto& [name, row_id] : feats) {
    std::vector<Cell> row = rows_[row_id];
    std::sort(row.begin(), row.end(),
              [](const Cell& a, const Cell& b) { return a.label < b.label; });
    for (const Cell& c : row) {
      std::snprintf(buf, sizeof buf, "%.17g", c.weight);
      out << name << '\t' << labels_[static_cast<std::size_t>(c.label)] << '\t'
          << buf << '\n';
    }
  }
  out << "end\n";
}

SequenceModel SequenceModel::load(std::istream& in, std::string& kind_out,
                                  std::map<std::string, std::string>& meta_out) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("model file: empty");
  {
    auto head = split(line, ' ');
    if (head.size() != 3 || head[0] != "evochunk-model" || head[1] != "1")
      throw std::runtime_error("model file: bad header '" + line + "'");
    kind_out = head[2];
  }
  std::vector<std::string> labels;
  std::size_t n_weights = 0;
  while (std::getline(in, line)) {
    if (line.rfind("meta\t", 0) == 0) {
      auto cols = split(line, '\t');
      if (cols.size() != 3) throw std::runtime_error("model file: bad meta line");
      meta_out[cols[1]] = cols[2];
      continue;
    }
    if (line.rfind("labels\t", 0) == 0) {
      int n = 0;
      if (!parse_int(split(line, '\t')[1], n) || n < 0)
        throw std::runtime_error("model file: bad labels count");
      for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("model file: truncated labels");
        labels.push_back(line);
      }
      continue;
    }
    if (line.rfind("weights\t", 0) == 0) {
      double n = 0;
      if (!parse_double(split(line, '\t')[1], n) || n < 0)
        throw std::runtime_error("model file: bad weights count");
      n_weights = static_cast<std::size_t>(n);
      break;
    }
    throw std::runtime_error("model file: unexpected line '" + line + "'");
  }
  SequenceModel model(labels);
  for (std::size_t i = 0; i < n_weights; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("model file: truncated weights");
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw std::runtime_error("model file: bad weight line");
    int label = model.label_index(cols[1]);
    if (label < 0) throw std::runtime_error("model file: unknown label '" + cols[1] + "'");
    double w = 0;
    if (!parse_double(cols[2], w)) throw std::runtime_error("model file: bad weight value");
    model.adjust(cols[0], label, w);
  }
  if (!std::getline(in, line) || line != "end")
    throw std::runtime_error("model file: missing end marker");
  return model;
}

}  // namespace evochunk
