#include "evochunk/dep_encoding.hpp"

#include <cstdlib>
#include <stdexcept>

#include "evochunk/chunk_rules.hpp"
#include "evochunk/util.hpp"

namespace evochunk {
namespace {

constexpr const char* kRootPos = "ROOT";

// 0-based index of the n-th token with POS `pos` strictly after/before `i`,
// or the nearest such token when fewer than n exist in the stated direction,
// or the nearest in either direction (stated direction wins ties), or -1.
int resolve_offset(const std::vector<std::string>& upos, int i, int offset,
                   const std::string& pos) {
  const int n = static_cast<int>(upos.size());
  int first_match = -1;
  int seen = 0;
  if (offset > 0) {
    for (int j = i + 1; j < n; ++j) {
      if (upos[j] != pos) continue;
      if (first_match < 0) first_match = j;
      if (++seen == offset) return j;
    }
  } else {
    for (int j = i - 1; j >= 0; --j) {
      if (upos[j] != pos) continue;
      if (first_match < 0) first_match = j;
      if (++seen == -offset) return j;
    }
  }
  if (first_match >= 0) return first_match;
  for (int d = 1; d < n; ++d) {
    const int fwd = i + d;
    const int bwd = i - d;
    if (offset > 0) {
      if (fwd < n && upos[fwd] == pos) return fwd;
      if (bwd >= 0 && upos[bwd] == pos) return bwd;
    } else {
      if (bwd >= 0 && upos[bwd] == pos) return bwd;
      if (fwd < n && upos[fwd] == pos) return fwd;
    }
  }
  return -1;
}

}  // namespace

std::string dep_label_string(const DepLabel& label) {
  std::string out;
  if (label.offset > 0) out += '+';
  out += std::to_string(label.offset);
  out += ',';
  out += label.relation;
  out += ',';
  out += label.head_pos;
  return out;
}

DepLabel parse_dep_label(const std::string& text) {
  const auto first = text.find(',');
  const auto last = text.rfind(',');
  if (first == std::string::npos || last == first) {
    throw std::runtime_error("malformed dependency label: '" + text + "'");
  }
  DepLabel label;
  std::string offset_text = text.substr(0, first);
  if (!offset_text.empty() && offset_text[0] == '+') offset_text.erase(0, 1);
  if (!parse_int(offset_text, label.offset)) {
    throw std::runtime_error("malformed dependency label offset: '" + text + "'");
  }
  label.relation = text.substr(first + 1, last - first - 1);
  label.head_pos = text.substr(last + 1);
  if (label.head_pos.empty()) {
    throw std::runtime_error("dependency label missing head POS: '" + text + "'");
  }
  if (label.offset == 0 && label.head_pos != kRootPos) {
    throw std::runtime_error("zero offset requires ROOT head POS: '" + text + "'");
  }
  if (label.offset != 0 && label.head_pos == kRootPos) {
    throw std::runtime_error("ROOT head POS requires zero offset: '" + text + "'");
  }
  return label;
}

std::vector<DepLabel> encode_dependencies(const Sentence& s) {
  const auto violations = validate_tree(s);
  if (!violations.empty()) {
    throw std::runtime_error("cannot encode invalid tree: " + violations.front());
  }
  const int n = s.size();
  std::vector<DepLabel> labels(n);
  for (int i = 0; i < n; ++i) {
    const Token& tok = s.tokens[i];
    DepLabel& label = labels[i];
    label.relation = tok.deprel;
    if (tok.head == 0) {
      label.offset = 0;
      label.head_pos = kRootPos;
      continue;
    }
    const int h = tok.head - 1;
    label.head_pos = s.tokens[h].upos;
    int count = 0;
    if (h > i) {
      for (int j = i + 1; j <= h; ++j) {
        if (s.tokens[j].upos == label.head_pos) ++count;
      }
      label.offset = count;
    } else {
      for (int j = i - 1; j >= h; --j) {
        if (s.tokens[j].upos == label.head_pos) ++count;
      }
      label.offset = -count;
    }
  }
  return labels;
}

void decode_dependencies(const std::vector<std::string>& upos,
                         const std::vector<DepLabel>& labels,
                         std::vector<int>& heads_out,
                         std::vector<std::string>& deprels_out) {
  if (upos.size() != labels.size()) {
    throw std::invalid_argument("decode: POS/label length mismatch");
  }
  const int n = static_cast<int>(upos.size());
  heads_out.assign(n, 0);
  deprels_out.assign(n, "");
  if (n == 0) return;

  int root = -1;  // 0-based index of the chosen root token
  for (int i = 0; i < n; ++i) {
    deprels_out[i] = labels[i].relation;
    if (labels[i].is_root() && root < 0) root = i;
  }

  std::vector<int> unresolved;
  for (int i = 0; i < n; ++i) {
    if (labels[i].is_root()) continue;
    const int h = resolve_offset(upos, i, labels[i].offset, labels[i].head_pos);
    if (h < 0) {
      unresolved.push_back(i);
    } else {
      heads_out[i] = h + 1;
    }
  }

  if (root < 0) root = unresolved.empty() ? 0 : unresolved.front();
  heads_out[root] = 0;
  for (int i = 0; i < n; ++i) {
    if (i != root && labels[i].is_root()) heads_out[i] = root + 1;
  }
  for (int i : unresolved) {
    if (i != root) heads_out[i] = root + 1;
  }

  // Break any cycles: re-attach the lowest-index token of each cycle to root.
  // state: 0 unvisited, 1 on the current path, 2 known to reach the root.
  std::vector<int> state(n + 1, 0);
  state[0] = 2;
  std::vector<int> path;
  for (int i = 1; i <= n; ++i) {
    if (state[i] != 0) continue;
    path.clear();
    int cur = i;
    while (state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = heads_out[cur - 1];
    }
    if (state[cur] == 1) {
      int lowest = cur;
      for (int node = heads_out[cur - 1]; node != cur; node = heads_out[node - 1]) {
        if (node < lowest) lowest = node;
      }
      heads_out[lowest - 1] = root + 1;
    }
    for (int node : path) state[node] = 2;
  }
}

Sentence decode_into(const Sentence& s, const std::vector<DepLabel>& labels) {
  std::vector<std::string> upos;
  upos.reserve(s.tokens.size());
  for (const Token& tok : s.tokens) upos.push_back(tok.upos);
  std::vector<int> heads;
  std::vector<std::string> deprels;
  decode_dependencies(upos, labels, heads, deprels);
  Sentence out = s;
  for (int i = 0; i < out.size(); ++i) {
    out.tokens[i].head = heads[i];
    out.tokens[i].deprel = deprels[i];
  }
  return out;
}

ParseScore attachment_score(const Sentence& gold, const Sentence& pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("attachment_score: tokenization mismatch");
  }
  ParseScore score;
  for (int i = 0; i < gold.size(); ++i) {
    if (gold.tokens[i].form != pred.tokens[i].form) {
      throw std::invalid_argument("attachment_score: tokenization mismatch at token " +
                                  std::to_string(i + 1));
    }
    if (gold.tokens[i].upos == kPunctTag) continue;
    ++score.scored_tokens;
    if (gold.tokens[i].head != pred.tokens[i].head) continue;
    ++score.correct_heads;
    if (gold.tokens[i].deprel == pred.tokens[i].deprel) ++score.correct_labeled;
  }
  if (score.scored_tokens > 0) {
    score.uas = static_cast<double>(score.correct_heads) / score.scored_tokens;
    score.las = static_cast<double>(score.correct_labeled) / score.scored_tokens;
  }
  return score;
}

ParseScore attachment_score(const Treebank& gold, const Treebank& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw std::invalid_argument("attachment_score: sentence count mismatch");
  }
  ParseScore total;
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const ParseScore one = attachment_score(gold.sentences[i], pred.sentences[i]);
    total.scored_tokens += one.scored_tokens;
    total.correct_heads += one.correct_heads;
    total.correct_labeled += one.correct_labeled;
  }
  if (total.scored_tokens > 0) {
    total.uas = static_cast<double>(total.correct_heads) / total.scored_tokens;
    total.las = static_cast<double>(total.correct_labeled) / total.scored_tokens;
  }
  return total;
}

}  // namespace evochunk
