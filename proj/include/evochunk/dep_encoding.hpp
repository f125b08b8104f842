#pragma once

#include <string>
#include <vector>

#include "evochunk/conllu.hpp"

namespace evochunk {

// One dependency arc as a per-token label: "<offset>,<relation>,<head_pos>".
// offset +n / -n selects the n-th token with the head's POS after / before
// the dependent; the root token is written "0,<relation>,ROOT".
struct DepLabel {
  int offset = 0;
  std::string relation;
  std::string head_pos;

  bool is_root() const { return offset == 0; }
  friend bool operator==(const DepLabel&, const DepLabel&) = default;
};

std::string dep_label_string(const DepLabel& label);
DepLabel parse_dep_label(const std::string& text);

// Relative head-POS offset encoding of a valid tree (gold POS required).
std::vector<DepLabel> encode_dependencies(const Sentence& s);

// Total decoder: any label sequence yields a single-rooted acyclic tree.
// Repairs, in order: missing n-th match -> nearest same-POS token in the
// stated direction, else nearest in either direction; still unresolved ->
// attach to root; no root label -> first unresolved token (else token 1)
// becomes root; extra root labels -> attached to the first; cycles -> lowest
// token of each cycle re-attached to the root.
void decode_dependencies(const std::vector<std::string>& upos,
                         const std::vector<DepLabel>& labels,
                         std::vector<int>& heads_out,
                         std::vector<std::string>& deprels_out);

// Decoded copy of `s` with heads/deprels replaced.
Sentence decode_into(const Sentence& s, const std::vector<DepLabel>& labels);

struct ParseScore {
  double uas = 0;
  double las = 0;
  long long scored_tokens = 0;
  long long correct_heads = 0;
  long long correct_labeled = 0;
};

// UAS/LAS with PUNCT tokens excluded, per standard UD evaluation.
ParseScore attachment_score(const Sentence& gold, const Sentence& pred);
ParseScore attachment_score(const Treebank& gold, const Treebank& pred);

}  // namespace evochunk
