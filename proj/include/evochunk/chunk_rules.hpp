#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evochunk/conllu.hpp"

namespace evochunk {

inline constexpr const char* kPunctTag = "PUNCT";

// A base-level subtree occurrence: tokens [start, end] (1-based, inclusive),
// head at `head_offset` positions from `start`.
struct ChunkSpan {
  int start = 0;
  int end = 0;
  int head_offset = 0;

  int length() const { return end - start + 1; }
  int head_position() const { return start + head_offset; }
  bool overlaps(const ChunkSpan& o) const { return start <= o.end && o.start <= end; }
  friend bool operator==(const ChunkSpan&, const ChunkSpan&) = default;
};

// A chunk type: POS-tag pattern, designated head slot, corpus frequency.
struct ChunkRule {
  std::vector<std::string> pos_sequence;
  int head_offset = 0;
  long long frequency = 0;

  int length() const { return static_cast<int>(pos_sequence.size()); }
  const std::string& head_pos() const {
    return pos_sequence[static_cast<std::size_t>(head_offset)];
  }
  std::string pattern() const;  // tags joined by spaces
};

// Canonical ordering: longer first, then more frequent, then lexicographic.
// Matching relies on this order (longer = more specific rules win).
struct RuleSet {
  std::vector<ChunkRule> rules;

  std::size_t size() const { return rules.size(); }
  bool empty() const { return rules.empty(); }
  void sort_canonical();
  // Subset selection preserves canonical order.
  RuleSet subset(const std::vector<std::uint8_t>& bits) const;
};

// The four chunk criteria against the gold tree: returns the head position of
// span [start, end] if every other member is a leaf dependent of that head,
// the span has length >= 2, and the head is inside it. At most one token can
// qualify on a valid tree.
std::optional<int> chunk_head(const Sentence& s,
                              const std::vector<std::vector<int>>& deps,
                              int start, int end);

// All base-level subtree spans of a sentence: for each head, the maximal
// contiguous run of its leaf dependents around it (length >= 2 only).
std::vector<ChunkSpan> base_subtrees(const Sentence& s);

// Overlap resolution: keep maximal spans, longest first, leftmost on ties;
// survivors are pairwise non-overlapping.
std::vector<ChunkSpan> maximal_spans(std::vector<ChunkSpan> spans);

// Scan a treebank for chunk types: maximal spans per sentence, PUNCT-bearing
// patterns discarded, frequency cut applied, head offset by majority vote
// (earliest offset on ties).
RuleSet extract_candidate_rules(const Treebank& t, long long min_freq = 5);

// Ruleset file: "<tags space-joined>\t<head_offset>\t<frequency>" per line.
RuleSet load_ruleset(std::istream& in);
RuleSet load_ruleset_file(const std::string& path);
void save_ruleset(const RuleSet& rs, std::ostream& out);
void save_ruleset_file(const RuleSet& rs, const std::string& path);

}  // namespace evochunk
