#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "evochunk/chunk_rules.hpp"
#include "evochunk/conllu.hpp"

namespace evochunk {

// A produced chunk: tokens [start, end], typed by the matched rule's head POS.
struct LabeledSpan {
  int start = 0;
  int end = 0;
  std::string head_pos;
  int rule_index = -1;  // index into the applied RuleSet, -1 if unknown

  friend bool operator==(const LabeledSpan& a, const LabeledSpan& b) {
    return a.start == b.start && a.end == b.end && a.head_pos == b.head_pos;
  }
};

// Per-token IOB tags ("O", "B-NOUN", "I-NOUN", ...) plus the span list.
struct ChunkLabeling {
  std::vector<std::string> labels;
  std::vector<LabeledSpan> spans;

  long long outside_count() const;
};

// Rebuild the span list from IOB tags (used for predicted labelings).
std::vector<LabeledSpan> spans_from_labels(const std::vector<std::string>& labels);
std::vector<std::string> labels_from_spans(int n_tokens,
                                           const std::vector<LabeledSpan>& spans);

enum class MatchMode {
  kTreeValidated,  // pattern match must also form a base-level subtree
  kPatternOnly,    // POS pattern match suffices
};

MatchMode parse_match_mode(const std::string& name);

// Pattern matching per the canonical rule order: longer rules first, then by
// frequency; left-to-right within a rule; matched tokens are claimed and
// never relabeled.
ChunkLabeling apply_ruleset(const Sentence& s, const RuleSet& rs, MatchMode mode);
std::vector<ChunkLabeling> annotate_treebank(const Treebank& t, const RuleSet& rs,
                                             MatchMode mode);

struct CompressionStats {
  long long tokens = 0;
  long long chunks = 0;
  long long outside = 0;
  long long sentences = 0;

  double rate() const {  // r = C_tokens / (C_chunks + C_out)
    return static_cast<double>(tokens) / static_cast<double>(chunks + outside);
  }
  double chunks_per_sentence() const {
    return sentences == 0 ? 0.0 : static_cast<double>(chunks) / static_cast<double>(sentences);
  }
};

CompressionStats compression_stats(const Treebank& t,
                                   const std::vector<ChunkLabeling>& labelings);

class DegenerateRulesetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// r% = (r_subset - 1) / (r_all - 1); r_all must exceed 1.
double compression_proportion(double r_subset, double r_all);

struct ChunkStatsReport {
  CompressionStats totals;
  std::vector<long long> per_rule_matches;  // aligned with the RuleSet
  long long rules_matched = 0;              // rules with at least one match
};

ChunkStatsReport chunk_stats(const Treebank& t, const RuleSet& rs,
                             const std::vector<ChunkLabeling>& labelings);

// Flat key=value block plus one row per rule, as emitted by the CLI.
void write_chunk_stats(const ChunkStatsReport& report, const RuleSet& rs,
                       std::ostream& out);

// MISC annotations carrying the chunk tags ("Chunk=B-NOUN").
MiscAnnotations chunk_misc_annotations(const std::vector<ChunkLabeling>& labelings);

}  // namespace evochunk
