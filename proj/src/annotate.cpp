#include "evochunk/annotate.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace evochunk {

long long ChunkLabeling::outside_count() const {
  long long n = 0;
  for (const auto& l : labels)
    if (l == "O") ++n;
  return n;
}

std::vector<LabeledSpan> spans_from_labels(const std::vector<std::string>& labels) {
  std::vector<LabeledSpan> spans;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() > 2 && labels[i][0] == 'B') {
      LabeledSpan span;
      span.start = static_cast<int>(i) + 1;
      span.head_pos = labels[i].substr(2);
      std::size_t j = i + 1;
      while (j < labels.size() && labels[j] == "I-" + span.head_pos) ++j;
      span.end = static_cast<int>(j);
      spans.push_back(std::move(span));
      i = j - 1;
    }
  }
  return spans;
}

std::vector<std::string> labels_from_spans(int n_tokens,
                                           const std::vector<LabeledSpan>& spans) {
  std::vector<std::string> labels(static_cast<std::size_t>(n_tokens), "O");
  for (const LabeledSpan& span : spans) {
    labels[static_cast<std::size_t>(span.start - 1)] = "B-" + span.head_pos;
    for (int i = span.start + 1; i <= span.end; ++i)
      labels[static_cast<std::size_t>(i - 1)] = "I-" + span.head_pos;
  }
  return labels;
}

MatchMode parse_match_mode(const std::string& name) {
  if (name == "tree" || name == "tree_validated") return MatchMode::kTreeValidated;
  if (name == "pattern" || name == "pattern_only") return MatchMode::kPatternOnly;
  throw std::runtime_error("unknown match mode '" + name + "' (use tree|pattern)");
}

ChunkLabeling apply_ruleset(const Sentence& s, const RuleSet& rs, MatchMode mode) {
  const int n = s.size();
  std::vector<std::vector<int>> deps;
  if (mode == MatchMode::kTreeValidated) {
    auto violations = validate_tree(s);
    if (!violations.empty())
      throw std::invalid_argument("apply_ruleset(tree mode) on invalid tree: " +
                                  violations.front());
    deps = dependents_of(s);
  }

  std::vector<bool> claimed(static_cast<std::size_t>(n), false);
  ChunkLabeling out;
  for (std::size_t ri = 0; ri < rs.rules.size(); ++ri) {
    const ChunkRule& rule = rs.rules[ri];
    const int len = rule.length();
    if (len > n) continue;
    for (int start = 1; start + len - 1 <= n; ++start) {
      const int end = start + len - 1;
      bool free_and_matching = true;
      for (int i = 0; i < len && free_and_matching; ++i) {
        const int pos = start + i;
        if (claimed[static_cast<std::size_t>(pos - 1)] ||
            s.token(pos).upos != rule.pos_sequence[static_cast<std::size_t>(i)])
          free_and_matching = false;
      }
      if (!free_and_matching) continue;
      if (mode == MatchMode::kTreeValidated && !chunk_head(s, deps, start, end))
        continue;
      for (int pos = start; pos <= end; ++pos)
        claimed[static_cast<std::size_t>(pos - 1)] = true;
      out.spans.push_back({start, end, rule.head_pos(), static_cast<int>(ri)});
      start = end;  // next scan position after the claimed window
    }
  }
  std::sort(out.spans.begin(), out.spans.end(),
            [](const LabeledSpan& a, const LabeledSpan& b) { return a.start < b.start; });
  out.labels = labels_from_spans(n, out.spans);
  return out;
}

std::vector<ChunkLabeling> annotate_treebank(const Treebank& t, const RuleSet& rs,
                                             MatchMode mode) {
  std::vector<ChunkLabeling> out;
  out.reserve(t.sentences.size());
  for (const Sentence& s : t.sentences) out.push_back(apply_ruleset(s, rs, mode));
  return out;
}

CompressionStats compression_stats(const Treebank& t,
                                   const std::vector<ChunkLabeling>& labelings) {
  if (t.sentences.size() != labelings.size())
    throw std::invalid_argument("labelings do not align with treebank");
  CompressionStats stats;
  stats.sentences = static_cast<long long>(t.sentences.size());
  for (std::size_t i = 0; i < labelings.size(); ++i) {
    stats.tokens += t.sentences[i].size();
    stats.chunks += static_cast<long long>(labelings[i].spans.size());
    stats.outside += labelings[i].outside_count();
  }
  return stats;
}

double compression_proportion(double r_subset, double r_all) {
  if (r_all <= 1.0)
    throw DegenerateRulesetError(
        "full candidate ruleset produces no chunks (r_all <= 1)");
  return (r_subset - 1.0) / (r_all - 1.0);
}

ChunkStatsReport chunk_stats(const Treebank& t, const RuleSet& rs,
                             const std::vector<ChunkLabeling>& labelings) {
  ChunkStatsReport report;
  report.totals = compression_stats(t, labelings);
  report.per_rule_matches.assign(rs.size(), 0);
  for (const auto& labeling : labelings) {
    for (const auto& span : labeling.spans) {
      if (span.rule_index >= 0 &&
          static_cast<std::size_t>(span.rule_index) < rs.size())
        ++report.per_rule_matches[static_cast<std::size_t>(span.rule_index)];
    }
  }
  for (long long c : report.per_rule_matches)
    if (c > 0) ++report.rules_matched;
  return report;
}

void write_chunk_stats(const ChunkStatsReport& report, const RuleSet& rs,
                       std::ostream& out) {
  const CompressionStats& s = report.totals;
  char buf[64];
  out << "sentences=" << s.sentences << '\n';
  out << "tokens=" << s.tokens << '\n';
  out << "chunks=" << s.chunks << '\n';
  out << "tokens_outside=" << s.outside << '\n';
  std::snprintf(buf, sizeof buf, "%.4f", s.rate());
  out << "compression_rate=" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", s.chunks_per_sentence());
  out << "chunks_per_sentence=" << buf << '\n';
  out << "rules_total=" << rs.size() << '\n';
  out << "rules_matched=" << report.rules_matched << '\n';
  for (std::size_t i = 0; i < rs.size(); ++i) {
    out << "rule\t" << rs.rules[i].pattern() << '\t' << rs.rules[i].head_offset
        << '\t' << report.per_rule_matches[i] << '\n';
  }
}

MiscAnnotations chunk_misc_annotations(const std::vector<ChunkLabeling>& labelings) {
  MiscAnnotations misc;
  misc.reserve(labelings.size());
  for (const auto& labeling : labelings) {
    std::vector<std::string> per_token;
    per_token.reserve(labeling.labels.size());
    for (const auto& label : labeling.labels) per_token.push_back("Chunk=" + label);
    misc.push_back(std::move(per_token));
  }
  return misc;
}

}  // namespace evochunk
