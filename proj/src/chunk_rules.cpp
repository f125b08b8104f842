#include "evochunk/chunk_rules.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "evochunk/util.hpp"

namespace evochunk {

std::string ChunkRule::pattern() const { return join(pos_sequence, " "); }

namespace {

bool canonical_less(const ChunkRule& a, const ChunkRule& b) {
  if (a.length() != b.length()) return a.length() > b.length();
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.pos_sequence < b.pos_sequence;
}

}  // namespace

void RuleSet::sort_canonical() {
  std::sort(rules.begin(), rules.end(), canonical_less);
}

RuleSet RuleSet::subset(const std::vector<std::uint8_t>& bits) const {
  RuleSet out;
  for (std::size_t i = 0; i < rules.size() && i < bits.size(); ++i) {
    if (bits[i]) out.rules.push_back(rules[i]);
  }
  return out;
}

std::optional<int> chunk_head(const Sentence& s,
                              const std::vector<std::vector<int>>& deps,
                              int start, int end) {
  if (end - start + 1 < 2 || start < 1 || end > s.size()) return std::nullopt;
  for (int h = start; h <= end; ++h) {
    bool ok = true;
    for (int t = start; t <= end && ok; ++t) {
      if (t == h) continue;
      if (s.token(t).head != h) ok = false;
      else if (!deps[static_cast<std::size_t>(t)].empty()) ok = false;  // dependents must be leaves
    }
    if (ok) return h;
  }
  return std::nullopt;
}

std::vector<ChunkSpan> base_subtrees(const Sentence& s) {
  auto violations = validate_tree(s);
  if (!violations.empty())
    throw std::invalid_argument("base_subtrees on invalid tree: " + violations.front());
  const auto deps = dependents_of(s);
  auto is_leaf_dep_of = [&](int t, int h) {
    return s.token(t).head == h && deps[static_cast<std::size_t>(t)].empty();
  };
  std::vector<ChunkSpan> spans;
  for (int h = 1; h <= s.size(); ++h) {
    if (deps[static_cast<std::size_t>(h)].empty()) continue;
    int lo = h;
    while (lo > 1 && is_leaf_dep_of(lo - 1, h)) --lo;
    int hi = h;
    while (hi < s.size() && is_leaf_dep_of(hi + 1, h)) ++hi;
    if (hi - lo + 1 >= 2) spans.push_back({lo, hi, h - lo});
  }
  return spans;
}

std::vector<ChunkSpan> maximal_spans(std::vector<ChunkSpan> spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const ChunkSpan& a, const ChunkSpan& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.start < b.start;
  });
  std::vector<ChunkSpan> kept;
  for (const ChunkSpan& c : spans) {
    bool clashes = false;
    for (const ChunkSpan& k : kept) {
      if (c.overlaps(k)) { clashes = true; break; }
    }
    if (!clashes) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const ChunkSpan& a, const ChunkSpan& b) { return a.start < b.start; });
  return kept;
}

RuleSet extract_candidate_rules(const Treebank& t, long long min_freq) {
  struct Tally {
    long long freq = 0;
    std::map<int, long long> head_offsets;
  };
  std::map<std::vector<std::string>, Tally> tallies;

  for (const Sentence& s : t.sentences) {
    for (const ChunkSpan& span : maximal_spans(base_subtrees(s))) {
      std::vector<std::string> pattern;
      pattern.reserve(static_cast<std::size_t>(span.length()));
      bool has_punct = false;
      for (int i = span.start; i <= span.end; ++i) {
        if (s.token(i).upos == kPunctTag) has_punct = true;
        pattern.push_back(s.token(i).upos);
      }
      if (has_punct) continue;
      Tally& tally = tallies[pattern];
      ++tally.freq;
      ++tally.head_offsets[span.head_offset];
    }
  }

  RuleSet rs;
  for (auto& [pattern, tally] : tallies) {
    if (tally.freq < min_freq) continue;
    int best_offset = 0;
    long long best_count = -1;
    for (const auto& [offset, count] : tally.head_offsets) {
      if (count > best_count) { best_offset = offset; best_count = count; }
    }
    rs.rules.push_back({pattern, best_offset, tally.freq});
  }
  rs.sort_canonical();
  return rs;
}

RuleSet load_ruleset(std::istream& in) {
  RuleSet rs;
  std::string line;
  int line_no = 0;
  std::map<std::vector<std::string>, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw std::runtime_error("ruleset line " + std::to_string(line_no) +
                               ": expected 3 tab-separated fields");
    ChunkRule rule;
    rule.pos_sequence = split(cols[0], ' ');
    int offset = 0;
    if (rule.pos_sequence.size() < 2)
      throw std::runtime_error("ruleset line " + std::to_string(line_no) +
                               ": rule shorter than 2 tags");
    if (!parse_int(cols[1], offset) || offset < 0 || offset >= rule.length())
      throw std::runtime_error("ruleset line " + std::to_string(line_no) +
                               ": bad head offset '" + cols[1] + "'");
    rule.head_offset = offset;
    double freq = 0;
    if (!parse_double(cols[2], freq) || freq < 0)
      throw std::runtime_error("ruleset line " + std::to_string(line_no) +
                               ": bad frequency '" + cols[2] + "'");
    rule.frequency = static_cast<long long>(freq);
    if (seen.count(rule.pos_sequence))
      throw std::runtime_error("ruleset line " + std::to_string(line_no) +
                               ": duplicate POS sequence '" + cols[0] + "'");
    seen[rule.pos_sequence] = true;
    rs.rules.push_back(std::move(rule));
  }
  rs.sort_canonical();
  return rs;
}

RuleSet load_ruleset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load_ruleset(in);
}

void save_ruleset(const RuleSet& rs, std::ostream& out) {
  for (const ChunkRule& r : rs.rules)
    out << r.pattern() << '\t' << r.head_offset << '\t' << r.frequency << '\n';
}

void save_ruleset_file(const RuleSet& rs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  save_ruleset(rs, out);
}

}  // namespace evochunk
