#include "oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace evochunk::oracle {
namespace {

// Does [start, end] (1-based, inclusive) qualify with head h? Every other
// member must point at h and have no dependents of its own anywhere.
bool qualifies_with_head(const Sentence& s, int start, int end, int h) {
  for (int i = start; i <= end; ++i) {
    if (i == h) continue;
    if (s.token(i).head != h) return false;
    for (const Token& t : s.tokens)
      if (t.head == i) return false;
  }
  return true;
}

}  // namespace

std::vector<ChunkSpan> brute_force_base_spans(const Sentence& s) {
  const int n = s.size();
  std::vector<ChunkSpan> found;
  for (int start = 1; start <= n; ++start) {
    for (int end = start + 1; end <= n; ++end) {
      for (int h = start; h <= end; ++h) {
        if (qualifies_with_head(s, start, end, h)) {
          found.push_back(ChunkSpan{start, end, h - start});
          break;  // at most one head can qualify on a valid tree
        }
      }
    }
  }
  // Drop spans contained in a longer qualifying span (same head by necessity).
  std::vector<ChunkSpan> maximal;
  for (const ChunkSpan& a : found) {
    bool contained = false;
    for (const ChunkSpan& b : found)
      if (!(b == a) && b.start <= a.start && a.end <= b.end) contained = true;
    if (!contained) maximal.push_back(a);
  }
  return maximal;
}

std::vector<ChunkSpan> brute_force_maximal(std::vector<ChunkSpan> spans) {
  std::vector<ChunkSpan> kept;
  while (!spans.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].length() > spans[best].length() ||
          (spans[i].length() == spans[best].length() && spans[i].start < spans[best].start))
        best = i;
    }
    const ChunkSpan chosen = spans[best];
    kept.push_back(chosen);
    std::vector<ChunkSpan> rest;
    for (const ChunkSpan& sp : spans)
      if (!sp.overlaps(chosen)) rest.push_back(sp);
    spans = std::move(rest);
  }
  std::sort(kept.begin(), kept.end(),
            [](const ChunkSpan& a, const ChunkSpan& b) { return a.start < b.start; });
  return kept;
}

double rate_from_labels(const std::vector<std::vector<std::string>>& labels) {
  long long tokens = 0, chunks = 0, outside = 0;
  for (const auto& sentence : labels) {
    for (const std::string& label : sentence) {
      ++tokens;
      if (label == "O")
        ++outside;
      else if (label.rfind("B-", 0) == 0)
        ++chunks;
      else if (label.rfind("I-", 0) != 0)
        throw std::invalid_argument("rate_from_labels: bad label " + label);
    }
  }
  if (chunks + outside == 0) throw std::invalid_argument("rate_from_labels: empty input");
  return static_cast<double>(tokens) / static_cast<double>(chunks + outside);
}

}  // namespace evochunk::oracle
