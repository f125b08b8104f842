#include "evochunk/conllu.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "evochunk/util.hpp"

namespace evochunk {

long long Treebank::token_count() const {
  long long n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

namespace {

bool is_mwt_or_empty_id(std::string_view id) {
  return id.find('-') != std::string_view::npos ||
         id.find('.') != std::string_view::npos;
}

void finish_sentence(Treebank& tb, Sentence& sent, int line_no) {
  if (sent.tokens.empty() && sent.comments.empty() && sent.raw_rows.empty()) return;
  if (sent.tokens.empty())
    throw ConlluParseError("sentence block without token lines", line_no);
  for (const auto& c : sent.comments) {
    if (c.rfind("# sent_id = ", 0) == 0) sent.sent_id = c.substr(12);
    if (c.rfind("# text = ", 0) == 0) sent.text = c.substr(9);
  }
  tb.sentences.push_back(std::move(sent));
  sent = Sentence{};
}

}  // namespace

Treebank parse_conllu(std::istream& in) {
  Treebank tb;
  Sentence sent;
  std::string line;
  int line_no = 0;
  int expected_id = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(tb, sent, line_no);
      expected_id = 1;
      continue;
    }
    if (line[0] == '#') {
      sent.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 10)
      throw ConlluParseError("expected 10 tab-separated columns, got " +
                                 std::to_string(cols.size()),
                             line_no);
    if (is_mwt_or_empty_id(cols[0])) {
      RawRow row;
      row.id = cols[0];
      for (int i = 0; i < 9; ++i) row.cols[static_cast<std::size_t>(i)] = cols[static_cast<std::size_t>(i + 1)];
      row.after_token = static_cast<int>(sent.tokens.size());
      sent.raw_rows.push_back(std::move(row));
      continue;
    }
    Token tok;
    if (!parse_int(cols[0], tok.id) || tok.id < 1)
      throw ConlluParseError("bad token id '" + cols[0] + "'", line_no);
    if (tok.id != expected_id)
      throw ConlluParseError("token ids not contiguous: expected " +
                                 std::to_string(expected_id) + ", got " + cols[0],
                             line_no);
    ++expected_id;
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    tok.feats = cols[5];
    if (!parse_int(cols[6], tok.head) || tok.head < 0)
      throw ConlluParseError("non-integer head '" + cols[6] + "'", line_no);
    tok.deprel = cols[7];
    tok.deps = cols[8];
    tok.misc = cols[9];
    if (tok.upos.empty())
      throw ConlluParseError("empty UPOS column", line_no);
    sent.tokens.push_back(std::move(tok));
  }
  finish_sentence(tb, sent, line_no);
  return tb;
}

Treebank parse_conllu_string(const std::string& text) {
  std::istringstream in(text);
  return parse_conllu(in);
}

Treebank parse_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return parse_conllu(in);
}

std::vector<std::string> validate_tree(const Sentence& s) {
  std::vector<std::string> violations;
  const int n = s.size();
  int roots = 0;
  for (const Token& t : s.tokens) {
    if (t.head < 0 || t.head > n)
      violations.push_back("token " + std::to_string(t.id) + ": head " +
                           std::to_string(t.head) + " out of range");
    if (t.head == t.id)
      violations.push_back("token " + std::to_string(t.id) + ": is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots == 0) violations.push_back("no root");
  if (roots > 1) violations.push_back("multiple roots");
  if (!violations.empty()) return violations;

  // Walk each token up to the root; revisiting a token mid-walk means a cycle.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);  // 0 new, 1 on path, 2 done
  for (int start = 1; start <= n; ++start) {
    if (state[static_cast<std::size_t>(start)] != 0) continue;
    std::vector<int> path;
    int cur = start;
    while (cur != 0 && state[static_cast<std::size_t>(cur)] == 0) {
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = s.token(cur).head;
    }
    if (cur != 0 && state[static_cast<std::size_t>(cur)] == 1)
      violations.push_back("cycle through token " + std::to_string(cur));
    for (int v : path) state[static_cast<std::size_t>(v)] = 2;
    if (!violations.empty()) break;
  }
  return violations;
}

bool is_valid_tree(const Sentence& s) { return validate_tree(s).empty(); }

std::vector<std::vector<int>> dependents_of(const Sentence& s) {
  std::vector<std::vector<int>> deps(static_cast<std::size_t>(s.size()) + 1);
  for (const Token& t : s.tokens) {
    if (t.head >= 0 && t.head <= s.size()) deps[static_cast<std::size_t>(t.head)].push_back(t.id);
  }
  return deps;
}

namespace {

void write_token(std::ostream& out, const Token& t, const std::string& extra) {
  std::string misc = t.misc;
  if (!extra.empty()) {
    if (misc.empty() || misc == "_") misc = extra;
    else misc += "|" + extra;
  }
  out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t'
      << t.xpos << '\t' << t.feats << '\t' << t.head << '\t' << t.deprel
      << '\t' << t.deps << '\t' << misc << '\n';
}

}  // namespace

void write_conllu(const Treebank& t, std::ostream& out,
                  const MiscAnnotations* extra_misc) {
  for (std::size_t si = 0; si < t.sentences.size(); ++si) {
    const Sentence& s = t.sentences[si];
    for (const auto& c : s.comments) out << c << '\n';
    std::size_t raw_i = 0;
    for (int i = 0; i <= s.size(); ++i) {
      while (raw_i < s.raw_rows.size() && s.raw_rows[raw_i].after_token == i) {
        const RawRow& r = s.raw_rows[raw_i];
        out << r.id;
        for (const auto& c : r.cols) out << '\t' << c;
        out << '\n';
        ++raw_i;
      }
      if (i == s.size()) break;
      const std::string* extra = nullptr;
      if (extra_misc && si < extra_misc->size() &&
          static_cast<std::size_t>(i) < (*extra_misc)[si].size())
        extra = &(*extra_misc)[si][static_cast<std::size_t>(i)];
      write_token(out, s.tokens[static_cast<std::size_t>(i)], extra ? *extra : std::string());
    }
    out << '\n';
  }
}

std::string write_conllu_string(const Treebank& t, const MiscAnnotations* extra_misc) {
  std::ostringstream out;
  write_conllu(t, out, extra_misc);
  return out.str();
}

void write_conllu_file(const Treebank& t, const std::string& path,
                       const MiscAnnotations* extra_misc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  write_conllu(t, out, extra_misc);
}

std::string misc_value(const std::string& misc, const std::string& key) {
  if (misc.empty() || misc == "_") return "";
  for (const auto& part : split(misc, '|')) {
    if (part.size() > key.size() + 1 && part.compare(0, key.size(), key) == 0 &&
        part[key.size()] == '=')
      return part.substr(key.size() + 1);
  }
  return "";
}

}  // namespace evochunk
