#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace evochunk {

// One syntactic word, all ten CoNLL-U columns kept verbatim for round-trips.
// Rule/chunk/encoding logic only looks at id, form, upos, feats, head, deprel.
struct Token {
  int id = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool has_feats() const { return !feats.empty() && feats != "_"; }
};

// Multiword-token range ("3-4") or empty node ("5.1"). Excluded from all
// syntactic processing, preserved for serialization. `after_token` is the
// number of syntactic words that precede the row.
struct RawRow {
  std::string id;
  std::array<std::string, 9> cols;
  int after_token = 0;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::string> comments;  // raw "#..." lines in order
  std::vector<RawRow> raw_rows;
  std::string sent_id;  // from "# sent_id = ..." when present
  std::string text;     // from "# text = ..." when present

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& token(int id) const { return tokens[static_cast<std::size_t>(id - 1)]; }
  Token& token(int id) { return tokens[static_cast<std::size_t>(id - 1)]; }
};

struct Treebank {
  std::vector<Sentence> sentences;
  std::string split;  // optional: train/dev/test

  std::size_t size() const { return sentences.size(); }
  long long token_count() const;
};

class ConlluParseError : public std::runtime_error {
 public:
  ConlluParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Treebank parse_conllu(std::istream& in);
Treebank parse_conllu_string(const std::string& text);
Treebank parse_conllu_file(const std::string& path);

// Tree well-formedness check; violations are data, not failures.
std::vector<std::string> validate_tree(const Sentence& s);
bool is_valid_tree(const Sentence& s);

// Dependents of each token, indexed by head id (index 0 = root's children).
std::vector<std::vector<int>> dependents_of(const Sentence& s);

// Per-sentence, per-token MISC additions, each already "Key=Value" (possibly
// "A=B|C=D"); empty string means no addition for that token.
using MiscAnnotations = std::vector<std::vector<std::string>>;

void write_conllu(const Treebank& t, std::ostream& out,
                  const MiscAnnotations* extra_misc = nullptr);
std::string write_conllu_string(const Treebank& t,
                                const MiscAnnotations* extra_misc = nullptr);
void write_conllu_file(const Treebank& t, const std::string& path,
                       const MiscAnnotations* extra_misc = nullptr);

// Value for `key` inside a MISC field, or "" when absent.
std::string misc_value(const std::string& misc, const std::string& key);

}  // namespace evochunk
