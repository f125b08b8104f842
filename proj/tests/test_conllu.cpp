#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evochunk/conllu.hpp"
#include "support/synth.hpp"

namespace {

using namespace evochunk;

// The example sentence used throughout: "We enjoyed it ."
constexpr const char* kSmall =
    "# sent_id = demo-1\n"
    "# text = We enjoyed it .\n"
    "1\tWe\twe\tPRON\tPRP\tCase=Nom|Number=Plur\t2\tnsubj\t_\t_\n"
    "2\tenjoyed\tenjoy\tVERB\tVBD\tTense=Past\t0\troot\t_\t_\n"
    "3\tit\tit\tPRON\tPRP\tCase=Acc\t2\tobj\t_\t_\n"
    "4\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_\n"
    "\n";

TEST_CASE("parse_conllu_string reads columns verbatim") {
  const Treebank t = parse_conllu_string(kSmall);
  REQUIRE(t.size() == 1);
  const Sentence& s = t.sentences[0];
  REQUIRE(s.size() == 4);
  CHECK(s.sent_id == "demo-1");
  CHECK(s.text == "We enjoyed it .");
  CHECK(s.token(1).form == "We");
  CHECK(s.token(1).lemma == "we");
  CHECK(s.token(1).upos == "PRON");
  CHECK(s.token(1).xpos == "PRP");
  CHECK(s.token(1).feats == "Case=Nom|Number=Plur");
  CHECK(s.token(1).head == 2);
  CHECK(s.token(1).deprel == "nsubj");
  CHECK(s.token(2).head == 0);
  CHECK(s.token(4).upos == "PUNCT");
  CHECK(t.token_count() == 4);
}

TEST_CASE("serialization round-trips byte for byte") {
  const Treebank t = parse_conllu_string(kSmall);
  CHECK(write_conllu_string(t) == kSmall);
}

TEST_CASE("multiword ranges and empty nodes are preserved, not parsed") {
  const std::string text =
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
      "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
      "3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3.1\telided\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "\n";
  const Treebank t = parse_conllu_string(text);
  REQUIRE(t.size() == 1);
  const Sentence& s = t.sentences[0];
  CHECK(s.size() == 3);  // only syntactic words
  REQUIRE(s.raw_rows.size() == 2);
  CHECK(s.raw_rows[0].id == "1-2");
  CHECK(s.raw_rows[0].after_token == 0);
  CHECK(s.raw_rows[1].id == "3.1");
  CHECK(s.raw_rows[1].after_token == 3);
  CHECK(write_conllu_string(t) == text);
}

TEST_CASE("final sentence without trailing blank line still parses") {
  const std::string text = "1\thi\thi\tINTJ\t_\t_\t0\troot\t_\t_";
  const Treebank t = parse_conllu_string(text);
  REQUIRE(t.size() == 1);
  CHECK(t.sentences[0].size() == 1);
}

TEST_CASE("parse errors carry 1-based line numbers") {
  SUBCASE("wrong column count") {
    try {
      parse_conllu_string("# ok\n1\tword\tonly-three\n");
      FAIL("expected ConlluParseError");
    } catch (const ConlluParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("non-numeric id") {
    CHECK_THROWS_AS(parse_conllu_string("x\tw\tw\tX\t_\t_\t0\troot\t_\t_\n"),
                    ConlluParseError);
  }
  SUBCASE("non-numeric head") {
    CHECK_THROWS_AS(parse_conllu_string("1\tw\tw\tX\t_\t_\tz\troot\t_\t_\n"),
                    ConlluParseError);
  }
  SUBCASE("ids out of order") {
    CHECK_THROWS_AS(parse_conllu_string("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n"
                                        "3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n"),
                    ConlluParseError);
  }
  SUBCASE("empty column") {
    CHECK_THROWS_AS(parse_conllu_string("1\tw\tw\t\t_\t_\t0\troot\t_\t_\n"),
                    ConlluParseError);
  }
}

TEST_CASE("parse_conllu_file reports missing files") {
  CHECK_THROWS_AS(parse_conllu_file("definitely/not/here.conllu"), std::exception);
}

TEST_CASE("validate_tree flags structural problems") {
  using synth::make_sentence;
  SUBCASE("valid tree") {
    const Sentence s = make_sentence({{"a", "X", 2}, {"b", "X", 0}, {"c", "X", 2}});
    CHECK(validate_tree(s).empty());
    CHECK(is_valid_tree(s));
  }
  SUBCASE("no root") {
    const Sentence s = make_sentence({{"a", "X", 2}, {"b", "X", 1}});
    const auto v = validate_tree(s);
    REQUIRE_FALSE(v.empty());
    CHECK_FALSE(is_valid_tree(s));
  }
  SUBCASE("two roots") {
    const Sentence s = make_sentence({{"a", "X", 0}, {"b", "X", 0}});
    CHECK_FALSE(is_valid_tree(s));
  }
  SUBCASE("cycle below the root") {
    const Sentence s = make_sentence(
        {{"a", "X", 0}, {"b", "X", 3}, {"c", "X", 4}, {"d", "X", 2}});
    CHECK_FALSE(is_valid_tree(s));
  }
  SUBCASE("self head") {
    Sentence s = make_sentence({{"a", "X", 0}, {"b", "X", 1}});
    s.tokens[1].head = 2;
    CHECK_FALSE(is_valid_tree(s));
  }
  SUBCASE("head out of range") {
    const Sentence s = make_sentence({{"a", "X", 0}, {"b", "X", 9}});
    CHECK_FALSE(is_valid_tree(s));
  }
}

TEST_CASE("dependents_of groups children by head") {
  const Treebank t = parse_conllu_string(kSmall);
  const auto deps = dependents_of(t.sentences[0]);
  REQUIRE(deps.size() == 5);  // 0..4
  CHECK(deps[0] == std::vector<int>{2});
  CHECK(deps[2] == std::vector<int>{1, 3, 4});
  CHECK(deps[1].empty());
}

TEST_CASE("misc_value extracts one key from a MISC bundle") {
  CHECK(misc_value("Chunk=B-NOUN", "Chunk") == "B-NOUN");
  CHECK(misc_value("SpaceAfter=No|Chunk=I-VERB", "Chunk") == "I-VERB");
  CHECK(misc_value("_", "Chunk") == "");
  CHECK(misc_value("Chunky=X", "Chunk") == "");
}

TEST_CASE("write_conllu merges extra MISC annotations") {
  const Treebank t = parse_conllu_string(kSmall);
  MiscAnnotations extra(1, std::vector<std::string>(4));
  extra[0][0] = "Chunk=B-VERB";
  extra[0][1] = "Chunk=I-VERB";
  const std::string out = write_conllu_string(t, &extra);
  const Treebank back = parse_conllu_string(out);
  CHECK(misc_value(back.sentences[0].token(1).misc, "Chunk") == "B-VERB");
  CHECK(misc_value(back.sentences[0].token(2).misc, "Chunk") == "I-VERB");
  CHECK(back.sentences[0].token(3).misc == "_");
  // Existing MISC content is kept alongside the addition.
  const std::string text2 =
      "1\tw\tw\tX\t_\t_\t0\troot\t_\tSpaceAfter=No\n\n";
  const Treebank t2 = parse_conllu_string(text2);
  MiscAnnotations extra2(1, std::vector<std::string>(1, "Chunk=O"));
  const Treebank back2 = parse_conllu_string(write_conllu_string(t2, &extra2));
  CHECK(misc_value(back2.sentences[0].token(1).misc, "SpaceAfter") == "No");
  CHECK(misc_value(back2.sentences[0].token(1).misc, "Chunk") == "O");
}

TEST_CASE("random trees from the generator are valid and round-trip") {
  const Treebank t = synth::random_treebank(97, 50, 1, 12, synth::default_tag_pool());
  CHECK(t.size() == 50);
  for (const Sentence& s : t.sentences) CHECK(is_valid_tree(s));
  const Treebank back = parse_conllu_string(write_conllu_string(t));
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    REQUIRE(back.sentences[i].size() == t.sentences[i].size());
    for (int id = 1; id <= t.sentences[i].size(); ++id) {
      CHECK(back.sentences[i].token(id).head == t.sentences[i].token(id).head);
      CHECK(back.sentences[i].token(id).upos == t.sentences[i].token(id).upos);
    }
  }
}

}  // namespace
