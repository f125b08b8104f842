#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evochunk/tagger.hpp"
#include "support/synth.hpp"

namespace {

using namespace evochunk;

// The synthetic corpora leave FEATS empty; this fills them with a bundle
// derived from the POS so the feats task becomes learnable.
Treebank with_feats(Treebank t) {
  for (Sentence& s : t.sentences) {
    for (Token& tok : s.tokens) {
      if (tok.upos == "NOUN" || tok.upos == "PROPN")
        tok.feats = "Number=Sing";
      else if (tok.upos == "VERB" || tok.upos == "AUX")
        tok.feats = "Mood=Ind|VerbForm=Fin";
      else if (tok.upos == "ADJ")
        tok.feats = "Degree=Pos";
    }
  }
  return t;
}

TEST_CASE("task names parse and print") {
  CHECK(parse_tag_task("pos") == TagTask::kPos);
  CHECK(parse_tag_task("feats") == TagTask::kFeats);
  CHECK_THROWS_AS(parse_tag_task("lemma"), std::exception);
  CHECK(tag_task_name(TagTask::kPos) == "pos");
  CHECK(tag_task_name(TagTask::kFeats) == "feats");
}

TEST_CASE("gold_tags selects the task's column") {
  Sentence s = synth::make_sentence({{"the", "DET", 2}, {"cat", "NOUN", 0}});
  s.tokens[1].feats = "Number=Sing";
  CHECK(gold_tags(TagTask::kPos, s) == std::vector<std::string>{"DET", "NOUN"});
  CHECK(gold_tags(TagTask::kFeats, s) == std::vector<std::string>{"_", "Number=Sing"});
}

TEST_CASE("token_accuracy pools over all tokens") {
  const std::vector<std::vector<std::string>> gold = {{"A", "B"}, {"C", "D"}};
  CHECK(token_accuracy(gold, {{"A", "B"}, {"C", "D"}}) == 1.0);
  CHECK(token_accuracy(gold, {{"A", "x"}, {"C", "x"}}) == 0.5);
  CHECK(token_accuracy(gold, {{"x", "x"}, {"x", "x"}}) == 0.0);
  CHECK(token_accuracy({}, {}) == 0.0);  // no tokens scores zero, not NaN
  CHECK_THROWS_AS(token_accuracy(gold, {{"A", "B"}}), std::invalid_argument);
  CHECK_THROWS_AS(token_accuracy(gold, {{"A"}, {"C", "D"}}), std::invalid_argument);
}

TEST_CASE("tagger_features include context words and tag history") {
  std::vector<std::string> out;
  tagger_features({"The", "cat"}, 0, "<s>", "<s>", out);
  auto has = [&](const std::string& f) {
    return std::find(out.begin(), out.end(), f) != out.end();
  };
  CHECK(has("w=The"));
  CHECK(has("lw=the"));
  CHECK(has("lw-1=<s>"));
  CHECK(has("lw+1=cat"));
  CHECK(has("lw+2=</s>"));
  CHECK(has("sh=Xx"));
  CHECK(has("t-1=<s>"));
  CHECK(has("pre1=T"));
  CHECK(has("suf2=he"));
}

TEST_CASE("pos tagger learns a disambiguable corpus") {
  const Treebank train = synth::make_udlike_corpus(7, 200);
  const Treebank test = synth::make_udlike_corpus(8, 60);
  TaggerOptions opts;
  opts.epochs = 5;
  opts.seed = 11;
  const Tagger tagger = Tagger::train(TagTask::kPos, train, opts, &test);
  CHECK(tagger.task() == TagTask::kPos);
  CHECK(tagger.best_epoch() >= 1);
  CHECK(tagger.best_epoch() <= 5);
  CHECK(tagger.accuracy(test) >= 0.95);
  const auto pred = tagger.predict(test);
  REQUIRE(pred.size() == test.sentences.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    CHECK(pred[i].size() == test.sentences[i].tokens.size());
}

TEST_CASE("without a dev set the final averaged epoch is kept") {
  const Treebank train = synth::make_udlike_corpus(7, 40);
  TaggerOptions opts;
  opts.epochs = 3;
  const Tagger tagger = Tagger::train(TagTask::kPos, train, opts);
  CHECK(tagger.best_epoch() == 3);
}

TEST_CASE("feats tagger learns a feature-bearing corpus") {
  const Treebank train = with_feats(synth::make_udlike_corpus(3, 200));
  const Treebank test = with_feats(synth::make_udlike_corpus(4, 60));
  TaggerOptions opts;
  opts.epochs = 5;
  opts.seed = 2;
  const Tagger tagger = Tagger::train(TagTask::kFeats, train, opts, &test);
  CHECK(tagger.task() == TagTask::kFeats);
  CHECK(tagger.accuracy(test) >= 0.95);
  // Bundles are scored as whole strings, "_" included.
  const auto tags = tagger.predict(test.sentences[0]);
  for (const std::string& tag : tags) {
    CHECK((tag == "_" || tag.find('=') != std::string::npos));
  }
}

TEST_CASE("feats task is refused when the corpus has no features") {
  const Treebank bare = synth::make_udlike_corpus(3, 20);
  TaggerOptions opts;
  CHECK_THROWS_AS(Tagger::train(TagTask::kFeats, bare, opts), UnsupportedTaskError);
  CHECK_THROWS_AS(Tagger::train(TagTask::kPos, Treebank{}, opts),
                  std::invalid_argument);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Treebank train = synth::make_udlike_corpus(5, 80);
  TaggerOptions opts;
  opts.epochs = 3;
  opts.seed = 9;
  std::ostringstream a, b;
  Tagger::train(TagTask::kPos, train, opts).save(a);
  Tagger::train(TagTask::kPos, train, opts).save(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("tagger models survive save/load") {
  const Treebank train = synth::make_udlike_corpus(5, 80);
  const Treebank probe = synth::make_udlike_corpus(6, 20);
  TaggerOptions opts;
  opts.epochs = 3;
  opts.seed = 1;
  const Tagger tagger = Tagger::train(TagTask::kPos, train, opts, &probe);
  std::ostringstream out;
  tagger.save(out);
  std::istringstream in(out.str());
  const Tagger back = Tagger::load(in);
  CHECK(back.task() == tagger.task());
  CHECK(back.best_epoch() == tagger.best_epoch());
  CHECK(back.predict(probe) == tagger.predict(probe));

  // A non-tagger payload is rejected even if the container parses.
  std::string bytes = out.str();
  const auto pos = bytes.find("tagger");
  REQUIRE(pos != std::string::npos);
  bytes.replace(pos, 6, "zebras");
  std::istringstream wrong(bytes);
  CHECK_THROWS_AS(Tagger::load(wrong), std::exception);
}

TEST_CASE("predicting an empty sentence yields no tags") {
  const Treebank train = synth::make_udlike_corpus(5, 30);
  TaggerOptions opts;
  opts.epochs = 1;
  const Tagger tagger = Tagger::train(TagTask::kPos, train, opts);
  CHECK(tagger.predict(Sentence{}).empty());
}

}  // namespace
