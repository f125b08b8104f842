#include "synth.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace evochunk::synth {
namespace {

const std::vector<std::string>& forms_for(const std::string& upos) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kPools = {
      {"DET", {"the", "a", "this"}},       {"NOUN", {"cat", "house", "idea"}},
      {"AUX", {"has", "was", "will"}},     {"VERB", {"gone", "taken", "seen"}},
      {"ADP", {"in", "on", "at"}},         {"PROPN", {"Paris", "Alice", "Rome"}},
      {"NUM", {"one", "two", "ten"}},      {"SYM", {"%", "$", "#"}},
      {"ADJ", {"big", "red", "old"}},      {"PRON", {"it", "he", "she"}},
      {"ADV", {"soon", "here", "very"}},   {"PART", {"to", "not", "'s"}},
      {"X", {"did", "ran", "came"}},       {"PUNCT", {","}},
      {"CCONJ", {"and", "or", "but"}},     {"SCONJ", {"that", "if", "while"}},
      {"INTJ", {"oh", "well", "hey"}},
  };
  for (const auto& [tag, pool] : kPools)
    if (tag == upos) return pool;
  static const std::vector<std::string> kFallback = {"tok"};
  return kFallback;
}

std::string draw_form(Rng& rng, const std::string& upos) {
  const auto& pool = forms_for(upos);
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

TokenSpec tok(Rng& rng, const std::string& upos, int head,
              const std::string& deprel = "dep") {
  return TokenSpec{draw_form(rng, upos), upos, head, deprel};
}

}  // namespace

Sentence make_sentence(const std::vector<TokenSpec>& specs) {
  Sentence s;
  int id = 0;
  for (const TokenSpec& spec : specs) {
    Token t;
    t.id = ++id;
    t.form = spec.form;
    t.lemma = spec.form;
    t.upos = spec.upos;
    t.head = spec.head;
    t.deprel = spec.head == 0 ? "root" : spec.deprel;
    s.tokens.push_back(std::move(t));
  }
  return s;
}

Sentence random_tree_sentence(Rng& rng, int n_tokens,
                              const std::vector<std::string>& tag_pool) {
  if (n_tokens < 1) throw std::invalid_argument("random_tree_sentence: need >= 1 token");
  // Attach tokens in a random order; each one hangs off an already-attached
  // token (the first becomes the root), so the result is always a valid tree.
  std::vector<int> order(static_cast<std::size_t>(n_tokens));
  std::iota(order.begin(), order.end(), 1);
  rng.shuffle(order);
  std::vector<int> heads(static_cast<std::size_t>(n_tokens) + 1, 0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const int parent = order[rng.below(i)];
    heads[static_cast<std::size_t>(order[i])] = parent;
  }
  std::vector<TokenSpec> specs;
  specs.reserve(static_cast<std::size_t>(n_tokens));
  for (int id = 1; id <= n_tokens; ++id) {
    const std::string& upos = tag_pool[static_cast<std::size_t>(rng.below(tag_pool.size()))];
    TokenSpec spec = tok(rng, upos, heads[static_cast<std::size_t>(id)]);
    specs.push_back(std::move(spec));
  }
  return make_sentence(specs);
}

Treebank random_treebank(std::uint64_t seed, int n_sentences, int min_tokens,
                         int max_tokens, const std::vector<std::string>& tag_pool) {
  Rng rng(seed);
  Treebank t;
  t.sentences.reserve(static_cast<std::size_t>(n_sentences));
  for (int i = 0; i < n_sentences; ++i) {
    const int n = min_tokens +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(max_tokens - min_tokens + 1)));
    t.sentences.push_back(random_tree_sentence(rng, n, tag_pool));
  }
  return t;
}

std::vector<std::string> default_tag_pool() {
  return {"NOUN", "VERB", "DET", "ADJ", "ADP", "PRON", "ADV", "AUX", "PUNCT"};
}

namespace {

struct PatternPair {
  std::string dep_tag;
  std::string head_tag;
};

// Signal sentence [D, H, PUNCT, X-root]: "D H" is always a base subtree.
Sentence signal_sentence(Rng& rng, const PatternPair& p) {
  return make_sentence({
      tok(rng, p.dep_tag, 2),
      tok(rng, p.head_tag, 4),
      tok(rng, "PUNCT", 4, "punct"),
      tok(rng, "X", 0),
  });
}

// Noise sentences share the surface shape [PUNCT, Q, R, PUNCT, X-root]; only
// the tree differs, so no surface feature separates the two cases.
Sentence noise_sentence(Rng& rng, const PatternPair& p, bool valid) {
  if (valid) {
    return make_sentence({
        tok(rng, "PUNCT", 5, "punct"),
        tok(rng, p.dep_tag, 3),
        tok(rng, p.head_tag, 5),
        tok(rng, "PUNCT", 5, "punct"),
        tok(rng, "X", 0),
    });
  }
  return make_sentence({
      tok(rng, "PUNCT", 2, "punct"),
      tok(rng, p.dep_tag, 5),
      tok(rng, p.head_tag, 5),
      tok(rng, "PUNCT", 5, "punct"),
      tok(rng, "X", 0),
  });
}

Treebank planted_split(Rng& rng, const std::vector<PatternPair>& signal,
                       const std::vector<PatternPair>& noise, int signal_occ,
                       int noise_valid, int noise_invalid) {
  Treebank t;
  for (const PatternPair& p : signal)
    for (int i = 0; i < signal_occ; ++i) t.sentences.push_back(signal_sentence(rng, p));
  for (const PatternPair& p : noise) {
    for (int i = 0; i < noise_valid; ++i) t.sentences.push_back(noise_sentence(rng, p, true));
    for (int i = 0; i < noise_invalid; ++i) t.sentences.push_back(noise_sentence(rng, p, false));
  }
  rng.shuffle(t.sentences);
  return t;
}

}  // namespace

PlantedCorpus make_planted_corpus(const PlantedSpec& spec) {
  static const std::vector<PatternPair> kSignalPool = {
      {"DET", "NOUN"}, {"AUX", "VERB"}, {"ADP", "PROPN"}, {"NUM", "SYM"}, {"ADJ", "PRON"},
  };
  if (spec.n_signal < 1 || spec.n_signal > static_cast<int>(kSignalPool.size()))
    throw std::invalid_argument("make_planted_corpus: n_signal out of range");
  std::vector<PatternPair> signal(kSignalPool.begin(), kSignalPool.begin() + spec.n_signal);
  std::vector<PatternPair> noise;
  for (int i = 1; i <= spec.n_noise; ++i) {
    const std::string id = (i < 10 ? "0" : "") + std::to_string(i);
    noise.push_back({"Q" + id, "R" + id});
  }

  Rng rng(spec.seed);
  PlantedCorpus corpus;
  corpus.train = planted_split(rng, signal, noise, spec.signal_train,
                               spec.noise_valid_train, spec.noise_invalid_train);
  corpus.train.split = "train";
  corpus.dev = planted_split(rng, signal, noise, spec.signal_dev,
                             spec.noise_valid_dev, spec.noise_invalid_dev);
  corpus.dev.split = "dev";
  corpus.candidates = extract_candidate_rules(corpus.train, 5);

  auto index_of = [&corpus](const PatternPair& p) {
    for (std::size_t i = 0; i < corpus.candidates.size(); ++i) {
      const ChunkRule& r = corpus.candidates.rules[i];
      if (r.length() == 2 && r.pos_sequence[0] == p.dep_tag &&
          r.pos_sequence[1] == p.head_tag && r.head_offset == 1)
        return i;
    }
    throw std::runtime_error("make_planted_corpus: planted rule " + p.dep_tag + " " +
                             p.head_tag + " was not extracted");
  };
  for (const PatternPair& p : signal) corpus.signal.push_back(index_of(p));
  for (const PatternPair& p : noise) corpus.noise.push_back(index_of(p));
  return corpus;
}

Treebank make_udlike_corpus(std::uint64_t seed, int n_sentences) {
  Rng rng(seed);
  Treebank t;
  t.sentences.reserve(static_cast<std::size_t>(n_sentences));
  for (int i = 0; i < n_sentences; ++i) {
    switch (static_cast<int>(rng.below(4))) {
      case 0:
        // "The cat has gone ." — subject chunk + auxiliary chunk.
        t.sentences.push_back(make_sentence({
            tok(rng, "DET", 2, "det"),
            tok(rng, "NOUN", 4, "nsubj"),
            tok(rng, "AUX", 4, "aux"),
            tok(rng, "VERB", 0),
            tok(rng, "PUNCT", 4, "punct"),
        }));
        break;
      case 1:
        // "He saw the red house ." — object chunk of three tokens.
        t.sentences.push_back(make_sentence({
            tok(rng, "PRON", 2, "nsubj"),
            tok(rng, "VERB", 0),
            tok(rng, "DET", 5, "det"),
            tok(rng, "ADJ", 5, "amod"),
            tok(rng, "NOUN", 2, "obj"),
            tok(rng, "PUNCT", 2, "punct"),
        }));
        break;
      case 2:
        // "Alice ran in Paris ." — oblique attachment.
        t.sentences.push_back(make_sentence({
            tok(rng, "PROPN", 2, "nsubj"),
            tok(rng, "VERB", 0),
            tok(rng, "ADP", 4, "case"),
            tok(rng, "PROPN", 2, "obl"),
            tok(rng, "PUNCT", 2, "punct"),
        }));
        break;
      default:
        // "The idea was old ." — copular sentence, adjectival root.
        t.sentences.push_back(make_sentence({
            tok(rng, "DET", 2, "det"),
            tok(rng, "NOUN", 4, "nsubj"),
            tok(rng, "AUX", 4, "cop"),
            tok(rng, "ADJ", 0),
            tok(rng, "PUNCT", 4, "punct"),
        }));
        break;
    }
  }
  return t;
}

}  // namespace evochunk::synth
