#include "evochunk/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evochunk/annotate.hpp"
#include "evochunk/chunk_rules.hpp"
#include "evochunk/chunker.hpp"
#include "evochunk/conllu.hpp"
#include "evochunk/dep_encoding.hpp"
#include "evochunk/evolution.hpp"
#include "evochunk/pipeline.hpp"
#include "evochunk/tagger.hpp"
#include "evochunk/util.hpp"

namespace evochunk {

namespace {

// Machine-readable output goes to --out when given, stdout otherwise.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct ExtractOpts {
  std::string train, out;
  long long min_freq = 5;
};

void add_extract(CLI::App& app) {
  auto opts = std::make_shared<ExtractOpts>();
  CLI::App* cmd = app.add_subcommand(
      "extract", "Extract candidate chunk rules from a CoNLL-U treebank "
                 "(output: TSV ruleset, one 'tags<TAB>head_offset<TAB>frequency' per line)");
  cmd->add_option("--train", opts->train, "training treebank (CoNLL-U)")->required();
  cmd->add_option("--min-freq", opts->min_freq, "frequency cut for candidate rules")
      ->check(CLI::PositiveNumber)
      ->default_val(5);
  cmd->add_option("--out", opts->out, "output ruleset path (default: stdout)");
  cmd->callback([opts] {
    const Treebank train = parse_conllu_file(opts->train);
    const RuleSet rules = extract_candidate_rules(train, opts->min_freq);
    OutputTarget out(opts->out);
    save_ruleset(rules, out.stream());
    std::cerr << "extracted " << rules.size() << " rules from " << train.size()
              << " sentences\n";
  });
}

struct AnnotateOpts {
  std::string in, rules, out;
  std::string mode = "tree";
};

void add_annotate(CLI::App& app) {
  auto opts = std::make_shared<AnnotateOpts>();
  CLI::App* cmd = app.add_subcommand(
      "annotate", "Apply a ruleset to a treebank, writing IOB chunk tags into "
                  "MISC as Chunk=B-<POS>/I-<POS> (output: CoNLL-U)");
  cmd->add_option("--in", opts->in, "input treebank (CoNLL-U)")->required();
  cmd->add_option("--rules", opts->rules, "ruleset file (TSV)")->required();
  cmd->add_option("--mode", opts->mode, "matching mode: tree (validate against the "
                                        "gold tree) or pattern (POS match only)")
      ->check(CLI::IsMember({"tree", "pattern"}))
      ->default_val("tree");
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    const Treebank t = parse_conllu_file(opts->in);
    const RuleSet rules = load_ruleset_file(opts->rules);
    const auto labelings = annotate_treebank(t, rules, parse_match_mode(opts->mode));
    const MiscAnnotations misc = chunk_misc_annotations(labelings);
    OutputTarget out(opts->out);
    write_conllu(t, out.stream(), &misc);
  });
}

struct StatsOpts {
  std::string in, rules, out;
  std::string mode = "tree";
};

void add_stats(CLI::App& app) {
  auto opts = std::make_shared<StatsOpts>();
  CLI::App* cmd = app.add_subcommand(
      "stats", "Chunk and compression statistics for a ruleset over a treebank "
               "(output: key=value block plus per-rule match counts)");
  cmd->add_option("--in", opts->in, "input treebank (CoNLL-U)")->required();
  cmd->add_option("--rules", opts->rules, "ruleset file (TSV)")->required();
  cmd->add_option("--mode", opts->mode, "matching mode: tree or pattern")
      ->check(CLI::IsMember({"tree", "pattern"}))
      ->default_val("tree");
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    const Treebank t = parse_conllu_file(opts->in);
    const RuleSet rules = load_ruleset_file(opts->rules);
    const auto labelings = annotate_treebank(t, rules, parse_match_mode(opts->mode));
    const ChunkStatsReport report = chunk_stats(t, rules, labelings);
    OutputTarget out(opts->out);
    write_chunk_stats(report, rules, out.stream());
  });
}

struct EvolveOpts {
  std::string rules, train, dev, config, archive, progress;
  std::int64_t seed = -1;
  int generations = -1;
  int population = -1;
  int jobs = 1;
};

void add_evolve(CLI::App& app) {
  auto opts = std::make_shared<EvolveOpts>();
  CLI::App* cmd = app.add_subcommand(
      "evolve", "Evolve rule subsets by genetic search (fitness F1 + 0.5*r%); "
                "writes a JSONL archive of evaluated genomes");
  cmd->add_option("--rules", opts->rules, "candidate ruleset (TSV)")->required();
  cmd->add_option("--train", opts->train, "training treebank (CoNLL-U)")->required();
  cmd->add_option("--dev", opts->dev, "development treebank (CoNLL-U)")->required();
  cmd->add_option("--config", opts->config,
                  "evolution config (key=value; sensible defaults built in)");
  cmd->add_option("--archive", opts->archive, "output archive (JSONL)")->required();
  cmd->add_option("--progress", opts->progress, "per-generation progress log (TSV)");
  cmd->add_option("--seed", opts->seed, "override the config seed")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--generations", opts->generations, "override config generations")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--population", opts->population, "override config population size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", opts->jobs, "parallel fitness evaluations "
                                        "(bit-identical to --jobs 1)")
      ->check(CLI::PositiveNumber)
      ->default_val(1);
  cmd->callback([opts] {
    const RuleSet rules = load_ruleset_file(opts->rules);
    const Treebank train = parse_conllu_file(opts->train);
    const Treebank dev = parse_conllu_file(opts->dev);
    EvolutionConfig cfg;
    if (!opts->config.empty()) cfg = load_evolution_config_file(opts->config);
    if (opts->seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts->seed);
    if (opts->generations >= 0) cfg.generations = opts->generations;
    if (opts->population > 0) cfg.population_size = opts->population;
    validate_config(cfg);

    const GenomeEvaluator evaluate = make_chunker_evaluator(rules, train, dev, cfg);
    const EvolveResult result =
        evolve(evaluate, static_cast<int>(rules.size()), cfg, opts->jobs,
               [](const GenerationLog& log) {
                 std::cerr << "generation " << log.generation << ": mean fitness "
                           << log.mean_fitness << ", max fitness " << log.max_fitness
                           << "\n";
               });
    result.archive.save_file(opts->archive);
    if (!opts->progress.empty()) {
      std::ofstream progress(opts->progress, std::ios::binary);
      if (!progress) throw std::runtime_error("cannot write file: " + opts->progress);
      write_progress(result.progress, progress);
    }
    std::cerr << "archive: " << result.archive.size() << " distinct genomes; best fitness "
              << result.best.fitness << " (f1 " << result.best.f1 << ", r% "
              << result.best.r_prop << ")\n";
  });
}

struct ConsensusOpts {
  std::string archive, rules, out;
  int top = 100;
  double threshold = 0.75;
};

void add_consensus(CLI::App& app) {
  auto opts = std::make_shared<ConsensusOpts>();
  CLI::App* cmd = app.add_subcommand(
      "consensus", "Extract the consensus ruleset from an evolve archive: rules "
                   "set in at least threshold*top of the top distinct genomes");
  cmd->add_option("--archive", opts->archive, "archive file (JSONL)")->required();
  cmd->add_option("--rules", opts->rules, "candidate ruleset the genomes index (TSV)")
      ->required();
  cmd->add_option("--top", opts->top, "how many best genomes vote")
      ->check(CLI::PositiveNumber)
      ->default_val(100);
  cmd->add_option("--threshold", opts->threshold, "required vote fraction (e.g. 0.75)")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  cmd->add_option("--out", opts->out, "output ruleset path (default: stdout)");
  cmd->callback([opts] {
    const Archive archive = Archive::load_file(opts->archive);
    const RuleSet rules = load_ruleset_file(opts->rules);
    const RuleSet consensus =
        consensus_ruleset(archive, rules, opts->top, opts->threshold);
    OutputTarget out(opts->out);
    save_ruleset(consensus, out.stream());
    std::cerr << "consensus: " << consensus.size() << " of " << rules.size()
              << " rules\n";
  });
}

struct TrainChunkerOpts {
  std::string train, rules, dev, out;
  std::string mode = "tree";
  int epochs = 5;
  std::uint64_t seed = 0;
};

void add_train_chunker(CLI::App& app) {
  auto opts = std::make_shared<TrainChunkerOpts>();
  CLI::App* cmd = app.add_subcommand(
      "train-chunker", "Train the statistical IOB chunker on a ruleset's "
                       "annotation of a treebank (output: model file)");
  cmd->add_option("--train", opts->train, "training treebank (CoNLL-U)")->required();
  cmd->add_option("--rules", opts->rules, "ruleset file (TSV)")->required();
  cmd->add_option("--dev", opts->dev, "development treebank for best-epoch selection");
  cmd->add_option("--mode", opts->mode, "annotation mode: tree or pattern")
      ->check(CLI::IsMember({"tree", "pattern"}))
      ->default_val("tree");
  cmd->add_option("--epochs", opts->epochs, "training epochs")
      ->check(CLI::PositiveNumber)
      ->default_val(5);
  cmd->add_option("--seed", opts->seed, "shuffle seed");
  cmd->add_option("--out", opts->out, "output model path")->required();
  cmd->callback([opts] {
    const Treebank train = parse_conllu_file(opts->train);
    const RuleSet rules = load_ruleset_file(opts->rules);
    const MatchMode mode = parse_match_mode(opts->mode);
    const auto gold = annotate_treebank(train, rules, mode);
    ChunkerOptions chunker_opts;
    chunker_opts.epochs = opts->epochs;
    chunker_opts.seed = opts->seed;

    Chunker chunker = [&] {
      if (opts->dev.empty()) return Chunker::train(train, gold, chunker_opts);
      const Treebank dev = parse_conllu_file(opts->dev);
      const auto dev_gold = annotate_treebank(dev, rules, mode);
      Chunker trained = Chunker::train(train, gold, chunker_opts, &dev, &dev_gold);
      std::cerr << "best epoch " << trained.best_epoch() << ", dev F1 "
                << span_f1(dev_gold, trained.predict(dev)).f1 << "\n";
      return trained;
    }();
    chunker.save_file(opts->out);
  });
}

struct ChunkOpts {
  std::string model, in, out;
};

void add_chunk(CLI::App& app) {
  auto opts = std::make_shared<ChunkOpts>();
  CLI::App* cmd = app.add_subcommand(
      "chunk", "Predict chunks with a trained chunker model, writing "
               "Chunk= tags into MISC (output: CoNLL-U)");
  cmd->add_option("--model", opts->model, "chunker model file")->required();
  cmd->add_option("--in", opts->in, "input treebank (CoNLL-U)")->required();
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    const Chunker chunker = Chunker::load_file(opts->model);
    const Treebank t = parse_conllu_file(opts->in);
    const MiscAnnotations misc = chunk_misc_annotations(chunker.predict(t));
    OutputTarget out(opts->out);
    write_conllu(t, out.stream(), &misc);
  });
}

struct EncodeDepsOpts {
  std::string in, out;
  std::string format = "tsv";
};

void add_encode_deps(CLI::App& app) {
  auto opts = std::make_shared<EncodeDepsOpts>();
  CLI::App* cmd = app.add_subcommand(
      "encode-deps", "Encode gold dependency trees as per-token labels "
                     "'<offset>,<relation>,<head_pos>' (root: '0,<rel>,ROOT')");
  cmd->add_option("--in", opts->in, "input treebank (CoNLL-U, valid trees)")->required();
  cmd->add_option("--format", opts->format,
                  "tsv: one label per line, blank line between sentences; "
                  "misc: CoNLL-U with DepLabel= in MISC")
      ->check(CLI::IsMember({"tsv", "misc"}))
      ->default_val("tsv");
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    const Treebank t = parse_conllu_file(opts->in);
    std::vector<std::vector<DepLabel>> encoded;
    encoded.reserve(t.sentences.size());
    for (std::size_t i = 0; i < t.sentences.size(); ++i) {
      try {
        encoded.push_back(encode_dependencies(t.sentences[i]));
      } catch (const std::exception& e) {
        throw std::runtime_error("sentence " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    OutputTarget out(opts->out);
    if (opts->format == "tsv") {
      for (const auto& labels : encoded) {
        for (const DepLabel& label : labels) out.stream() << dep_label_string(label) << "\n";
        out.stream() << "\n";
      }
    } else {
      MiscAnnotations misc(encoded.size());
      for (std::size_t i = 0; i < encoded.size(); ++i) {
        misc[i].reserve(encoded[i].size());
        for (const DepLabel& label : encoded[i]) {
          misc[i].push_back("DepLabel=" + dep_label_string(label));
        }
      }
      write_conllu(t, out.stream(), &misc);
    }
  });
}

struct DecodeDepsOpts {
  std::string in, labels, out;
  bool from_misc = false;
};

std::vector<std::vector<std::string>> read_label_sidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(stripped);
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

void add_decode_deps(CLI::App& app) {
  auto opts = std::make_shared<DecodeDepsOpts>();
  CLI::App* cmd = app.add_subcommand(
      "decode-deps", "Decode per-token dependency labels back into HEAD/DEPREL "
                     "against the input's POS column (output: CoNLL-U)");
  cmd->add_option("--in", opts->in, "input treebank (CoNLL-U; POS used for decoding)")
      ->required();
  CLI::Option* labels_opt =
      cmd->add_option("--labels", opts->labels, "label sidecar (encode-deps tsv format)");
  CLI::Option* misc_opt =
      cmd->add_flag("--from-misc", opts->from_misc, "read DepLabel= from MISC instead");
  labels_opt->excludes(misc_opt);
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    if (opts->labels.empty() && !opts->from_misc)
      throw CLI::ValidationError("decode-deps", "need --labels or --from-misc");
    Treebank t = parse_conllu_file(opts->in);

    std::vector<std::vector<std::string>> raw;
    if (opts->from_misc) {
      raw.reserve(t.sentences.size());
      for (const Sentence& s : t.sentences) {
        std::vector<std::string> labels;
        labels.reserve(s.tokens.size());
        for (const Token& tok : s.tokens) {
          const std::string value = misc_value(tok.misc, "DepLabel");
          if (value.empty()) {
            throw std::runtime_error("sentence '" + s.sent_id + "' token " +
                                     std::to_string(tok.id) + ": no DepLabel in MISC");
          }
          labels.push_back(value);
        }
        raw.push_back(std::move(labels));
      }
    } else {
      raw = read_label_sidecar(opts->labels);
      if (raw.size() != t.sentences.size()) {
        throw std::runtime_error("label sidecar has " + std::to_string(raw.size()) +
                                 " sentences, treebank has " +
                                 std::to_string(t.sentences.size()));
      }
    }

    for (std::size_t i = 0; i < t.sentences.size(); ++i) {
      Sentence& s = t.sentences[i];
      if (raw[i].size() != s.tokens.size()) {
        throw std::runtime_error("sentence " + std::to_string(i + 1) + ": " +
                                 std::to_string(raw[i].size()) + " labels for " +
                                 std::to_string(s.tokens.size()) + " tokens");
      }
      std::vector<DepLabel> labels;
      std::vector<std::string> upos;
      labels.reserve(raw[i].size());
      upos.reserve(raw[i].size());
      for (const Token& tok : s.tokens) upos.push_back(tok.upos);
      for (const std::string& text : raw[i]) labels.push_back(parse_dep_label(text));
      std::vector<int> heads;
      std::vector<std::string> deprels;
      decode_dependencies(upos, labels, heads, deprels);
      for (int j = 0; j < s.size(); ++j) {
        s.tokens[static_cast<std::size_t>(j)].head = heads[static_cast<std::size_t>(j)];
        s.tokens[static_cast<std::size_t>(j)].deprel = deprels[static_cast<std::size_t>(j)];
      }
    }
    OutputTarget out(opts->out);
    write_conllu(t, out.stream());
  });
}

struct TrainTaggerOpts {
  std::string task, train, dev, eval, out;
  int epochs = 10;
  std::uint64_t seed = 0;
};

void add_train_tagger(CLI::App& app) {
  auto opts = std::make_shared<TrainTaggerOpts>();
  CLI::App* cmd = app.add_subcommand(
      "train-tagger", "Train a POS or morphological-features tagger "
                      "(output: model file; optional accuracy line on stdout)");
  cmd->add_option("--task", opts->task, "pos or feats")
      ->check(CLI::IsMember({"pos", "feats"}))
      ->required();
  cmd->add_option("--train", opts->train, "training treebank (CoNLL-U)")->required();
  cmd->add_option("--dev", opts->dev, "development treebank for best-epoch selection");
  cmd->add_option("--eval", opts->eval, "treebank to report accuracy on");
  cmd->add_option("--epochs", opts->epochs, "training epochs")
      ->check(CLI::PositiveNumber)
      ->default_val(10);
  cmd->add_option("--seed", opts->seed, "shuffle seed");
  cmd->add_option("--out", opts->out, "output model path")->required();
  cmd->callback([opts] {
    const TagTask task = parse_tag_task(opts->task);
    const Treebank train = parse_conllu_file(opts->train);
    TaggerOptions tagger_opts;
    tagger_opts.epochs = opts->epochs;
    tagger_opts.seed = opts->seed;

    Tagger tagger = [&] {
      if (opts->dev.empty()) return Tagger::train(task, train, tagger_opts);
      const Treebank dev = parse_conllu_file(opts->dev);
      Tagger trained = Tagger::train(task, train, tagger_opts, &dev);
      std::cerr << "best epoch " << trained.best_epoch() << ", dev accuracy "
                << trained.accuracy(dev) << "\n";
      return trained;
    }();
    tagger.save_file(opts->out);
    if (!opts->eval.empty()) {
      const Treebank eval = parse_conllu_file(opts->eval);
      char buf[64];
      std::snprintf(buf, sizeof buf, "accuracy\t%.4f\n", tagger.accuracy(eval));
      std::cout << buf;
    }
  });
}

struct ExperimentOpts {
  std::string config, out;
  std::string format = "text";
  std::int64_t seed = -1;
};

void add_experiment(CLI::App& app) {
  auto opts = std::make_shared<ExperimentOpts>();
  CLI::App* cmd = app.add_subcommand(
      "experiment", "Run the experiment pipeline from a key=value config: "
                    "taggers, chunker, dependency-labeler ablations, report");
  cmd->add_option("--config", opts->config, "experiment config (key=value)")->required();
  cmd->add_option("--format", opts->format, "report format")
      ->check(CLI::IsMember({"text", "tsv"}))
      ->default_val("text");
  cmd->add_option("--seed", opts->seed, "override the config seed")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    ExperimentConfig cfg = load_experiment_config_file(opts->config);
    if (opts->seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts->seed);
    const ExperimentReport report = run_experiment(cfg);
    OutputTarget out(opts->out);
    emit_report(report, parse_report_format(opts->format), out.stream());
    std::cerr << "experiment finished in " << report.wall_clock_seconds << " s\n";
  });
}

struct ReportOpts {
  std::string in, out;
  std::string format = "text";
};

void add_report(CLI::App& app) {
  auto opts = std::make_shared<ReportOpts>();
  CLI::App* cmd = app.add_subcommand(
      "report", "Re-render a saved TSV report (e.g. as readable text)");
  cmd->add_option("--in", opts->in, "report file (tsv)")->required();
  cmd->add_option("--format", opts->format, "output format")
      ->check(CLI::IsMember({"text", "tsv"}))
      ->default_val("text");
  cmd->add_option("--out", opts->out, "output path (default: stdout)");
  cmd->callback([opts] {
    std::ifstream in(opts->in, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + opts->in);
    const ExperimentReport report = parse_report_tsv(in);
    OutputTarget out(opts->out);
    emit_report(report, parse_report_format(opts->format), out.stream());
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"evochunk: chunk-rule extraction, evolutionary rule-subset search, "
               "statistical chunking and dependency-as-labeling over CoNLL-U treebanks"};
  app.require_subcommand(1);
  app.footer("File formats: treebanks are CoNLL-U; rulesets are TSV "
             "(tags<TAB>head_offset<TAB>frequency); archives are JSONL; configs are "
             "flat key=value files. Machine-readable output goes to stdout or --out; "
             "logs go to stderr.");

  add_extract(app);
  add_annotate(app);
  add_stats(app);
  add_evolve(app);
  add_consensus(app);
  add_train_chunker(app);
  add_chunk(app);
  add_encode_deps(app);
  add_decode_deps(app);
  add_train_tagger(app);
  add_experiment(app);
  add_report(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace evochunk
