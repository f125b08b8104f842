#include "evochunk/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "evochunk/annotate.hpp"
#include "evochunk/chunker.hpp"
#include "evochunk/util.hpp"

namespace evochunk {

std::string genome_string(const Genome& g) {
  std::string out(g.size(), '0');
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i]) out[i] = '1';
  }
  return out;
}

Genome parse_genome(const std::string& s) {
  Genome g(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      g[i] = 1;
    } else if (s[i] != '0') {
      throw std::runtime_error("genome strings may contain only 0/1: '" + s + "'");
    }
  }
  return g;
}

int genome_popcount(const Genome& g) {
  int count = 0;
  for (std::uint8_t bit : g) count += bit ? 1 : 0;
  return count;
}

void validate_config(const EvolutionConfig& cfg) {
  auto fail = [](const std::string& msg) {
    throw std::runtime_error("evolution config: " + msg);
  };
  if (cfg.population_size < 1) fail("population_size must be >= 1");
  if (cfg.generations < 0) fail("generations must be >= 0");
  if (cfg.k_best < 1 || cfg.k_best > cfg.population_size) {
    fail("k_best must be in [1, population_size]");
  }
  auto probability = [&](double p, const char* name) {
    if (p < 0.0 || p > 1.0) fail(std::string(name) + " must be in [0, 1]");
  };
  probability(cfg.p_mutate, "p_mutate");
  probability(cfg.p_mutate_gene, "p_mutate_gene");
  probability(cfg.p_crossover, "p_crossover");
  if (cfg.decay < 0.0) fail("decay must be >= 0");
  if (cfg.crossover_points < 1) fail("crossover_points must be >= 1");
}

EvolutionConfig load_evolution_config(std::istream& in) {
  EvolutionConfig cfg;
  for (const auto& [key, value] : parse_key_values(in)) {
    bool ok = true;
    if (key == "population_size") ok = parse_int(value, cfg.population_size);
    else if (key == "generations") ok = parse_int(value, cfg.generations);
    else if (key == "k_best") ok = parse_int(value, cfg.k_best);
    else if (key == "p_mutate") ok = parse_double(value, cfg.p_mutate);
    else if (key == "p_mutate_gene") ok = parse_double(value, cfg.p_mutate_gene);
    else if (key == "p_crossover") ok = parse_double(value, cfg.p_crossover);
    else if (key == "decay") ok = parse_double(value, cfg.decay);
    else if (key == "crossover_points") ok = parse_int(value, cfg.crossover_points);
    else if (key == "w_f1") ok = parse_double(value, cfg.w_f1);
    else if (key == "w_r") ok = parse_double(value, cfg.w_r);
    else if (key == "seed") {
      int seed = 0;
      ok = parse_int(value, seed) && seed >= 0;
      cfg.seed = static_cast<std::uint64_t>(seed);
    } else {
      throw std::runtime_error("evolution config: unknown key '" + key + "'");
    }
    if (!ok) {
      throw std::runtime_error("evolution config: bad value for '" + key + "': '" +
                               value + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

EvolutionConfig load_evolution_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return load_evolution_config(in);
}

void save_evolution_config(const EvolutionConfig& cfg, std::ostream& out) {
  out << "population_size = " << cfg.population_size << "\n";
  out << "generations = " << cfg.generations << "\n";
  out << "k_best = " << cfg.k_best << "\n";
  out << "p_mutate = " << cfg.p_mutate << "\n";
  out << "p_mutate_gene = " << cfg.p_mutate_gene << "\n";
  out << "p_crossover = " << cfg.p_crossover << "\n";
  out << "decay = " << cfg.decay << "\n";
  out << "crossover_points = " << cfg.crossover_points << "\n";
  out << "w_f1 = " << cfg.w_f1 << "\n";
  out << "w_r = " << cfg.w_r << "\n";
  out << "seed = " << cfg.seed << "\n";
}

bool Archive::add(Individual ind) {
  std::string key = genome_string(ind.genome);
  auto [it, inserted] = index_.emplace(std::move(key), records_.size());
  if (!inserted) return false;
  records_.push_back(std::move(ind));
  return true;
}

bool Archive::contains(const Genome& g) const {
  return index_.count(genome_string(g)) > 0;
}

const Individual* Archive::best() const {
  const Individual* best = nullptr;
  for (const Individual& ind : records_) {
    if (!best || ind.fitness > best->fitness) best = &ind;
  }
  return best;
}

void Archive::save(std::ostream& out) const {
  for (const Individual& ind : records_) {
    nlohmann::json j;
    j["generation"] = ind.generation;
    j["genome"] = genome_string(ind.genome);
    j["f1"] = ind.f1;
    j["r_prop"] = ind.r_prop;
    j["fitness"] = ind.fitness;
    out << j.dump() << "\n";
  }
}

void Archive::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write archive: " + path);
  save(out);
}

Archive Archive::load(std::istream& in) {
  Archive archive;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("archive line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    Individual ind;
    try {
      ind.generation = j.at("generation").get<int>();
      ind.genome = parse_genome(j.at("genome").get<std::string>());
      ind.f1 = j.at("f1").get<double>();
      ind.r_prop = j.at("r_prop").get<double>();
      ind.fitness = j.at("fitness").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("archive line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    archive.add(std::move(ind));
  }
  return archive;
}

Archive Archive::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open archive: " + path);
  return load(in);
}

std::vector<Genome> init_population(int n_genes, const EvolutionConfig& cfg,
                                    Rng& rng) {
  if (n_genes < 1) throw std::invalid_argument("init_population: n_genes must be >= 1");
  std::vector<Genome> population(static_cast<std::size_t>(cfg.population_size));
  for (Genome& g : population) {
    g.resize(static_cast<std::size_t>(n_genes));
    for (std::uint8_t& bit : g) bit = rng.uniform01() < 0.5 ? 1 : 0;
  }
  return population;
}

std::vector<std::size_t> k_best_indices(const std::vector<Individual>& population,
                                        int k) {
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (population[a].fitness != population[b].fitness) {
      return population[a].fitness > population[b].fitness;
    }
    return genome_popcount(population[a].genome) < genome_popcount(population[b].genome);
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

std::vector<Genome> replicate_parents(const std::vector<Genome>& parents, int size) {
  if (parents.empty()) throw std::invalid_argument("replicate_parents: no parents");
  std::vector<Genome> offspring;
  offspring.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    offspring.push_back(parents[static_cast<std::size_t>(i) % parents.size()]);
  }
  return offspring;
}

void crossover_at(Genome& a, Genome& b, int kappa) {
  crossover_at(a, b, std::vector<int>{kappa});
}

void crossover_at(Genome& a, Genome& b, const std::vector<int>& cuts) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: length mismatch");
  const int n = static_cast<int>(a.size());
  for (int cut : cuts) {
    if (cut < 1 || cut >= n) throw std::invalid_argument("crossover: cut out of range");
  }
  std::vector<int> sorted = cuts;
  std::sort(sorted.begin(), sorted.end());
  // Swap alternating segments starting with [0, cuts[0]): single-point thus
  // yields offspring1 = b[0..k)+a[k..), offspring2 = a[0..k)+b[k..).
  bool swap_segment = true;
  int pos = 0;
  for (std::size_t s = 0; s <= sorted.size(); ++s) {
    const int end = s < sorted.size() ? sorted[s] : n;
    if (swap_segment) {
      for (int i = pos; i < end; ++i) std::swap(a[static_cast<std::size_t>(i)],
                                                b[static_cast<std::size_t>(i)]);
    }
    swap_segment = !swap_segment;
    pos = end;
  }
}

std::pair<Genome, Genome> crossover_single_point(const Genome& a, const Genome& b,
                                                 Rng& rng) {
  return crossover_k_point(a, b, 1, rng);
}

std::pair<Genome, Genome> crossover_k_point(const Genome& a, const Genome& b,
                                            int points, Rng& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: length mismatch");
  std::pair<Genome, Genome> out{a, b};
  const int n = static_cast<int>(a.size());
  if (n < 2) return out;  // no interior cut point: no-op
  std::vector<int> cuts;
  if (points >= n - 1) {
    cuts.resize(static_cast<std::size_t>(n - 1));
    std::iota(cuts.begin(), cuts.end(), 1);
  } else {
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < points) {
      chosen.insert(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1))));
    }
    cuts.assign(chosen.begin(), chosen.end());
  }
  crossover_at(out.first, out.second, cuts);
  return out;
}

Genome mutate(const Genome& g, double p_gene, Rng& rng) {
  Genome out = g;
  mutate_in_place(out, p_gene, rng);
  return out;
}

void mutate_in_place(Genome& g, double p_gene, Rng& rng) {
  for (std::uint8_t& bit : g) {
    if (rng.uniform01() < p_gene) bit = bit ? 0 : 1;
  }
}

void write_progress(const std::vector<GenerationLog>& progress, std::ostream& out) {
  out << "generation\tmean_fitness\tmax_fitness\tmean_f1\tmean_r_prop\n";
  char buf[192];
  for (const GenerationLog& log : progress) {
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.6f\t%.6f\t%.6f\n", log.generation,
                  log.mean_fitness, log.max_fitness, log.mean_f1, log.mean_r_prop);
    out << buf;
  }
}

namespace {

struct EvalTask {
  std::string key;
  const Genome* genome;
  std::uint64_t seed;
};

// Evaluates one generation's genomes: each distinct uncached genome is
// evaluated exactly once, seeded by its lowest slot index, so the archive is
// bit-identical for any thread count.
std::vector<Individual> evaluate_population(
    const std::vector<Genome>& genomes, int generation, const EvolutionConfig& cfg,
    const GenomeEvaluator& evaluate, int jobs,
    std::unordered_map<std::string, EvalResult>& cache) {
  std::vector<EvalTask> tasks;
  {
    std::set<std::string> queued;
    for (std::size_t slot = 0; slot < genomes.size(); ++slot) {
      std::string key = genome_string(genomes[slot]);
      if (cache.count(key) || queued.count(key)) continue;
      queued.insert(key);
      tasks.push_back(EvalTask{std::move(key), &genomes[slot],
                               Rng::mix(cfg.seed, static_cast<std::uint64_t>(generation),
                                        static_cast<std::uint64_t>(slot))});
    }
  }

  std::vector<EvalResult> results(tasks.size());
  if (jobs <= 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      results[i] = evaluate(*tasks[i].genome, tasks[i].seed);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          results[i] = evaluate(*tasks[i].genome, tasks[i].seed);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) cache[tasks[i].key] = results[i];

  std::vector<Individual> population;
  population.reserve(genomes.size());
  for (const Genome& g : genomes) {
    const EvalResult res = cache.at(genome_string(g));
    Individual ind;
    ind.genome = g;
    ind.f1 = res.f1;
    ind.r_prop = res.r_prop;
    ind.fitness = cfg.w_f1 * res.f1 + cfg.w_r * res.r_prop;
    ind.generation = generation;
    population.push_back(std::move(ind));
  }
  return population;
}

GenerationLog log_generation(int generation, const std::vector<Individual>& population) {
  GenerationLog log;
  log.generation = generation;
  for (const Individual& ind : population) {
    log.mean_fitness += ind.fitness;
    log.mean_f1 += ind.f1;
    log.mean_r_prop += ind.r_prop;
    log.max_fitness = std::max(log.max_fitness, ind.fitness);
  }
  if (!population.empty()) {
    const double n = static_cast<double>(population.size());
    log.mean_fitness /= n;
    log.mean_f1 /= n;
    log.mean_r_prop /= n;
  }
  return log;
}

}  // namespace

EvolveResult evolve(const GenomeEvaluator& evaluate, int n_genes,
                    const EvolutionConfig& cfg, int jobs,
                    const GenerationCallback& on_generation) {
  validate_config(cfg);
  EvolveResult result;
  Rng master(cfg.seed);
  std::unordered_map<std::string, EvalResult> cache;

  std::vector<Genome> genomes = init_population(n_genes, cfg, master);
  std::vector<Individual> population =
      evaluate_population(genomes, 0, cfg, evaluate, jobs, cache);
  for (const Individual& ind : population) result.archive.add(ind);
  result.progress.push_back(log_generation(0, population));
  if (on_generation) on_generation(result.progress.back());

  double p_mutate = cfg.p_mutate;
  double p_crossover = cfg.p_crossover;
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Genome> parents;
    for (std::size_t idx : k_best_indices(population, cfg.k_best)) {
      parents.push_back(population[idx].genome);
    }
    std::vector<Genome> offspring = replicate_parents(parents, cfg.population_size);
    for (std::size_t i = 0; i + 1 < offspring.size(); i += 2) {
      if (master.uniform01() < p_crossover) {
        auto pair = crossover_k_point(offspring[i], offspring[i + 1],
                                      cfg.crossover_points, master);
        offspring[i] = std::move(pair.first);
        offspring[i + 1] = std::move(pair.second);
      }
    }
    for (Genome& g : offspring) {
      if (master.uniform01() < p_mutate) mutate_in_place(g, cfg.p_mutate_gene, master);
    }
    population = evaluate_population(offspring, gen, cfg, evaluate, jobs, cache);
    for (const Individual& ind : population) result.archive.add(ind);
    result.progress.push_back(log_generation(gen, population));
    if (on_generation) on_generation(result.progress.back());
    p_mutate = std::max(0.0, p_mutate - cfg.decay);
    p_crossover = std::max(0.0, p_crossover - cfg.decay);
  }

  result.final_population = std::move(population);
  if (const Individual* best = result.archive.best()) result.best = *best;
  return result;
}

GenomeEvaluator make_chunker_evaluator(const RuleSet& candidates,
                                       const Treebank& train, const Treebank& dev,
                                       const EvolutionConfig& /*cfg*/) {
  // r_all is fixed for the run; compression_proportion rejects r_all <= 1.
  const double r_all =
      compression_stats(dev, annotate_treebank(dev, candidates, MatchMode::kTreeValidated))
          .rate();
  compression_proportion(r_all, r_all);

  return [&candidates, &train, &dev, r_all](const Genome& g,
                                            std::uint64_t seed) -> EvalResult {
    if (g.size() != candidates.size()) {
      throw std::invalid_argument("genome length does not match candidate ruleset");
    }
    EvalResult res;
    if (genome_popcount(g) == 0) return res;

    const RuleSet subset = candidates.subset(g);
    const auto train_gold = annotate_treebank(train, subset, MatchMode::kTreeValidated);
    long long train_chunks = 0;
    for (const ChunkLabeling& labeling : train_gold) {
      train_chunks += static_cast<long long>(labeling.spans.size());
    }
    if (train_chunks == 0) return res;  // degenerate subset: fitness 0, no training

    const auto dev_gold = annotate_treebank(dev, subset, MatchMode::kTreeValidated);
    ChunkerOptions opts;
    opts.seed = seed;
    const Chunker chunker = Chunker::train(train, train_gold, opts, &dev, &dev_gold);
    res.f1 = span_f1(dev_gold, chunker.predict(dev)).f1;
    res.r_prop = compression_proportion(compression_stats(dev, dev_gold).rate(), r_all);
    return res;
  };
}

EvolveResult evolve(const RuleSet& candidates, const Treebank& train,
                    const Treebank& dev, const EvolutionConfig& cfg, int jobs) {
  if (candidates.empty()) {
    throw std::invalid_argument("evolve: candidate ruleset is empty");
  }
  return evolve(make_chunker_evaluator(candidates, train, dev, cfg),
                static_cast<int>(candidates.size()), cfg, jobs);
}

Individual evaluate_genome(const Genome& g, const RuleSet& candidates,
                           const Treebank& train, const Treebank& dev,
                           const EvolutionConfig& cfg, std::uint64_t seed) {
  const EvalResult res = make_chunker_evaluator(candidates, train, dev, cfg)(g, seed);
  Individual ind;
  ind.genome = g;
  ind.f1 = res.f1;
  ind.r_prop = res.r_prop;
  ind.fitness = cfg.w_f1 * res.f1 + cfg.w_r * res.r_prop;
  return ind;
}

RuleSet consensus_ruleset(const Archive& archive, const RuleSet& candidates,
                          int top_n, double threshold) {
  if (top_n < 1) throw std::invalid_argument("consensus: top_n must be >= 1");
  if (threshold < 0.0 || threshold > 1.0) {
    throw std::invalid_argument("consensus: threshold must be in [0, 1]");
  }
  const auto& records = archive.records();
  for (const Individual& ind : records) {
    if (ind.genome.size() != candidates.size()) {
      throw std::runtime_error("consensus: archive genome length " +
                               std::to_string(ind.genome.size()) +
                               " does not match candidate ruleset size " +
                               std::to_string(candidates.size()));
    }
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].fitness != records[b].fitness) {
      return records[a].fitness > records[b].fitness;
    }
    return genome_popcount(records[a].genome) < genome_popcount(records[b].genome);
  });
  std::size_t used = std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_n));
  if (used < static_cast<std::size_t>(top_n)) {
    std::cerr << "warning: archive has only " << used << " distinct genomes (top_n="
              << top_n << "); using all of them\n";
  }
  if (used == 0) return RuleSet{};

  std::vector<long long> counts(candidates.size(), 0);
  for (std::size_t r = 0; r < used; ++r) {
    const Genome& g = records[order[r]].genome;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i]) ++counts[i];
    }
  }
  const double needed = threshold * static_cast<double>(used) - 1e-9;
  std::vector<std::uint8_t> keep(candidates.size(), 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (static_cast<double>(counts[i]) >= needed) keep[i] = 1;
  }
  return candidates.subset(keep);
}

}  // namespace evochunk
