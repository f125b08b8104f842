#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evochunk/chunk_rules.hpp"
#include "evochunk/conllu.hpp"
#include "evochunk/rng.hpp"

namespace evochunk {

// One gene per candidate rule: 1 = rule used, 0 = rule unused.
using Genome = std::vector<std::uint8_t>;

std::string genome_string(const Genome& g);
Genome parse_genome(const std::string& s);
int genome_popcount(const Genome& g);

struct Individual {
  Genome genome;
  double fitness = 0;
  double f1 = 0;
  double r_prop = 0;
  int generation = 0;
};

struct EvolutionConfig {
  int population_size = 100;
  int generations = 4;
  int k_best = 5;
  double p_mutate = 0.5;
  double p_mutate_gene = 0.05;
  double p_crossover = 0.5;
  double decay = 0.1;  // subtracted from p_mutate/p_crossover per generation
  int crossover_points = 1;
  double w_f1 = 1.0;
  double w_r = 0.5;
  std::uint64_t seed = 0;
};

void validate_config(const EvolutionConfig& cfg);
EvolutionConfig load_evolution_config(std::istream& in);
EvolutionConfig load_evolution_config_file(const std::string& path);
void save_evolution_config(const EvolutionConfig& cfg, std::ostream& out);

// Every evaluated individual across all generations, deduplicated by genome
// (first evaluation wins; repeat evaluations reuse the cached result anyway).
class Archive {
 public:
  bool add(Individual ind);  // false if the genome was already present
  const std::vector<Individual>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool contains(const Genome& g) const;
  const Individual* best() const;  // highest fitness; earliest on ties

  void save(std::ostream& out) const;  // one JSON record per line
  void save_file(const std::string& path) const;
  static Archive load(std::istream& in);
  static Archive load_file(const std::string& path);

 private:
  std::vector<Individual> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<Genome> init_population(int n_genes, const EvolutionConfig& cfg, Rng& rng);

// Indices of the k best individuals, ordered fitness desc, then lower
// popcount, then insertion order.
std::vector<std::size_t> k_best_indices(const std::vector<Individual>& population,
                                        int k);

// Cyclic replication of the parents up to `size` clones.
std::vector<Genome> replicate_parents(const std::vector<Genome>& parents,
                                      int size);

// Swap the prefix [0, kappa) between the pair: offspring1 = b[0..k)+a[k..),
// offspring2 = a[0..k)+b[k..). Deterministic core used by the rng overloads.
void crossover_at(Genome& a, Genome& b, int kappa);
void crossover_at(Genome& a, Genome& b, const std::vector<int>& cuts);

std::pair<Genome, Genome> crossover_single_point(const Genome& a, const Genome& b,
                                                 Rng& rng);
std::pair<Genome, Genome> crossover_k_point(const Genome& a, const Genome& b,
                                            int points, Rng& rng);

// Each bit flipped independently with probability p_gene.
Genome mutate(const Genome& g, double p_gene, Rng& rng);
void mutate_in_place(Genome& g, double p_gene, Rng& rng);

// Fitness components for one genome; fitness = w_f1 * f1 + w_r * r_prop.
struct EvalResult {
  double f1 = 0;
  double r_prop = 0;
};

// Pluggable fitness backend. `seed` derives from (config seed, generation,
// slot) so results do not depend on evaluation order or thread count.
using GenomeEvaluator = std::function<EvalResult(const Genome&, std::uint64_t seed)>;

struct GenerationLog {
  int generation = 0;
  double mean_fitness = 0;
  double max_fitness = 0;
  double mean_f1 = 0;
  double mean_r_prop = 0;
};

void write_progress(const std::vector<GenerationLog>& progress, std::ostream& out);

struct EvolveResult {
  Archive archive;
  std::vector<Individual> final_population;
  std::vector<GenerationLog> progress;
  Individual best;
};

using GenerationCallback = std::function<void(const GenerationLog&)>;

EvolveResult evolve(const GenomeEvaluator& evaluate, int n_genes,
                    const EvolutionConfig& cfg, int jobs = 1,
                    const GenerationCallback& on_generation = nullptr);

// The chunker-backed fitness: annotate with the subset, train a chunker,
// then score F1 on dev plus the compression proportion on dev.
GenomeEvaluator make_chunker_evaluator(const RuleSet& candidates,
                                       const Treebank& train, const Treebank& dev,
                                       const EvolutionConfig& cfg);

EvolveResult evolve(const RuleSet& candidates, const Treebank& train,
                    const Treebank& dev, const EvolutionConfig& cfg, int jobs = 1);

Individual evaluate_genome(const Genome& g, const RuleSet& candidates,
                           const Treebank& train, const Treebank& dev,
                           const EvolutionConfig& cfg, std::uint64_t seed);

// Rules set in at least threshold * top_n of the top_n best distinct genomes.
// Fewer than top_n distinct genomes: all are used and a warning is printed.
RuleSet consensus_ruleset(const Archive& archive, const RuleSet& candidates,
                          int top_n, double threshold);

}  // namespace evochunk
