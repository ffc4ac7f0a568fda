#include "psnf/ga.hpp"

#include <algorithm>
#include <stdexcept>

namespace psnf {

void GaConfig::validate() const {
    if (population_size < 2) throw std::invalid_argument("population needs at least 2 individuals");
    if (tournament_size < 1 || tournament_size > population_size) {
        throw std::invalid_argument("tournament size must be in [1, population_size]");
    }
    if (crossover_prob < 0.0 || crossover_prob > 1.0 || mutation_prob < 0.0 ||
        mutation_prob > 1.0) {
        throw std::invalid_argument("operator probabilities must be in [0, 1]");
    }
    if (!(gene_min < gene_max)) throw std::invalid_argument("empty gene bounds");
    if (generations < 1) throw std::invalid_argument("need at least one generation");
    if (stall_limit < 1) throw std::invalid_argument("stall limit must be positive");
}

namespace {

double clamp_gene(const GaConfig& cfg, double v) {
    return std::clamp(v, cfg.gene_min, cfg.gene_max);
}

// Index of the fittest individual; ties go to the lowest index.
std::size_t best_index(const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness < pop[best].fitness) best = i;
    }
    return best;
}

std::size_t worst_index(const std::vector<Individual>& pop) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness > pop[worst].fitness) worst = i;
    }
    return worst;
}

// K uniform draws with replacement; winner is the lowest cost, ties broken
// by the lowest population index.
std::size_t tournament(const std::vector<Individual>& pop, int k, Rng& rng) {
    std::size_t winner = pop.size();
    for (int i = 0; i < k; ++i) {
        const std::size_t cand = static_cast<std::size_t>(rng.below(pop.size()));
        if (winner == pop.size() || pop[cand].fitness < pop[winner].fitness ||
            (pop[cand].fitness == pop[winner].fitness && cand < winner)) {
            winner = cand;
        }
    }
    return winner;
}

}  // namespace

std::vector<Individual> initialize_population(const GaConfig& cfg, int n_genes,
                                              double previous_duty, Rng& rng) {
    cfg.validate();
    if (n_genes < 1) throw std::invalid_argument("individuals need at least one gene");
    if (previous_duty < cfg.gene_min || previous_duty > cfg.gene_max) {
        throw std::invalid_argument("previous duty outside gene bounds");
    }
    std::vector<Individual> pop(cfg.population_size);
    const double hw = cfg.first_gene_halfwidth * previous_duty;
    for (auto& ind : pop) {
        ind.genes.resize(n_genes);
        ind.genes[0] = clamp_gene(cfg, previous_duty + rng.uniform(-hw, hw));
        for (int j = 1; j < n_genes; ++j) {
            ind.genes[j] = clamp_gene(cfg, rng.normal(ind.genes[0], cfg.init_sigma));
        }
    }
    return pop;
}

EvolveResult evolve(const GaConfig& cfg, int n_genes, const Objective& objective,
                    double previous_duty, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Individual> pop = initialize_population(cfg, n_genes, previous_duty, rng);
    for (auto& ind : pop) ind.fitness = objective(ind.genes);

    EvolveResult res;
    res.best = pop[best_index(pop)];

    int stall = 0;
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        res.generations_run = gen;

        std::vector<Individual> offspring;
        offspring.reserve(pop.size());
        while (offspring.size() < pop.size()) {
            const std::size_t pa = tournament(pop, cfg.tournament_size, rng);
            const std::size_t pb = tournament(pop, cfg.tournament_size, rng);
            if (rng.uniform01() < cfg.crossover_prob) {
                Individual child;
                child.genes.resize(n_genes);
                for (int j = 0; j < n_genes; ++j) {
                    child.genes[j] = 0.5 * (pop[pa].genes[j] + pop[pb].genes[j]);
                }
                offspring.push_back(child);
                if (offspring.size() < pop.size()) offspring.push_back(child);
            } else {
                offspring.push_back(pop[pa]);
                if (offspring.size() < pop.size()) offspring.push_back(pop[pb]);
            }
        }

        for (auto& ind : offspring) {
            if (rng.uniform01() < cfg.mutation_prob) {
                for (auto& gene : ind.genes) {
                    gene = clamp_gene(cfg, gene + rng.normal(0.0, cfg.mutation_sigma));
                }
            }
        }

        for (auto& ind : offspring) ind.fitness = objective(ind.genes);

        // Elitism of one: the incumbent replaces the worst offspring.
        offspring[worst_index(offspring)] = res.best;
        pop = std::move(offspring);

        const Individual& generation_best = pop[best_index(pop)];
        const double improvement = res.best.fitness - generation_best.fitness;
        if (improvement < 1e-12) {
            ++stall;
        } else {
            stall = 0;
        }
        if (generation_best.fitness < res.best.fitness) res.best = generation_best;

        double mean = 0.0;
        for (const auto& ind : pop) mean += ind.fitness;
        mean /= static_cast<double>(pop.size());
        res.history.emplace_back(res.best.fitness, mean);

        if (stall >= cfg.stall_limit) break;
    }
    return res;
}

}  // namespace psnf
