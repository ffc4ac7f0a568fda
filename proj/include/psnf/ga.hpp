#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psnf/rng.hpp"

namespace psnf {

/// Real-vector GA settings. Defaults are the tuned values used by the
/// predictive controller.
struct GaConfig {
    int population_size = 20;
    int tournament_size = 4;
    double crossover_prob = 0.5;
    double mutation_prob = 0.1;      ///< per offspring
    double mutation_sigma = 0.05;    ///< Gaussian step, duty units
    int generations = 50;
    int stall_limit = 10;            ///< consecutive unimproved generations
    double gene_min = 0.0;
    double gene_max = 1.0;
    double init_sigma = 0.05;        ///< spread of genes 1.. around gene 0
    /// Gene 0 is seeded uniformly in previous_duty +- halfwidth * previous_duty.
    double first_gene_halfwidth = 0.5;

    void validate() const;
};

struct Individual {
    std::vector<double> genes;
    double fitness = 0.0;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Population seeded around the previously applied duty: gene 0 uniform in
/// the halfwidth interval around previous_duty, remaining genes normal
/// around that individual's gene 0, everything clamped to the gene bounds.
std::vector<Individual> initialize_population(const GaConfig& cfg, int n_genes,
                                              double previous_duty, Rng& rng);

struct EvolveResult {
    Individual best;
    int generations_run = 0;
    /// Per generation: (best cost so far, population mean cost).
    std::vector<std::pair<double, double>> history;
};

/// Tournament selection (lowest cost wins, ties to the lowest population
/// index), averaging crossover that duplicates the child, per-offspring
/// Gaussian mutation, elitism of one, and early stop after `stall_limit`
/// generations without an absolute improvement of at least 1e-12.
///
/// Draw order per generation, on the single seeded generator: tournaments
/// for each pair (parent A then B), the crossover coin, then per-offspring
/// mutation coins followed by their gene noise, all in index order.
EvolveResult evolve(const GaConfig& cfg, int n_genes, const Objective& objective,
                    double previous_duty, std::uint64_t seed);

}  // namespace psnf
