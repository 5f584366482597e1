#include "fnet/sga.hpp"

#include "fnet/errors.hpp"

#include <algorithm>
#include <numeric>

namespace fnet {

std::vector<Eigen::VectorXd> sga_generation(const std::vector<Eigen::VectorXd>& population,
                                            const std::vector<double>& costs,
                                            const SgaParams& params, const WeightBand& band,
                                            Rng& rng) {
    const int pop = static_cast<int>(population.size());
    if (pop < 2) throw ContractError("sga_generation: population must hold >= 2 individuals");
    if (static_cast<int>(costs.size()) != pop) {
        throw ContractError("sga_generation: cost count does not match population");
    }

    std::vector<int> order(pop);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&costs](int a, int b) { return costs[a] < costs[b]; });

    const int keep = std::max(1, pop / params.selection_pressure);

    std::vector<Eigen::VectorXd> next;
    next.reserve(pop);
    for (int i = 0; i < pop; ++i) next.push_back(population[order[i % keep]]);

    for (auto& genome : next) {
        for (Eigen::Index d = 0; d < genome.size(); ++d) {
            if (rng.bernoulli(params.mutation_rate)) {
                genome[d] = band.clamp(genome[d] + rng.gaussian(0.0, params.mutation_sigma));
            }
        }
    }

    // Elitism: the best individual survives bit-identical.
    next[0] = population[order[0]];
    return next;
}

SgaBackend::SgaBackend(int population_size, SgaParams params, WeightBand band, int dimension,
                       std::uint64_t seed, InitBox init)
    : population_size_(population_size),
      params_(params),
      band_(band),
      dimension_(dimension),
      init_(init),
      rng_(seed) {}

GenerationResult SgaBackend::step(const BatchEvalFn& evaluate) {
    if (population_.empty()) {
        population_.reserve(population_size_);
        for (int i = 0; i < population_size_; ++i) {
            Eigen::VectorXd genome(dimension_);
            for (int d = 0; d < dimension_; ++d) genome[d] = rng_.uniform(init_.lo, init_.hi);
            population_.push_back(std::move(genome));
        }
    } else if (evaluated_) {
        population_ = sga_generation(population_, costs_, params_, band_, rng_);
    }

    const std::vector<LossResult> results = evaluate(population_);
    costs_.resize(population_.size());
    int best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        costs_[i] = results[i].total;
        if (costs_[i] < costs_[best]) best = static_cast<int>(i);
    }
    evaluated_ = true;

    GenerationResult out;
    out.evaluations = static_cast<std::int64_t>(population_.size());
    out.best_cost = costs_[best];
    out.best_genome = population_[best];
    out.best_result = results[best];
    return out;
}

std::vector<Eigen::VectorXd> SgaBackend::population() const { return population_; }

void SgaBackend::seed_population(const std::vector<Eigen::VectorXd>& genomes) {
    if (genomes.empty()) throw ContractError("seed_population: empty population");
    population_.clear();
    population_.reserve(population_size_);
    for (int i = 0; i < population_size_; ++i) {
        const Eigen::VectorXd& src = genomes[i % genomes.size()];
        if (src.size() != dimension_) {
            throw ContractError("seed_population: genome dimension mismatch");
        }
        population_.push_back(src);
    }
    evaluated_ = false;
}

} // namespace fnet
