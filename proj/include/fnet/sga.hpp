#pragma once

#include "fnet/network.hpp"
#include "fnet/optimizers.hpp"
#include "fnet/rng.hpp"

#include <Eigen/Dense>
#include <vector>

namespace fnet {

/// Truncation selection with elitism, no crossover. Keeps the lowest-cost
/// 1/s_p of the population, refills by cloning the survivors cyclically,
/// perturbs each gene with probability p_m by additive Gaussian noise
/// (clamped into the band), and copies the best individual through
/// unmutated as individual 0.
[[nodiscard]] std::vector<Eigen::VectorXd> sga_generation(
    const std::vector<Eigen::VectorXd>& population, const std::vector<double>& costs,
    const SgaParams& params, const WeightBand& band, Rng& rng);

class SgaBackend final : public SearchBackend {
public:
    SgaBackend(int population_size, SgaParams params, WeightBand band, int dimension,
               std::uint64_t seed, InitBox init = {});

    [[nodiscard]] std::int64_t next_generation_evaluations() const override {
        return population_size_;
    }
    GenerationResult step(const BatchEvalFn& evaluate) override;
    [[nodiscard]] std::vector<Eigen::VectorXd> population() const override;
    void seed_population(const std::vector<Eigen::VectorXd>& genomes) override;

private:
    int population_size_;
    SgaParams params_;
    WeightBand band_;
    int dimension_;
    InitBox init_;
    Rng rng_;
    std::vector<Eigen::VectorXd> population_;
    std::vector<double> costs_;
    bool evaluated_ = false;
};

} // namespace fnet
