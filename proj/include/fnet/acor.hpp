#pragma once

#include "fnet/optimizers.hpp"
#include "fnet/rng.hpp"

#include <Eigen/Dense>
#include <vector>

namespace fnet {

/// Rank weights of the solution archive's Gaussian kernel:
/// w_l = exp(-(l-1)^2 / (2 q^2 k^2)) / (q k sqrt(2 pi)), l = 1..k.
[[nodiscard]] std::vector<double> acor_kernel_weights(int k, double q);

/// Ant colony optimization for continuous domains. A sorted archive of the
/// k best solutions defines a per-dimension Gaussian mixture; each ant
/// samples every dimension by picking a mixture component by rank weight
/// and drawing around that solution's coordinate.
class AcorBackend final : public SearchBackend {
public:
    AcorBackend(const AcorParams& params, WeightBand band, int dimension, std::uint64_t seed,
                InitBox init = {});

    [[nodiscard]] std::int64_t next_generation_evaluations() const override {
        return archive_.empty() ? params_.archive_size : params_.ants_per_iter;
    }
    GenerationResult step(const BatchEvalFn& evaluate) override;

    [[nodiscard]] const std::vector<Eigen::VectorXd>& archive_genomes() const { return archive_; }
    [[nodiscard]] const std::vector<double>& archive_costs() const { return archive_costs_; }

private:
    [[nodiscard]] Eigen::VectorXd sample_ant();
    void merge_into_archive(const std::vector<Eigen::VectorXd>& genomes,
                            const std::vector<double>& costs);

    AcorParams params_;
    WeightBand band_;
    int dimension_;
    InitBox init_;
    Rng rng_;

    std::vector<double> selection_cdf_; // cumulative kernel weights, normalized
    std::vector<Eigen::VectorXd> archive_;
    std::vector<double> archive_costs_;
    std::vector<std::int64_t> archive_age_; // insertion counter, breaks cost ties
    std::int64_t insert_counter_ = 0;
};

} // namespace fnet
