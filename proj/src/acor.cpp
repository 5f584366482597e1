#include "fnet/acor.hpp"

#include "fnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fnet {

std::vector<double> acor_kernel_weights(int k, double q) {
    if (k < 1) throw ContractError("acor_kernel_weights: k must be >= 1");
    if (!(q > 0.0)) throw ContractError("acor_kernel_weights: q must be > 0");
    std::vector<double> w(k);
    const double denom = q * k * std::sqrt(2.0 * M_PI);
    for (int l = 0; l < k; ++l) {
        const double rank = static_cast<double>(l); // l-1 with 1-based ranks
        w[l] = std::exp(-rank * rank / (2.0 * q * q * k * k)) / denom;
    }
    return w;
}

AcorBackend::AcorBackend(const AcorParams& params, WeightBand band, int dimension,
                         std::uint64_t seed, InitBox init)
    : params_(params), band_(band), dimension_(dimension), init_(init), rng_(seed) {
    if (params_.archive_size < 2) throw ContractError("AcorBackend: archive size must be >= 2");
    if (params_.ants_per_iter < 1) throw ContractError("AcorBackend: ants_per_iter must be >= 1");

    const std::vector<double> w = acor_kernel_weights(params_.archive_size, params_.locality);
    selection_cdf_.resize(w.size());
    std::partial_sum(w.begin(), w.end(), selection_cdf_.begin());
    const double total = selection_cdf_.back();
    for (double& c : selection_cdf_) c /= total;
}

Eigen::VectorXd AcorBackend::sample_ant() {
    const int k = params_.archive_size;
    Eigen::VectorXd genome(dimension_);
    for (int d = 0; d < dimension_; ++d) {
        const double u = rng_.uniform();
        const int pick = static_cast<int>(
            std::lower_bound(selection_cdf_.begin(), selection_cdf_.end(), u) -
            selection_cdf_.begin());
        const int l = std::min(pick, k - 1);

        double spread = 0.0;
        for (int j = 0; j < k; ++j) spread += std::abs(archive_[j][d] - archive_[l][d]);
        const double sigma = params_.convergence_speed * spread / (k - 1);

        genome[d] = band_.clamp(rng_.gaussian(archive_[l][d], sigma));
    }
    return genome;
}

void AcorBackend::merge_into_archive(const std::vector<Eigen::VectorXd>& genomes,
                                     const std::vector<double>& costs) {
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        archive_.push_back(genomes[i]);
        archive_costs_.push_back(costs[i]);
        archive_age_.push_back(insert_counter_++);
    }
    std::vector<int> order(archive_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [this](int a, int b) {
        if (archive_costs_[a] != archive_costs_[b]) return archive_costs_[a] < archive_costs_[b];
        return archive_age_[a] < archive_age_[b];
    });
    const std::size_t keep = std::min<std::size_t>(params_.archive_size, order.size());
    std::vector<Eigen::VectorXd> genomes_kept;
    std::vector<double> costs_kept;
    std::vector<std::int64_t> age_kept;
    genomes_kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        genomes_kept.push_back(std::move(archive_[order[i]]));
        costs_kept.push_back(archive_costs_[order[i]]);
        age_kept.push_back(archive_age_[order[i]]);
    }
    archive_ = std::move(genomes_kept);
    archive_costs_ = std::move(costs_kept);
    archive_age_ = std::move(age_kept);
}

GenerationResult AcorBackend::step(const BatchEvalFn& evaluate) {
    std::vector<Eigen::VectorXd> batch;
    if (archive_.empty()) {
        batch.reserve(params_.archive_size);
        for (int i = 0; i < params_.archive_size; ++i) {
            Eigen::VectorXd genome(dimension_);
            for (int d = 0; d < dimension_; ++d) genome[d] = rng_.uniform(init_.lo, init_.hi);
            batch.push_back(std::move(genome));
        }
    } else {
        batch.reserve(params_.ants_per_iter);
        for (int i = 0; i < params_.ants_per_iter; ++i) batch.push_back(sample_ant());
    }

    const std::vector<LossResult> results = evaluate(batch);
    std::vector<double> costs(results.size());
    int best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        costs[i] = results[i].total;
        if (costs[i] < costs[best]) best = static_cast<int>(i);
    }

    GenerationResult out;
    out.evaluations = static_cast<std::int64_t>(batch.size());
    out.best_cost = costs[best];
    out.best_genome = batch[best];
    out.best_result = results[best];

    merge_into_archive(batch, costs);
    return out;
}

} // namespace fnet
