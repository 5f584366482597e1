#include "fnet/pso.hpp"

#include "fnet/errors.hpp"

#include <limits>

namespace fnet {

Eigen::VectorXd spso_center(const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& l, bool own_best_is_local_best) {
    const double c = spso_acceleration();
    if (own_best_is_local_best) return x + (c / 2.0) * (p - x);
    return x + (c / 3.0) * (p + l - 2.0 * x);
}

Eigen::VectorXd spso_sample_in_sphere(Rng& rng, const Eigen::VectorXd& center, double radius) {
    Eigen::VectorXd dir(center.size());
    for (Eigen::Index d = 0; d < dir.size(); ++d) dir[d] = rng.gaussian();
    const double norm = dir.norm();
    const double r = rng.uniform(0.0, radius);
    if (norm == 0.0) return center;
    return center + (r / norm) * dir;
}

SpsoSwarm::SpsoSwarm(const PsoParams& params, WeightBand band, int dimension, std::uint64_t seed,
                     InitBox init)
    : params_(params), band_(band), dimension_(dimension), init_(init), rng_(seed) {
    if (params_.swarm_size < 2) throw ContractError("SpsoSwarm: swarm size must be >= 2");
    if (params_.informants < 1) throw ContractError("SpsoSwarm: informants must be >= 1");
}

void SpsoSwarm::initialize() {
    const int n = params_.swarm_size;
    positions_.assign(n, Eigen::VectorXd(dimension_));
    velocities_.assign(n, Eigen::VectorXd(dimension_));
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dimension_; ++d) positions_[i][d] = rng_.uniform(init_.lo, init_.hi);
        for (int d = 0; d < dimension_; ++d) {
            velocities_[i][d] =
                rng_.uniform(init_.lo - positions_[i][d], init_.hi - positions_[i][d]);
        }
    }
    personal_best_ = positions_;
    personal_best_cost_.assign(n, std::numeric_limits<double>::infinity());
    swarm_best_cost_ = std::numeric_limits<double>::infinity();
    randomize_links();
    initialized_ = true;
}

void SpsoSwarm::randomize_links() {
    const int n = params_.swarm_size;
    informs_.assign(n, std::vector<std::uint8_t>(n, 0));
    for (int i = 0; i < n; ++i) {
        informs_[i][i] = 1;
        for (int k = 0; k < params_.informants; ++k) {
            informs_[i][rng_.index(n)] = 1;
        }
    }
}

void SpsoSwarm::move() {
    const int n = params_.swarm_size;
    const double w = spso_inertia();
    for (int i = 0; i < n; ++i) {
        // Neighborhood best among the particles informing i (lowest index wins ties).
        int local = i;
        for (int j = 0; j < n; ++j) {
            if (informs_[j][i] && personal_best_cost_[j] < personal_best_cost_[local]) local = j;
        }
        const Eigen::VectorXd center = spso_center(positions_[i], personal_best_[i],
                                                   personal_best_[local], local == i);
        const double radius = (center - positions_[i]).norm();
        const Eigen::VectorXd sampled = spso_sample_in_sphere(rng_, center, radius);

        velocities_[i] = w * velocities_[i] + sampled - positions_[i];
        positions_[i] = w * velocities_[i] + sampled;
        for (int d = 0; d < dimension_; ++d) {
            if (!band_.contains(positions_[i][d])) {
                positions_[i][d] = band_.clamp(positions_[i][d]);
                velocities_[i][d] = 0.0;
            }
        }
    }
}

GenerationResult SpsoSwarm::step(const BatchEvalFn& evaluate) {
    if (!initialized_) {
        initialize();
    } else {
        move();
    }

    const std::vector<LossResult> results = evaluate(positions_);
    int best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].total < results[best].total) best = static_cast<int>(i);
    }

    for (int i = 0; i < params_.swarm_size; ++i) {
        if (results[i].total < personal_best_cost_[i]) {
            personal_best_cost_[i] = results[i].total;
            personal_best_[i] = positions_[i];
        }
    }
    const bool improved = results[best].total < swarm_best_cost_;
    if (improved) {
        swarm_best_cost_ = results[best].total;
    } else {
        randomize_links();
    }

    GenerationResult out;
    out.evaluations = params_.swarm_size;
    out.best_cost = results[best].total;
    out.best_genome = positions_[best];
    out.best_result = results[best];
    return out;
}

} // namespace fnet
