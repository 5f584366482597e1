#pragma once

#include "fnet/optimizers.hpp"
#include "fnet/rng.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace fnet {

/// Acceleration constant c = 1/2 + ln 2.
[[nodiscard]] inline double spso_acceleration() { return 0.5 + std::log(2.0); }

/// Inertia weight w = 1 / (2 ln 2).
[[nodiscard]] inline double spso_inertia() { return 1.0 / (2.0 * std::log(2.0)); }

/// Hypersphere center: x + c/3 (p + l - 2x), or x + c/2 (p - x) when the
/// particle's own best is the neighborhood best.
[[nodiscard]] Eigen::VectorXd spso_center(const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                                          const Eigen::VectorXd& l, bool own_best_is_local_best);

/// Point at uniform random direction and uniform radius U(0, radius) from
/// the center; always inside the closed ball by construction.
[[nodiscard]] Eigen::VectorXd spso_sample_in_sphere(Rng& rng, const Eigen::VectorXd& center,
                                                    double radius);

/// SPSO2011 swarm over a clamped box. Particles move by sampling the
/// hypersphere spanned by personal and neighborhood bests; the information
/// topology is a random graph with a fixed number of informants per
/// particle, re-randomized whenever the swarm best fails to improve.
class SpsoSwarm final : public SearchBackend {
public:
    SpsoSwarm(const PsoParams& params, WeightBand band, int dimension, std::uint64_t seed,
              InitBox init = {});

    [[nodiscard]] std::int64_t next_generation_evaluations() const override {
        return params_.swarm_size;
    }
    GenerationResult step(const BatchEvalFn& evaluate) override;

    [[nodiscard]] const std::vector<Eigen::VectorXd>& positions() const { return positions_; }
    [[nodiscard]] const std::vector<Eigen::VectorXd>& velocities() const { return velocities_; }

private:
    void initialize();
    void randomize_links();
    void move();

    PsoParams params_;
    WeightBand band_;
    int dimension_;
    InitBox init_;
    Rng rng_;

    std::vector<Eigen::VectorXd> positions_;
    std::vector<Eigen::VectorXd> velocities_;
    std::vector<Eigen::VectorXd> personal_best_;
    std::vector<double> personal_best_cost_;
    std::vector<std::vector<std::uint8_t>> informs_; // informs_[i][j]: i informs j
    double swarm_best_cost_;
    bool initialized_ = false;
};

} // namespace fnet
