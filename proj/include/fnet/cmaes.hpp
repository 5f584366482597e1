#pragma once

#include "fnet/optimizers.hpp"
#include "fnet/rng.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace fnet {

/// Covariance matrix adaptation evolution strategy, ask/tell form.
/// Weighted recombination of the mu best samples, rank-one plus rank-mu
/// covariance update, and cumulative step-size adaptation with the usual
/// default learning rates. Default population is 4 + floor(3 ln D).
class CmaesState {
public:
    /// Sampled points are clamped into [clamp_lo, clamp_hi] when given;
    /// the update then works with the clamped (evaluated) points.
    CmaesState(int dimension, int lambda, double sigma0, Eigen::VectorXd mean0,
               std::uint64_t seed, std::optional<std::pair<double, double>> clamp = {});

    [[nodiscard]] static int default_lambda(int dimension);

    /// Samples lambda candidates from N(mean, sigma^2 C).
    const std::vector<Eigen::VectorXd>& ask();

    /// Ranks the freshly asked candidates by cost and updates mean,
    /// step size, and covariance.
    void tell(const std::vector<double>& costs);

    [[nodiscard]] int lambda() const { return lambda_; }
    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] const Eigen::MatrixXd& covariance() const { return cov_; }
    [[nodiscard]] double min_eigenvalue() const { return eigenvalues_.minCoeff(); }
    /// True once the eigenvalue floor had to repair a non-positive-definite
    /// covariance.
    [[nodiscard]] bool repaired() const { return repaired_; }
    [[nodiscard]] int generation() const { return generation_; }

private:
    void refresh_eigensystem(bool force);

    int dim_;
    int lambda_;
    int mu_;
    double mu_eff_;
    Eigen::VectorXd weights_;
    double c_sigma_, d_sigma_, c_c_, c_1_, c_mu_, chi_n_;
    int eigen_interval_;

    Eigen::VectorXd mean_;
    double sigma_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd eigenbasis_;    // B
    Eigen::VectorXd eigenvalues_;   // diag of D^2
    Eigen::VectorXd sqrt_eigvals_;  // diag of D
    Eigen::VectorXd path_sigma_, path_c_;
    int generation_ = 0;
    int last_eigen_generation_ = -1;
    bool repaired_ = false;
    std::optional<std::pair<double, double>> clamp_;

    Rng rng_;
    std::vector<Eigen::VectorXd> samples_;
    bool sampled_ = false;
};

class CmaesBackend final : public SearchBackend {
public:
    CmaesBackend(const CmaesParams& params, WeightBand band, int dimension, std::uint64_t seed);

    [[nodiscard]] std::int64_t next_generation_evaluations() const override;
    GenerationResult step(const BatchEvalFn& evaluate) override;

private:
    CmaesState state_;
};

} // namespace fnet
