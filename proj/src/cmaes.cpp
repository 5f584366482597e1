#include "fnet/cmaes.hpp"

#include "fnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fnet {

int CmaesState::default_lambda(int dimension) {
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

CmaesState::CmaesState(int dimension, int lambda, double sigma0, Eigen::VectorXd mean0,
                       std::uint64_t seed, std::optional<std::pair<double, double>> clamp)
    : dim_(dimension),
      lambda_(lambda > 0 ? lambda : default_lambda(dimension)),
      mean_(std::move(mean0)),
      sigma_(sigma0),
      clamp_(clamp),
      rng_(seed) {
    if (dim_ < 1) throw ContractError("CmaesState: dimension must be >= 1");
    if (lambda_ < 2) throw ContractError("CmaesState: lambda must be >= 2");
    if (!(sigma_ > 0.0)) throw ContractError("CmaesState: sigma0 must be > 0");
    if (mean_.size() != dim_) throw ContractError("CmaesState: mean dimension mismatch");

    mu_ = lambda_ / 2;
    weights_.resize(mu_);
    for (int i = 0; i < mu_; ++i) {
        weights_[i] = std::log((lambda_ + 1) / 2.0) - std::log(i + 1.0);
    }
    weights_ /= weights_.sum();
    mu_eff_ = 1.0 / weights_.squaredNorm();

    const double d = static_cast<double>(dim_);
    c_sigma_ = (mu_eff_ + 2.0) / (d + mu_eff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (d + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mu_eff_ / d) / (d + 4.0 + 2.0 * mu_eff_ / d);
    c_1_ = 2.0 / ((d + 1.3) * (d + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_,
                     2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((d + 2.0) * (d + 2.0) + mu_eff_));
    chi_n_ = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
    eigen_interval_ = std::max(1, static_cast<int>(1.0 / (10.0 * d * (c_1_ + c_mu_))));

    cov_ = Eigen::MatrixXd::Identity(dim_, dim_);
    eigenbasis_ = Eigen::MatrixXd::Identity(dim_, dim_);
    eigenvalues_ = Eigen::VectorXd::Ones(dim_);
    sqrt_eigvals_ = Eigen::VectorXd::Ones(dim_);
    path_sigma_ = Eigen::VectorXd::Zero(dim_);
    path_c_ = Eigen::VectorXd::Zero(dim_);
    last_eigen_generation_ = 0;
}

void CmaesState::refresh_eigensystem(bool force) {
    if (!force && generation_ - last_eigen_generation_ < eigen_interval_) return;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_);
    if (solver.info() != Eigen::Success) {
        throw ContractError("CmaesState: eigendecomposition failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenbasis_ = solver.eigenvectors();

    const double max_eig = eigenvalues_.maxCoeff();
    const double floor_value = std::max(1e-14 * std::max(max_eig, 0.0), 1e-300);
    if (eigenvalues_.minCoeff() < floor_value) {
        repaired_ = true;
        eigenvalues_ = eigenvalues_.cwiseMax(floor_value);
        // Rebuild the covariance from the floored spectrum so sampling and
        // the stored matrix agree.
        cov_ = eigenbasis_ * eigenvalues_.asDiagonal() * eigenbasis_.transpose();
        cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    }
    sqrt_eigvals_ = eigenvalues_.cwiseSqrt();
    last_eigen_generation_ = generation_;
}

const std::vector<Eigen::VectorXd>& CmaesState::ask() {
    if (sampled_) throw ContractError("CmaesState: ask() called twice without tell()");
    refresh_eigensystem(false);

    samples_.assign(lambda_, Eigen::VectorXd(dim_));
    Eigen::VectorXd z(dim_);
    for (int i = 0; i < lambda_; ++i) {
        for (int d = 0; d < dim_; ++d) z[d] = sqrt_eigvals_[d] * rng_.gaussian();
        samples_[i] = mean_ + sigma_ * (eigenbasis_ * z);
        if (clamp_) {
            samples_[i] =
                samples_[i].cwiseMax(clamp_->first).cwiseMin(clamp_->second);
        }
    }
    sampled_ = true;
    return samples_;
}

void CmaesState::tell(const std::vector<double>& costs) {
    if (!sampled_) throw ContractError("CmaesState: tell() without ask()");
    if (static_cast<int>(costs.size()) != lambda_) {
        throw ContractError("CmaesState: cost count does not match lambda");
    }
    sampled_ = false;
    ++generation_;

    std::vector<int> order(lambda_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&costs](int a, int b) { return costs[a] < costs[b]; });

    const Eigen::VectorXd old_mean = mean_;
    mean_.setZero();
    for (int i = 0; i < mu_; ++i) mean_ += weights_[i] * samples_[order[i]];

    const Eigen::VectorXd y_w = (mean_ - old_mean) / sigma_;

    // C^{-1/2} y_w through the eigensystem.
    Eigen::VectorXd c_inv_sqrt_y =
        eigenbasis_ * (eigenbasis_.transpose() * y_w).cwiseQuotient(sqrt_eigvals_);

    path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                  std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * c_inv_sqrt_y;

    const double ps_norm = path_sigma_.norm();
    const double expected =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
    const bool h_sigma = ps_norm / expected / chi_n_ < 1.4 + 2.0 / (dim_ + 1.0);

    path_c_ = (1.0 - c_c_) * path_c_;
    if (h_sigma) path_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

    const double rank_one_correction = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
    cov_ = (1.0 - c_1_ - c_mu_) * cov_ +
           c_1_ * (path_c_ * path_c_.transpose() + rank_one_correction * cov_);
    for (int i = 0; i < mu_; ++i) {
        const Eigen::VectorXd y = (samples_[order[i]] - old_mean) / sigma_;
        cov_ += c_mu_ * weights_[i] * y * y.transpose();
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    // Cap the exponent so a pathological path cannot overflow sigma.
    const double exponent =
        std::min(1.0, (c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
    sigma_ *= std::exp(exponent);
}

CmaesBackend::CmaesBackend(const CmaesParams& params, WeightBand band, int dimension,
                           std::uint64_t seed)
    : state_(dimension,
             params.lambda > 0 ? params.lambda : CmaesState::default_lambda(dimension),
             params.initial_sigma > 0.0 ? params.initial_sigma : 0.3 * band.width(),
             Eigen::VectorXd::Constant(dimension, band.center()), seed,
             std::make_pair(band.lo, band.hi)) {}

std::int64_t CmaesBackend::next_generation_evaluations() const { return state_.lambda(); }

GenerationResult CmaesBackend::step(const BatchEvalFn& evaluate) {
    const std::vector<Eigen::VectorXd>& candidates = state_.ask();
    const std::vector<LossResult> results = evaluate(candidates);

    std::vector<double> costs(results.size());
    int best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        costs[i] = results[i].total;
        if (costs[i] < costs[best]) best = static_cast<int>(i);
    }

    GenerationResult out;
    out.evaluations = static_cast<std::int64_t>(candidates.size());
    out.best_cost = costs[best];
    out.best_genome = candidates[best];
    out.best_result = results[best];

    state_.tell(costs);
    return out;
}

} // namespace fnet
