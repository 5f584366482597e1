#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace fnet {

/// Admissible interval for every weight entry. Mutations and samples are
/// clamped into this band; the sigmoid saturates well inside +-10, so a
/// wider band buys no expressive power.
struct WeightBand {
    double lo = -10.0;
    double hi = 10.0;

    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] double center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(double w) const { return w >= lo && w <= hi; }
    [[nodiscard]] double clamp(double w) const {
        return w < lo ? lo : (w > hi ? hi : w);
    }
};

/// A weighted directed network with node kinetics. weights(i, j) is the
/// influence of node j on node i; k1/k2 are the maximum expression and
/// kinetic degradation rates.
struct Network {
    int n_nodes = 0;
    Eigen::MatrixXd weights;
    Eigen::VectorXd k1;
    Eigen::VectorXd k2;
    std::vector<int> input_nodes;
    std::vector<int> output_nodes;

    /// Zero-weight network with unit rates, inputs at the front indices and
    /// outputs at the back. The usual starting skeleton for evolution.
    static Network dense_template(int n, int n_inputs, int n_outputs);

    /// Flattened row-major weight vector (genome layout, length n^2).
    [[nodiscard]] Eigen::VectorXd genome() const;

    /// Overwrites weights from a row-major genome of length n^2.
    void set_genome(const Eigen::VectorXd& genome);

    /// Throws ContractError on any violated structural invariant.
    void validate(const WeightBand& band = {}) const;
};

[[nodiscard]] std::string network_to_json_string(const Network& net);
[[nodiscard]] Network network_from_json_string(const std::string& text);

void save_network(const Network& net, const std::filesystem::path& path);
[[nodiscard]] Network load_network(const std::filesystem::path& path);

} // namespace fnet
