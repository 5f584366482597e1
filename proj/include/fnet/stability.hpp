#pragma once

#include "fnet/network.hpp"
#include "fnet/simulation.hpp"

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fnet {

/// Jacobian of the node dynamics at a steady state:
/// J_ij = k1_i f'(sum_m W_im y_m) W_ij - k2_i delta_ij, f' = f (1 - f).
/// Throws ContractError when y is not a converged fixed point.
[[nodiscard]] Eigen::MatrixXd jacobian_at(const Network& net, const NodeState& y_star,
                                          const Eigen::VectorXd& input,
                                          double residual_tol = 1e-4);

enum class EquilibriumClass {
    stable_node,
    stable_spiral,
    unstable_node,
    unstable_spiral,
    saddle,
    center_borderline,
};

[[nodiscard]] std::string to_string(EquilibriumClass cls);

/// Trace/determinant chart for 2-D equilibria. Points within
/// borderline_tol of a chart boundary (det = 0; trace = 0 or
/// trace^2 = 4 det with det > 0) are flagged rather than force-classified.
struct Classification {
    double trace = 0.0;
    double det = 0.0;
    EquilibriumClass cls = EquilibriumClass::center_borderline;
    bool borderline = false;
};
[[nodiscard]] Classification classify_2d(const Eigen::Matrix2d& J,
                                         double borderline_tol = 1e-9);

/// Discrete Lyapunov criterion: solves P - W P W^T = Q for symmetric P via
/// the Kronecker-structured linear system and reports positive
/// definiteness. Solvability is decided from the eigenvalues of W
/// (no product lambda_i lambda_j may equal 1). n <= size_cap.
struct LyapunovResult {
    bool solvable = false;
    Eigen::MatrixXd P;
    bool positive_definite = false;
    double spectral_radius = 0.0;
};
[[nodiscard]] LyapunovResult lyapunov_check(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Q,
                                            int size_cap = 64);
[[nodiscard]] LyapunovResult lyapunov_check(const Eigen::MatrixXd& W, int size_cap = 64);

/// Nonlinear perturbation experiment: offsets every component of a steady
/// state by `magnitude`, runs Euler steps, and tracks ||delta y||. The
/// contraction ratio is the geometric mean per-step ratio over the second
/// half of the usable horizon (the trace is cut off once the perturbation
/// has shrunk below machine-relevant size).
struct DecayStats {
    std::vector<double> norms; // ||delta y|| per step, norms[0] = initial
    double contraction_ratio = 0.0;
    bool decayed = false;  // final norm below initial
    bool diverged = false; // guard band violated
};
[[nodiscard]] DecayStats perturbation_decay(const Network& net, const NodeState& y_star,
                                            const Eigen::VectorXd& input,
                                            double magnitude = 1e-3, int horizon = 60,
                                            const SimulationSettings& settings = {});

/// Which matrix the Lyapunov criterion is applied to.
enum class LyapunovMatrix { euler_map, jacobian, weights };
[[nodiscard]] std::string to_string(LyapunovMatrix m);
[[nodiscard]] LyapunovMatrix lyapunov_matrix_from_string(const std::string& s);

/// Full stability analysis of a network at a given injected input: steady
/// state, Jacobian, eigenvalues, the 2-D chart when n = 2 and the leading
/// eigenvalue classification otherwise, the Lyapunov check on the chosen
/// matrix, and the empirical perturbation decay.
struct StabilityReport {
    int n = 0;
    Eigen::MatrixXd jacobian;
    double trace = 0.0;
    std::optional<double> det2;                   // n = 2 only
    std::optional<Classification> classification; // n = 2 only
    std::string regime; // eigenvalue-based class, any n
    std::vector<std::complex<double>> eigenvalues;
    double max_real_part = 0.0;
    struct {
        bool tested = false;
        LyapunovMatrix matrix = LyapunovMatrix::euler_map;
        bool solvable = false;
        bool positive_definite = false;
        double spectral_radius = 0.0;
    } lyapunov;
    DecayStats decay;
    bool steady_state_converged = false;
};
[[nodiscard]] StabilityReport analyze_stability(const Network& net, const Eigen::VectorXd& input,
                                                const SimulationSettings& settings = {},
                                                LyapunovMatrix choice = LyapunovMatrix::euler_map,
                                                int lyapunov_size_cap = 64);

[[nodiscard]] std::string stability_report_to_json_string(const StabilityReport& report);

} // namespace fnet
