#pragma once

#include "fnet/network.hpp"

#include <Eigen/Dense>

namespace fnet {

using NodeState = Eigen::VectorXd;

/// Forward Euler integration controls. dt = 1 is the reference step size;
/// results must be insensitive to halving it on converged instances.
struct SimulationSettings {
    double dt = 1.0;
    int max_steps = 500;
    double convergence_eps = 1e-6;
    double divergence_guard = 1e6;

    void validate() const;
};

/// Logistic sigmoid 1/(1+e^-x). IEEE semantics saturate it gracefully:
/// exp overflow yields inf and the quotient lands on exactly 0 or 1.
inline double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

/// Vector field of the node dynamics: k1 (*) (f(W y) + I) - k2 (*) y.
[[nodiscard]] Eigen::VectorXd dynamics_rhs(const Network& net, const NodeState& state,
                                           const Eigen::VectorXd& input);

/// One explicit Euler step: y + dt * rhs(y).
[[nodiscard]] NodeState euler_step(const Network& net, const NodeState& state,
                                   const Eigen::VectorXd& input, double dt);

struct SimResult {
    NodeState state;
    bool converged = false;
    int steps_used = 0;
};

/// Iterates Euler steps from y(0) = 0 until the largest per-component change
/// drops below convergence_eps or max_steps is exhausted. Throws
/// DivergenceError (with the step index) if any component leaves the guard
/// band or becomes non-finite.
[[nodiscard]] SimResult simulate_to_steady_state(const Network& net,
                                                 const Eigen::VectorXd& input,
                                                 const SimulationSettings& settings);

/// Max-norm of the vector field at a state; ~0 at a fixed point.
[[nodiscard]] double steady_state_residual(const Network& net, const NodeState& state,
                                           const Eigen::VectorXd& input);

} // namespace fnet
