#include "fnet/stability.hpp"

#include "fnet/errors.hpp"

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace fnet {

Eigen::MatrixXd jacobian_at(const Network& net, const NodeState& y_star,
                            const Eigen::VectorXd& input, double residual_tol) {
    if (y_star.size() != net.n_nodes || input.size() != net.n_nodes) {
        throw ContractError("jacobian_at: state/input length does not match n_nodes");
    }
    if (steady_state_residual(net, y_star, input) > residual_tol) {
        throw ContractError("jacobian_at: state is not a converged steady state");
    }
    const int n = net.n_nodes;
    Eigen::MatrixXd J(n, n);
    const Eigen::VectorXd activation = net.weights * y_star;
    for (int i = 0; i < n; ++i) {
        const double f = sigmoid(activation[i]);
        const double fprime = f * (1.0 - f);
        for (int j = 0; j < n; ++j) {
            J(i, j) = net.k1[i] * fprime * net.weights(i, j);
        }
        J(i, i) -= net.k2[i];
    }
    return J;
}

std::string to_string(EquilibriumClass cls) {
    switch (cls) {
    case EquilibriumClass::stable_node: return "stable node";
    case EquilibriumClass::stable_spiral: return "stable spiral";
    case EquilibriumClass::unstable_node: return "unstable node";
    case EquilibriumClass::unstable_spiral: return "unstable spiral";
    case EquilibriumClass::saddle: return "saddle";
    case EquilibriumClass::center_borderline: return "center/borderline";
    }
    return "center/borderline";
}

Classification classify_2d(const Eigen::Matrix2d& J, double borderline_tol) {
    Classification result;
    result.trace = J(0, 0) + J(1, 1);
    result.det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    const double disc = result.trace * result.trace - 4.0 * result.det;

    // Chart boundaries: det = 0 everywhere; trace = 0 and disc = 0 only
    // separate regions where det > 0. A vanishing discriminant (repeated
    // eigenvalue) is flagged but keeps its sign-determined node class.
    if (std::abs(result.det) < borderline_tol ||
        (result.det > 0.0 && std::abs(result.trace) < borderline_tol)) {
        result.cls = EquilibriumClass::center_borderline;
        result.borderline = true;
        return result;
    }
    if (result.det < 0.0) {
        result.cls = EquilibriumClass::saddle;
    } else if (result.trace < 0.0) {
        result.cls = disc < 0.0 ? EquilibriumClass::stable_spiral : EquilibriumClass::stable_node;
    } else {
        result.cls =
            disc < 0.0 ? EquilibriumClass::unstable_spiral : EquilibriumClass::unstable_node;
    }
    result.borderline = std::abs(disc) < borderline_tol;
    return result;
}

LyapunovResult lyapunov_check(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Q, int size_cap) {
    const int n = static_cast<int>(W.rows());
    if (W.cols() != n) throw ContractError("lyapunov_check: W must be square");
    if (Q.rows() != n || Q.cols() != n) throw ContractError("lyapunov_check: Q must match W");
    if (!Q.isApprox(Q.transpose(), 1e-10)) {
        throw ContractError("lyapunov_check: Q must be symmetric");
    }
    if (n > size_cap) {
        throw SizeCapError("lyapunov_check: n exceeds the Lyapunov size cap");
    }

    LyapunovResult result;
    const Eigen::VectorXcd eigs = W.eigenvalues();
    result.spectral_radius = eigs.cwiseAbs().maxCoeff();

    // P - W P W^T = Q has a unique solution iff no eigenvalue product
    // lambda_i lambda_j equals 1.
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            min_gap = std::min(min_gap, std::abs(1.0 - eigs[i] * eigs[j]));
        }
    }
    if (min_gap < 1e-10) {
        result.solvable = false;
        return result;
    }
    result.solvable = true;

    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(n * n, n * n) - Eigen::kroneckerProduct(W, W);
    const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
    const Eigen::VectorXd p = A.partialPivLu().solve(q);
    result.P = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
    result.P = 0.5 * (result.P + result.P.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(result.P);
    result.positive_definite = solver.eigenvalues().minCoeff() > 0.0;
    return result;
}

LyapunovResult lyapunov_check(const Eigen::MatrixXd& W, int size_cap) {
    return lyapunov_check(W, Eigen::MatrixXd::Identity(W.rows(), W.rows()), size_cap);
}

DecayStats perturbation_decay(const Network& net, const NodeState& y_star,
                              const Eigen::VectorXd& input, double magnitude, int horizon,
                              const SimulationSettings& settings) {
    if (y_star.size() != net.n_nodes || input.size() != net.n_nodes) {
        throw ContractError("perturbation_decay: state/input length does not match n_nodes");
    }

    // Tighten the fixed point well below the caller's convergence_eps;
    // otherwise the perturbation plateaus at the steady-state error instead
    // of decaying, and the measured ratio drifts to 1.
    NodeState anchor = y_star;
    for (int t = 0; t < 5 * settings.max_steps; ++t) {
        const NodeState next = euler_step(net, anchor, input, settings.dt);
        const double change = (next - anchor).cwiseAbs().maxCoeff();
        anchor = next;
        if (change < 1e-14) break;
    }

    DecayStats stats;
    NodeState y = anchor.array() + magnitude;
    double initial = (y - anchor).norm();
    stats.norms.push_back(initial);

    const double floor_norm = std::max(initial * 1e-9, 1e-300);
    for (int t = 0; t < horizon; ++t) {
        y = euler_step(net, y, input, settings.dt);
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > settings.divergence_guard) {
            stats.diverged = true;
            break;
        }
        const double norm = (y - anchor).norm();
        stats.norms.push_back(norm);
        if (norm < floor_norm) break; // fully damped, further ratios are noise
    }

    const std::size_t steps = stats.norms.size() - 1;
    if (steps > 0 && !stats.diverged) {
        // Geometric-mean per-step ratio over the second half, past transients.
        const std::size_t start = steps / 2;
        const double from = stats.norms[start];
        const double to = stats.norms[steps];
        if (from == 0.0 || to == 0.0) {
            stats.contraction_ratio = 0.0;
        } else {
            stats.contraction_ratio =
                std::pow(to / from, 1.0 / static_cast<double>(steps - start));
        }
        stats.decayed = stats.norms.back() < initial;
    }
    if (magnitude == 0.0) {
        stats.contraction_ratio = 0.0;
        stats.decayed = true;
    }
    return stats;
}

std::string to_string(LyapunovMatrix m) {
    switch (m) {
    case LyapunovMatrix::euler_map: return "euler_map";
    case LyapunovMatrix::jacobian: return "jacobian";
    case LyapunovMatrix::weights: return "weights";
    }
    return "euler_map";
}

LyapunovMatrix lyapunov_matrix_from_string(const std::string& s) {
    if (s == "euler_map") return LyapunovMatrix::euler_map;
    if (s == "jacobian") return LyapunovMatrix::jacobian;
    if (s == "weights") return LyapunovMatrix::weights;
    throw ConfigError("lyapunov_matrix", "unknown matrix choice '" + s + "'");
}

namespace {

std::string regime_from_eigenvalues(const Eigen::VectorXcd& eigs, double tol) {
    double max_re = -std::numeric_limits<double>::infinity();
    double min_re = std::numeric_limits<double>::infinity();
    bool leading_complex = false;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        const double re = eigs[i].real();
        if (re > max_re) {
            max_re = re;
            leading_complex = std::abs(eigs[i].imag()) > tol;
        }
        min_re = std::min(min_re, re);
    }
    if (std::abs(max_re) < tol) return "center/borderline";
    if (max_re < 0.0) return leading_complex ? "stable spiral" : "stable node";
    if (min_re > 0.0) return leading_complex ? "unstable spiral" : "unstable node";
    return "saddle";
}

} // namespace

StabilityReport analyze_stability(const Network& net, const Eigen::VectorXd& input,
                                  const SimulationSettings& settings, LyapunovMatrix choice,
                                  int lyapunov_size_cap) {
    StabilityReport report;
    report.n = net.n_nodes;

    const SimResult sim = simulate_to_steady_state(net, input, settings);
    report.steady_state_converged = sim.converged;
    if (!sim.converged) return report;

    report.jacobian = jacobian_at(net, sim.state, input);
    report.trace = report.jacobian.trace();

    const Eigen::VectorXcd eigs = report.jacobian.eigenvalues();
    report.eigenvalues.assign(eigs.data(), eigs.data() + eigs.size());
    report.max_real_part = eigs.real().maxCoeff();
    report.regime = regime_from_eigenvalues(eigs, 1e-9);

    if (net.n_nodes == 2) {
        const Classification cls = classify_2d(report.jacobian);
        report.det2 = cls.det;
        report.classification = cls;
        report.regime = to_string(cls.cls);
    }

    Eigen::MatrixXd tested;
    switch (choice) {
    case LyapunovMatrix::euler_map:
        tested = Eigen::MatrixXd::Identity(net.n_nodes, net.n_nodes) +
                 settings.dt * report.jacobian;
        break;
    case LyapunovMatrix::jacobian:
        tested = report.jacobian;
        break;
    case LyapunovMatrix::weights:
        tested = net.weights;
        break;
    }
    if (net.n_nodes <= lyapunov_size_cap) {
        const LyapunovResult lyap = lyapunov_check(tested, lyapunov_size_cap);
        report.lyapunov.tested = true;
        report.lyapunov.matrix = choice;
        report.lyapunov.solvable = lyap.solvable;
        report.lyapunov.positive_definite = lyap.positive_definite;
        report.lyapunov.spectral_radius = lyap.spectral_radius;
    }

    report.decay = perturbation_decay(net, sim.state, input, 1e-3, 60, settings);
    return report;
}

std::string stability_report_to_json_string(const StabilityReport& report) {
    nlohmann::ordered_json doc;
    doc["schema"] = "stability_report.v1";
    doc["nodes"] = report.n;
    doc["steady_state_converged"] = report.steady_state_converged;
    if (!report.steady_state_converged) return doc.dump(2) + "\n";

    doc["trace"] = report.trace;
    if (report.det2) doc["det"] = *report.det2;
    doc["regime"] = report.regime;
    if (report.classification) {
        doc["chart_2d"] = {{"class", to_string(report.classification->cls)},
                           {"borderline", report.classification->borderline}};
    }
    nlohmann::ordered_json eigs = nlohmann::ordered_json::array();
    for (const auto& z : report.eigenvalues) eigs.push_back({z.real(), z.imag()});
    doc["eigenvalues"] = std::move(eigs);
    doc["max_real_part"] = report.max_real_part;
    doc["lyapunov"] = {{"tested", report.lyapunov.tested},
                       {"matrix", to_string(report.lyapunov.matrix)},
                       {"solvable", report.lyapunov.solvable},
                       {"positive_definite", report.lyapunov.positive_definite},
                       {"spectral_radius", report.lyapunov.spectral_radius}};
    doc["perturbation"] = {{"contraction_ratio", report.decay.contraction_ratio},
                           {"decayed", report.decay.decayed},
                           {"diverged", report.decay.diverged}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double v : report.decay.norms) rows.push_back(v);
    doc["perturbation_norms"] = std::move(rows);
    return doc.dump(2) + "\n";
}

} // namespace fnet
