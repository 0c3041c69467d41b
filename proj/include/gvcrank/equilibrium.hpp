#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gvcrank/errors.hpp"
#include "gvcrank/rank.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

/// Parameters of a synthetic economy: technology network G, intermediate
/// intensities alpha (labor shares are 1 - alpha), within-sector substitution
/// elasticities, firm counts, consumption shares, input distortions, and the
/// wage numeraire.
struct EconomyPrimitives {
    Matrix G;        // column-stochastic (all-zero columns require alpha_k = 0)
    Vector alpha;    // in [0, 1)
    Vector epsilon;  // > 1
    Vector firms;    // >= 1
    Vector gamma;    // >= 0, sums to 1
    Vector tau;      // > 0; undistorted economies use 1
    double wage = 1.0;
    std::vector<std::string> sectors;  // optional labels; filled on demand

    Eigen::Index size() const { return G.rows(); }

    void ensure_labels() {
        if (static_cast<Eigen::Index>(sectors.size()) == size()) return;
        sectors.clear();
        for (Eigen::Index i = 0; i < size(); ++i) sectors.push_back("S" + std::to_string(i + 1));
    }

    void validate() const {
        const Eigen::Index m = size();
        if (G.cols() != m) throw StructuralError("G must be square");
        auto check_len = [&](const Vector& v, const char* name) {
            if (v.size() != m) throw StructuralError(std::string(name) + " length != sector count");
        };
        check_len(alpha, "alpha");
        check_len(epsilon, "epsilon");
        check_len(firms, "firms");
        check_len(gamma, "gamma");
        check_len(tau, "tau");
        if (wage <= 0.0) throw DomainError("wage must be positive");
        for (Eigen::Index k = 0; k < m; ++k) {
            if (G.col(k).minCoeff() < 0.0) throw DomainError("G has a negative share");
            double colsum = G.col(k).sum();
            if (std::abs(colsum - 1.0) > 1e-12 && colsum != 0.0) {
                throw DomainError("G column " + std::to_string(k) +
                                  " sums to " + std::to_string(colsum) + ", expected 1 or 0");
            }
            if (colsum == 0.0 && alpha(k) != 0.0) {
                throw DomainError("sector " + std::to_string(k) +
                                  " buys no intermediates but has alpha > 0");
            }
            if (alpha(k) < 0.0 || alpha(k) >= 1.0) throw DomainError("alpha must lie in [0, 1)");
            if (epsilon(k) <= 1.0) throw DomainError("epsilon must exceed 1");
            if (firms(k) < 1.0) throw DomainError("firm counts must be >= 1");
            if (gamma(k) < 0.0) throw DomainError("gamma must be non-negative");
            // tau >= 1 models a distortion; values below 1 are allowed so that
            // central differences can straddle the undistorted point.
            if (tau(k) <= 0.0) throw DomainError("tau must be positive");
        }
        if (std::abs(gamma.sum() - 1.0) > 1e-12) throw DomainError("gamma must sum to 1");
    }
};

/// Solved equilibrium: markups, marginal costs at the sector and firm level,
/// prices, sales, consumer expenditure, and the implied flow matrix.
struct EquilibriumState {
    Vector mu;             // epsilon / (epsilon - 1)
    Vector lambda_sector;  // sector-level marginal cost index
    Vector lambda_firm;    // firm-level marginal cost, symmetric within sector
    Vector prices;         // mu_k * lambda_sector_k
    Vector sales;          // Y_k = p_k y_k
    double expenditure = 0.0;
    Matrix flows;          // Z(h, k) = d_hk * Y_k
};

/// mu_k = epsilon_k / (epsilon_k - 1). Firm and sector markups coincide.
inline Vector markups(const Vector& epsilon) {
    Vector mu(epsilon.size());
    for (Eigen::Index k = 0; k < epsilon.size(); ++k) {
        if (epsilon(k) <= 1.0) throw DomainError("epsilon must exceed 1");
        mu(k) = epsilon(k) / (epsilon(k) - 1.0);
    }
    return mu;
}

/// Model-implied direct requirements d_hk = ((eps_k - 1) / eps_k) alpha_k g_hk.
inline Matrix model_direct_requirements(const EconomyPrimitives& prim) {
    Vector scale(prim.size());
    for (Eigen::Index k = 0; k < prim.size(); ++k) {
        scale(k) = (prim.epsilon(k) - 1.0) / prim.epsilon(k) * prim.alpha(k);
    }
    return prim.G * scale.asDiagonal();
}

/// Solves the cost block: in logs the sector cost index satisfies
///   log lambda = -eta + beta log w + A G' (log mu + log tau + log lambda),
/// with eta_k = log(M_k) / (eps_k - 1) capturing the variety effect of M_k
/// firms. Firm-level cost is lambda_firm = exp(eta) .* lambda_sector; it obeys
/// the cost-minimization identity
///   lambda_firm(k) = w^beta_k prod_h (p_h tau_h)^(alpha_k g_hk)
/// at the solved prices p = mu .* lambda_sector.
inline std::pair<Vector, Vector> marginal_costs(const EconomyPrimitives& prim) {
    prim.validate();
    const Eigen::Index m = prim.size();
    Matrix AGt = prim.alpha.asDiagonal() * prim.G.transpose();
    {
        double amax = m > 0 ? prim.alpha.maxCoeff() : 0.0;
        if (amax >= 1.0 - kSpectralMargin || spectral_radius(AGt) >= 1.0 - kSpectralMargin) {
            throw IllPosedError("cost system I - AG' is ill-posed (alpha too close to 1)");
        }
    }
    Vector eta(m), log_mu(m), log_tau(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        eta(k) = std::log(prim.firms(k)) / (prim.epsilon(k) - 1.0);
        log_mu(k) = std::log(prim.epsilon(k) / (prim.epsilon(k) - 1.0));
        log_tau(k) = std::log(prim.tau(k));
    }
    Vector beta = Vector::Ones(m) - prim.alpha;
    Vector rhs = -eta + beta * std::log(prim.wage) + AGt * (log_mu + log_tau);
    Matrix system = Matrix::Identity(m, m) - AGt;
    Vector log_lambda = Eigen::PartialPivLU<Matrix>(system).solve(rhs);
    Vector lambda_sector = log_lambda.array().exp();
    Vector lambda_firm = (log_lambda + eta).array().exp();
    return {lambda_sector, lambda_firm};
}

/// Solves the demand block. Sales satisfy Y = (I - D)^{-1} gamma E where the
/// expenditure E = w + sum_k Y_k / eps_k (wage income plus profits) gives the
/// one-dimensional closure E = w / (1 - s' (I - D)^{-1} gamma), s_k = 1/eps_k.
inline void solve_outputs(const EconomyPrimitives& prim, EquilibriumState& state) {
    const Eigen::Index m = prim.size();
    Matrix D = model_direct_requirements(prim);
    if (spectral_radius(D) >= 1.0 - kSpectralMargin) {
        throw IllPosedError("demand system I - D is ill-posed");
    }
    Matrix system = Matrix::Identity(m, m) - D;
    Vector t = Eigen::PartialPivLU<Matrix>(system).solve(prim.gamma);
    Vector s = prim.epsilon.cwiseInverse();
    double denom = 1.0 - s.dot(t);
    if (denom <= 0.0) {
        throw InfeasibleEconomyError("profit share leaves no room for wage income (denominator " +
                                     std::to_string(denom) + ")");
    }
    state.expenditure = prim.wage / denom;
    state.sales = t * state.expenditure;
    state.flows = D * state.sales.asDiagonal();
}

/// Full solve: costs, prices, then outputs.
inline EquilibriumState solve_equilibrium(const EconomyPrimitives& prim) {
    EquilibriumState state;
    state.mu = markups(prim.epsilon);
    auto [lambda_sector, lambda_firm] = marginal_costs(prim);
    state.lambda_sector = lambda_sector;
    state.lambda_firm = lambda_firm;
    state.prices = state.mu.cwiseProduct(state.lambda_sector);
    solve_outputs(prim, state);
    return state;
}

/// Value of labor demanded minus the wage bill; zero at equilibrium.
inline double labor_clearing_residual(const EconomyPrimitives& prim,
                                      const EquilibriumState& state) {
    double labor_value = 0.0;
    for (Eigen::Index k = 0; k < prim.size(); ++k) {
        double beta = 1.0 - prim.alpha(k);
        labor_value += beta * (prim.epsilon(k) - 1.0) / prim.epsilon(k) * state.sales(k);
    }
    return labor_value - prim.wage;
}

/// Max absolute violation of Y_h = sum_k Z_hk + gamma_h E across sectors.
inline double goods_clearing_residual(const EconomyPrimitives& prim,
                                      const EquilibriumState& state) {
    Vector resid = state.sales - state.flows.rowwise().sum() - prim.gamma * state.expenditure;
    return resid.cwiseAbs().maxCoeff();
}

/// Emits the solved economy as an I-O table: Z from flows, F_h = gamma_h E,
/// VA_k = Y_k - column sum of Z (labor cost plus profit). The result satisfies
/// the accounting identity to solver precision.
inline RawIOTable synthetic_io_table(const EconomyPrimitives& prim,
                                     const EquilibriumState& state) {
    EconomyPrimitives labeled = prim;
    labeled.ensure_labels();
    RawIOTable table;
    table.sectors = labeled.sectors;
    table.flows = state.flows;
    table.final_demand = prim.gamma * state.expenditure;
    table.gross_output = state.sales;
    table.value_added = state.sales - state.flows.colwise().sum().transpose();
    return table;
}

/// Central difference of log lambda_firm(k) with respect to log tau_h. The
/// cost block is linear in log tau, so the estimate is exact to roundoff. For
/// h != k this equals the Input Rank entry v_hk; the diagonal carries a -1
/// relative to (I - GA)^{-1} because tau_k also enters sector k's own price.
inline double finite_diff_input_rank(const EconomyPrimitives& prim, Eigen::Index h,
                                     Eigen::Index k, double step = 1e-4) {
    if (step <= 0.0) throw DomainError("finite-difference step must be positive");
    EconomyPrimitives up = prim;
    EconomyPrimitives down = prim;
    up.tau(h) *= std::exp(step);
    down.tau(h) *= std::exp(-step);
    double log_up = std::log(marginal_costs(up).second(k));
    double log_down = std::log(marginal_costs(down).second(k));
    return (log_up - log_down) / (2.0 * step);
}

/// Level derivative d lambda_firm(k) / d tau_h by central difference.
inline double marginal_cost_tau_derivative(const EconomyPrimitives& prim, Eigen::Index h,
                                           Eigen::Index k, double rel_step = 1e-5) {
    double delta = rel_step * prim.tau(h);
    EconomyPrimitives up = prim;
    EconomyPrimitives down = prim;
    up.tau(h) += delta;
    down.tau(h) -= delta;
    double f_up = marginal_costs(up).second(k);
    double f_down = marginal_costs(down).second(k);
    return (f_up - f_down) / (2.0 * delta);
}

struct ComparativeStaticsReport {
    std::vector<double> epsilon_grid;
    std::vector<double> derivatives;  // d lambda_firm(k) / d tau_h at each grid point
    bool decreasing_in_epsilon = false;
};

/// Evaluates how the shock pass-through d lambda(k)/d tau_h changes as the
/// supplying sector's elasticity epsilon_h moves along a grid. Tougher
/// competition upstream (higher epsilon_h) should weaken the pass-through.
inline ComparativeStaticsReport prop2_comparative_statics(const EconomyPrimitives& prim,
                                                          Eigen::Index h, Eigen::Index k,
                                                          const std::vector<double>& epsilon_grid) {
    ComparativeStaticsReport report;
    report.epsilon_grid = epsilon_grid;
    for (double eps : epsilon_grid) {
        EconomyPrimitives p = prim;
        p.epsilon(h) = eps;
        report.derivatives.push_back(marginal_cost_tau_derivative(p, h, k));
    }
    report.decreasing_in_epsilon = true;
    for (std::size_t i = 1; i < report.derivatives.size(); ++i) {
        if (report.derivatives[i] >= report.derivatives[i - 1]) {
            report.decreasing_in_epsilon = false;
            break;
        }
    }
    return report;
}

/// Sector-level composite demand for input h by sector k, in physical units:
/// x(k, h) = Z_hk / p_h.
inline double sector_input_demand(const EquilibriumState& state, Eigen::Index h,
                                  Eigen::Index k) {
    return state.flows(h, k) / state.prices(h);
}

/// Per-firm demand for composite input h by one firm in sector k. Symmetry
/// makes the sector total exactly firms_k times this.
inline double firm_input_demand(const EconomyPrimitives& prim, const EquilibriumState& state,
                                Eigen::Index h, Eigen::Index k) {
    double y_k = state.sales(k) / state.prices(k);
    double firm_output =
        y_k * std::pow(prim.firms(k), -prim.epsilon(k) / (prim.epsilon(k) - 1.0));
    return state.lambda_firm(k) * prim.alpha(k) * prim.G(h, k) * firm_output / state.prices(h);
}

}  // namespace gvcrank
