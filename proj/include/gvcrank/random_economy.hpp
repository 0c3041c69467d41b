#pragma once

#include <cstdint>
#include <random>

#include "gvcrank/equilibrium.hpp"

namespace gvcrank {

/// Knobs for the seeded economy generator used by tests and `simulate`.
struct EconomyGenConfig {
    int sectors = 8;
    double edge_probability = 0.5;  // sparsity mask on G entries
    double alpha_min = 0.2;
    double alpha_max = 0.8;
    double epsilon_min = 1.5;
    double epsilon_max = 10.0;
    int firms_max = 100;            // M_k uniform on {1, ..., firms_max}
    double dirichlet_concentration = 1.0;
};

/// Draws a random economy: G columns from a symmetric Dirichlet restricted to
/// a Bernoulli sparsity mask (at least one supplier per column), alpha and
/// epsilon uniform, firm counts uniform integers, gamma Dirichlet, tau = 1.
/// Fully determined by the seed.
inline EconomyPrimitives random_economy(std::uint64_t seed,
                                        const EconomyGenConfig& config = {}) {
    std::mt19937_64 rng(seed);
    const auto m = static_cast<Eigen::Index>(config.sectors);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::gamma_distribution<double> gamma_draw(config.dirichlet_concentration, 1.0);

    EconomyPrimitives prim;
    prim.G = Matrix::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        std::vector<Eigen::Index> suppliers;
        for (Eigen::Index h = 0; h < m; ++h) {
            if (unit(rng) < config.edge_probability) suppliers.push_back(h);
        }
        if (suppliers.empty()) {
            suppliers.push_back(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m)));
        }
        double total = 0.0;
        std::vector<double> weights;
        for (std::size_t i = 0; i < suppliers.size(); ++i) {
            double w = gamma_draw(rng);
            weights.push_back(w);
            total += w;
        }
        for (std::size_t i = 0; i < suppliers.size(); ++i) {
            prim.G(suppliers[i], k) = weights[i] / total;
        }
        // Renormalize exactly so validate()'s 1e-12 column check holds.
        prim.G.col(k) /= prim.G.col(k).sum();
    }

    prim.alpha.resize(m);
    prim.epsilon.resize(m);
    prim.firms.resize(m);
    prim.gamma.resize(m);
    prim.tau = Vector::Ones(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        prim.alpha(k) = config.alpha_min + (config.alpha_max - config.alpha_min) * unit(rng);
        prim.epsilon(k) = config.epsilon_min + (config.epsilon_max - config.epsilon_min) * unit(rng);
        prim.firms(k) = 1.0 + static_cast<double>(rng() % static_cast<std::uint64_t>(config.firms_max));
        prim.gamma(k) = gamma_draw(rng);
    }
    prim.gamma /= prim.gamma.sum();
    prim.ensure_labels();
    return prim;
}

}  // namespace gvcrank
