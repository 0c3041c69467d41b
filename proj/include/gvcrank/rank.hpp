#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gvcrank/errors.hpp"
#include "gvcrank/network.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

inline constexpr double kSpectralMargin = 1e-9;

/// Spectral radius estimate by power iteration. Exact enough for feasibility
/// checks on the non-negative matrices used here.
inline double spectral_radius(const Matrix& m, int iterations = 200) {
    if (m.rows() == 0) return 0.0;
    Vector v = Vector::Ones(m.rows());
    v /= v.norm();
    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = m * v;
        double norm = w.norm();
        if (norm == 0.0) return 0.0;
        rho = norm;
        v = w / norm;
    }
    return rho;
}

namespace detail {

inline Matrix propagation_matrix(const Matrix& G, const Vector& alpha) {
    if (G.rows() != G.cols()) throw StructuralError("G must be square");
    if (alpha.size() != G.cols()) throw StructuralError("alpha length != G dimension");
    return G * alpha.asDiagonal();  // column k scaled by alpha_k
}

inline void ensure_contraction(const Matrix& GA, const Vector& alpha,
                               const std::vector<std::string>* sectors) {
    Eigen::Index worst = 0;
    double amax = alpha.size() ? alpha.maxCoeff(&worst) : 0.0;
    // Column sums of GA equal alpha_k, so rho(GA) <= max alpha. Only when the
    // bound is inconclusive do we need the iterative estimate.
    double rho = amax < 1.0 - kSpectralMargin ? amax : spectral_radius(GA);
    if (rho >= 1.0 - kSpectralMargin) {
        std::string who = sectors ? (*sectors)[static_cast<std::size_t>(worst)]
                                  : std::to_string(worst);
        throw IllPosedError("I - GA is ill-posed: spectral radius " + std::to_string(rho) +
                            " >= 1 - 1e-9 (largest alpha " + std::to_string(amax) +
                            " at sector '" + who + "')");
    }
}

}  // namespace detail

/// Input Rank matrix (I - GA)^{-1}: entry (h, k) measures how strongly an
/// upstream productivity distortion in sector h raises the marginal cost of
/// sector k, summed over all direct and indirect supply paths.
inline Matrix input_rank_matrix(const Matrix& G, const Vector& alpha,
                                const std::vector<std::string>* sectors = nullptr) {
    Matrix GA = detail::propagation_matrix(G, alpha);
    detail::ensure_contraction(GA, alpha, sectors);
    const Eigen::Index m = G.rows();
    Matrix system = Matrix::Identity(m, m) - GA;
    return Eigen::PartialPivLU<Matrix>(system).solve(Matrix::Identity(m, m));
}

/// Truncated Neumann series I + GA + (GA)^2 + ... as an alternative route for
/// large sparse inputs; terminates when the term's max entry falls below tol.
inline Matrix input_rank_neumann(const Matrix& G, const Vector& alpha, double tol = 1e-10,
                                 int max_terms = 100000,
                                 const std::vector<std::string>* sectors = nullptr) {
    Matrix GA = detail::propagation_matrix(G, alpha);
    detail::ensure_contraction(GA, alpha, sectors);
    const Eigen::Index m = G.rows();
    Matrix sum = Matrix::Identity(m, m);
    Matrix term = Matrix::Identity(m, m);
    for (int n = 0; n < max_terms; ++n) {
        term = GA * term;
        sum += term;
        if (term.cwiseAbs().maxCoeff() < tol) return sum;
    }
    throw NumericalError("Neumann series did not reach tolerance " + std::to_string(tol) +
                         " within " + std::to_string(max_terms) + " terms");
}

/// Single destination column under a scalar damping factor chi:
/// (I - chi GA)^{-1} e_dest.
inline Vector dampened_column(const Matrix& G, const Vector& alpha, double chi,
                              Eigen::Index dest,
                              const std::vector<std::string>* sectors = nullptr) {
    if (chi < 0.0 || chi > 1.0) throw DomainError("chi must lie in [0, 1]");
    Matrix GA = detail::propagation_matrix(G, alpha);
    detail::ensure_contraction(GA, alpha, sectors);
    const Eigen::Index m = G.rows();
    Matrix system = Matrix::Identity(m, m) - chi * GA;
    Vector e = Vector::Zero(m);
    e(dest) = 1.0;
    return Eigen::PartialPivLU<Matrix>(system).solve(e);
}

/// Dampened Input Rank with per-destination visibility chi_k: column k solves
/// (I - chi_k GA) x = e_k. Destinations sharing a chi value share one
/// factorization.
inline Matrix input_rank_dampened_matrix(const Matrix& G, const Vector& alpha, const Vector& chi,
                                         const std::vector<std::string>* sectors = nullptr) {
    const Eigen::Index m = G.rows();
    if (chi.size() != m) throw StructuralError("chi length != G dimension");
    for (Eigen::Index k = 0; k < m; ++k) {
        if (chi(k) < 0.0 || chi(k) > 1.0) throw DomainError("chi must lie in [0, 1]");
    }
    Matrix GA = detail::propagation_matrix(G, alpha);
    detail::ensure_contraction(GA, alpha, sectors);

    std::map<double, std::vector<Eigen::Index>> by_chi;
    for (Eigen::Index k = 0; k < m; ++k) by_chi[chi(k)].push_back(k);

    Matrix out(m, m);
    for (const auto& [c, cols] : by_chi) {
        Matrix system = Matrix::Identity(m, m) - c * GA;
        Eigen::PartialPivLU<Matrix> lu(system);
        Matrix rhs = Matrix::Zero(m, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) rhs(cols[j], static_cast<Eigen::Index>(j)) = 1.0;
        Matrix solved = lu.solve(rhs);
        for (std::size_t j = 0; j < cols.size(); ++j) out.col(cols[j]) = solved.col(static_cast<Eigen::Index>(j));
    }
    return out;
}

inline Matrix input_rank_dampened_matrix(const Matrix& G, const Vector& alpha, double chi,
                                         const std::vector<std::string>* sectors = nullptr) {
    return input_rank_dampened_matrix(G, alpha, Vector::Constant(G.rows(), chi), sectors);
}

/// Leontief inverse (I - D)^{-1}, the total-requirements matrix.
inline Matrix leontief_inverse_matrix(const Matrix& D,
                                      const std::vector<std::string>* sectors = nullptr) {
    if (D.rows() != D.cols()) throw StructuralError("D must be square");
    double rho = spectral_radius(D);
    if (rho >= 1.0 - kSpectralMargin) {
        throw IllPosedError("I - D is ill-posed: spectral radius " + std::to_string(rho));
    }
    (void)sectors;
    const Eigen::Index m = D.rows();
    Matrix system = Matrix::Identity(m, m) - D;
    return Eigen::PartialPivLU<Matrix>(system).solve(Matrix::Identity(m, m));
}

/// Bilateral Upstreamness: requirement-weighted average number of production
/// stages separating input h from output k,
///   [D (I-D)^{-2}]_hk / [(I-D)^{-1} - I]_hk.
/// Pairs with no connecting path are NaN (absent). Defined entries are >= 1.
inline Matrix upstreamness_matrix(const Matrix& D) {
    Matrix total = leontief_inverse_matrix(D);
    const Eigen::Index m = D.rows();
    Matrix stage_weighted = D * total * total;          // sum_n n D^n
    Matrix any_path = total - Matrix::Identity(m, m);   // sum_n D^n, n >= 1
    Matrix out(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index h = 0; h < m; ++h) {
            out(h, k) = any_path(h, k) > 0.0 ? stage_weighted(h, k) / any_path(h, k)
                                             : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

/// DUse/TUse Downstreamness: share of an industry's total (direct plus
/// indirect) use reached within one production stage. 1 for pure final-good
/// industries; NaN when the industry has no use at all.
inline Vector downstreamness_dusetuse(const Matrix& D, const Vector& F) {
    if (F.size() != D.rows()) throw StructuralError("F length != D dimension");
    Matrix total = leontief_inverse_matrix(D);
    Vector direct = F + D * F;        // own final demand + one-stage-removed final demand
    Vector total_use = total * F;
    Vector out(F.size());
    for (Eigen::Index i = 0; i < F.size(); ++i) {
        out(i) = total_use(i) > 0.0 ? direct(i) / total_use(i)
                                    : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

enum class RankMetric { InputRank, InputRankDampened, Leontief, Upstreamness };

inline std::string to_string(RankMetric m) {
    switch (m) {
        case RankMetric::InputRank: return "input_rank";
        case RankMetric::InputRankDampened: return "input_rank_dampened";
        case RankMetric::Leontief: return "leontief";
        case RankMetric::Upstreamness: return "upstreamness";
    }
    return "unknown";
}

/// A dense matrix of bilateral scores: values(h, k) scores origin h for
/// destination k. NaN marks undefined entries.
struct RankMatrix {
    std::vector<std::string> sectors;
    std::map<std::string, std::string> country_of;
    Matrix values;
    RankMetric metric = RankMetric::InputRank;
    double chi = 1.0;  // scalar damping tag; NaN when per-sector chi was used

    std::size_t size() const { return sectors.size(); }

    std::optional<std::size_t> index_of(const std::string& sector) const {
        for (std::size_t i = 0; i < sectors.size(); ++i) {
            if (sectors[i] == sector) return i;
        }
        return std::nullopt;
    }

    std::string country(const std::string& sector) const {
        auto it = country_of.find(sector);
        return it == country_of.end() ? std::string() : it->second;
    }
};

inline RankMatrix input_rank(const TechNetwork& net) {
    RankMatrix r;
    r.sectors = net.sectors;
    r.country_of = net.country_of;
    r.values = input_rank_matrix(net.G, net.alpha, &net.sectors);
    r.metric = RankMetric::InputRank;
    return r;
}

inline RankMatrix input_rank_dampened(const TechNetwork& net, const Vector& chi) {
    RankMatrix r;
    r.sectors = net.sectors;
    r.country_of = net.country_of;
    r.values = input_rank_dampened_matrix(net.G, net.alpha, chi, &net.sectors);
    r.metric = RankMetric::InputRankDampened;
    bool uniform = true;
    for (Eigen::Index i = 1; i < chi.size(); ++i) uniform = uniform && chi(i) == chi(0);
    r.chi = uniform && chi.size() > 0 ? chi(0) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

inline RankMatrix input_rank_dampened(const TechNetwork& net, double chi) {
    return input_rank_dampened(net, Vector::Constant(static_cast<Eigen::Index>(net.size()), chi));
}

inline RankMatrix leontief_inverse(const TechNetwork& net) {
    RankMatrix r;
    r.sectors = net.sectors;
    r.country_of = net.country_of;
    r.values = leontief_inverse_matrix(net.D, &net.sectors);
    r.metric = RankMetric::Leontief;
    return r;
}

inline RankMatrix upstreamness_bilateral(const TechNetwork& net) {
    RankMatrix r;
    r.sectors = net.sectors;
    r.country_of = net.country_of;
    r.values = upstreamness_matrix(net.D);
    r.metric = RankMetric::Upstreamness;
    return r;
}

/// Shock-elasticity view: subtracts the bookkeeping identity term from the
/// diagonal, turning (I - GA)^{-1} into the matrix of marginal-cost
/// elasticities d log lambda_k / d log tau_h for every pair including h = k.
/// Ranked reports and published-style tables use this view; metrics that are
/// not Neumann series pass through unchanged.
inline RankMatrix elasticity_view(const RankMatrix& rank) {
    RankMatrix out = rank;
    if (rank.metric == RankMetric::InputRank || rank.metric == RankMetric::InputRankDampened) {
        out.values.diagonal().array() -= 1.0;
    }
    return out;
}

struct RankedEntry {
    long rank = 0;
    std::string sector;
    double value = 0.0;
};

/// Top-n origins for one destination column, descending by score with ties
/// broken by sector id ascending. The destination's own entry competes like
/// any other. n larger than the matrix returns the full column.
inline std::vector<RankedEntry> report_top_inputs(const RankMatrix& rank,
                                                  const std::string& destination, std::size_t n) {
    auto dest = rank.index_of(destination);
    if (!dest) throw CompletenessError("unknown sector '" + destination + "'");
    const auto k = static_cast<Eigen::Index>(*dest);
    std::vector<std::size_t> order;
    for (std::size_t h = 0; h < rank.size(); ++h) {
        if (!std::isnan(rank.values(static_cast<Eigen::Index>(h), k))) order.push_back(h);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double va = rank.values(static_cast<Eigen::Index>(a), k);
        double vb = rank.values(static_cast<Eigen::Index>(b), k);
        if (va != vb) return va > vb;
        return rank.sectors[a] < rank.sectors[b];
    });
    if (n < order.size()) order.resize(n);
    std::vector<RankedEntry> out;
    out.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.push_back({static_cast<long>(i + 1), rank.sectors[order[i]],
                       rank.values(static_cast<Eigen::Index>(order[i]), k)});
    }
    return out;
}

struct GroupAverage {
    std::string group;
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation
    long count = 0;
};

enum class OriginGrouping { Sector, Industry, Country };

/// Unweighted mean and population sd of scores grouped by origin sector, by
/// origin industry (the part after the country prefix), or by origin country,
/// over all destinations (optionally restricted to one destination country).
/// NaN entries are skipped; nothing else is excluded. Sorted descending by
/// mean, ties broken by group id.
inline std::vector<GroupAverage> report_average_by_origin(
    const RankMatrix& rank, OriginGrouping grouping,
    const std::optional<std::string>& destination_country = std::nullopt) {
    const auto m = static_cast<Eigen::Index>(rank.size());
    std::vector<Eigen::Index> dests;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (destination_country &&
            rank.country(rank.sectors[static_cast<std::size_t>(k)]) != *destination_country) {
            continue;
        }
        dests.push_back(k);
    }

    std::map<std::string, std::vector<double>> buckets;
    for (Eigen::Index h = 0; h < m; ++h) {
        const std::string& sector = rank.sectors[static_cast<std::size_t>(h)];
        std::string group;
        if (grouping == OriginGrouping::Sector) {
            group = sector;
        } else if (grouping == OriginGrouping::Industry) {
            group = RawIOTable::industry_part(sector);
        } else {
            group = rank.country(sector);
            if (group.empty()) {
                throw CompletenessError("country grouping requires country labels; sector '" +
                                        sector + "' has none");
            }
        }
        auto& bucket = buckets[group];
        for (Eigen::Index k : dests) {
            double v = rank.values(h, k);
            if (!std::isnan(v)) bucket.push_back(v);
        }
    }

    std::vector<GroupAverage> out;
    for (const auto& [group, values] : buckets) {
        GroupAverage g;
        g.group = group;
        g.count = static_cast<long>(values.size());
        if (!values.empty()) {
            double sum = 0.0;
            for (double v : values) sum += v;
            g.mean = sum / static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - g.mean) * (v - g.mean);
            g.sd = std::sqrt(ss / static_cast<double>(values.size()));
        }
        out.push_back(g);
    }
    std::stable_sort(out.begin(), out.end(), [](const GroupAverage& a, const GroupAverage& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.group < b.group;
    });
    return out;
}

/// Locates the visibility level chi* in (0, 1) where a distant multi-path
/// supplier overtakes a one-hop supplier in the ranking for `dest`, if such a
/// crossing exists: near outranks far below chi*, far outranks near above it.
inline std::optional<double> find_rank_crossing(const Matrix& G, const Vector& alpha,
                                                Eigen::Index near_origin, Eigen::Index far_origin,
                                                Eigen::Index dest, int grid_points = 64,
                                                double tol = 1e-10) {
    auto gap = [&](double chi) {
        Vector col = dampened_column(G, alpha, chi, dest);
        return col(far_origin) - col(near_origin);
    };
    double prev_chi = 0.0;
    double prev_gap = gap(0.0);
    for (int i = 1; i <= grid_points; ++i) {
        double chi = static_cast<double>(i) / grid_points;
        double g = gap(chi);
        if (prev_gap < 0.0 && g >= 0.0) {
            // bisect [prev_chi, chi]
            double lo = prev_chi, hi = chi;
            while (hi - lo > tol) {
                double mid = 0.5 * (lo + hi);
                if (gap(mid) < 0.0) lo = mid;
                else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev_chi = chi;
        prev_gap = g;
    }
    return std::nullopt;
}

}  // namespace gvcrank
