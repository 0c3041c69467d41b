#pragma once

// Reference implementations used only to verify the production code. Each is
// the naive O(n^2) (or explicit-dummy) version of a quantity computed more
// cleverly elsewhere, and deliberately shares no helpers with the production
// path beyond Eigen itself.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "gvcrank/regression.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank::oracle {

/// Mid-ranks by pair counting: rank_i = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
inline std::vector<double> midranks_by_counting(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] < x[i]) ++less;
            else if (x[j] == x[i]) ++equal;
        }
        ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

/// Spearman's rho from counted mid-ranks and a left-to-right Pearson pass.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    auto rx = midranks_by_counting(x);
    auto ry = midranks_by_counting(y);
    const std::size_t n = rx.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += rx[i];
        sy += ry[i];
        sxx += rx[i] * rx[i];
        syy += ry[i] * ry[i];
        sxy += rx[i] * ry[i];
    }
    const double dn = static_cast<double>(n);
    double vx = dn * sxx - sx * sx;
    double vy = dn * syy - sy * sy;
    if (vx <= 0.0 || vy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (dn * sxy - sx * sy) / (std::sqrt(vx) * std::sqrt(vy));
}

/// Kendall's tau-b by direct enumeration of all pairs.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::int64_t concordant = 0, discordant = 0, tied_in_x = 0, tied_in_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (x[i] == x[j]) ++tied_in_x;
            if (y[i] == y[j]) ++tied_in_y;
            if (x[i] == x[j] || y[i] == y[j]) continue;
            if ((x[i] > x[j]) == (y[i] > y[j])) ++concordant;
            else ++discordant;
        }
    }
    const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    std::int64_t dx = n0 - tied_in_x;
    std::int64_t dy = n0 - tied_in_y;
    if (dx <= 0 || dy <= 0) return std::numeric_limits<double>::quiet_NaN();
    std::int64_t numerator = concordant - discordant;
    return static_cast<double>(numerator) /
           (std::sqrt(static_cast<double>(dx)) * std::sqrt(static_cast<double>(dy)));
}

/// One-way cluster sandwich assembled with plain loops.
inline Matrix one_way_cluster_vcov(const Matrix& X, const Vector& e,
                                   const std::vector<int>& cluster, bool small_sample) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    Matrix bread = (X.transpose() * X).inverse();
    std::map<int, Eigen::RowVectorXd> sums;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, inserted] = sums.try_emplace(cluster[static_cast<std::size_t>(i)],
                                               Eigen::RowVectorXd::Zero(k));
        it->second += X.row(i) * e(i);
    }
    Matrix meat = Matrix::Zero(k, k);
    for (const auto& [g, s] : sums) meat += s.transpose() * s;
    double c = 1.0;
    if (small_sample) {
        auto groups = static_cast<double>(sums.size());
        c = (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - static_cast<double>(k));
        if (groups > 1.0) c *= groups / (groups - 1.0);
    }
    return c * bread * meat * bread;
}

/// Two-dimension CGM covariance as the explicit three-term inclusion-exclusion
/// V(dim1) + V(dim2) - V(dim1 x dim2).
inline Matrix cgm_two_way_vcov(const Matrix& X, const Vector& e, const std::vector<int>& dim1,
                               const std::vector<int>& dim2, bool small_sample = true) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    std::vector<int> interaction(n);
    std::map<std::pair<int, int>, int> pair_code;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] =
            pair_code.try_emplace({dim1[i], dim2[i]}, static_cast<int>(pair_code.size()));
        interaction[i] = it->second;
    }
    return one_way_cluster_vcov(X, e, dim1, small_sample) +
           one_way_cluster_vcov(X, e, dim2, small_sample) -
           one_way_cluster_vcov(X, e, interaction, small_sample);
}

/// HC0 sandwich (no small-sample factor): B (sum_i x_i x_i' e_i^2) B.
inline Matrix hc0_vcov(const Matrix& X, const Vector& e) {
    const Eigen::Index k = X.cols();
    Matrix bread = (X.transpose() * X).inverse();
    Matrix meat = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        meat += X.row(i).transpose() * X.row(i) * e(i) * e(i);
    }
    return bread * meat * bread;
}

/// Fixed-effects regression by explicit dummy variables: returns the
/// coefficients on the X columns after stacking one dummy per FE level
/// (dropping one level per extra dimension to avoid perfect collinearity).
inline Vector dummy_fe_ols(const Vector& y, const Matrix& X,
                           const std::vector<CategoricalDim>& fe) {
    const Eigen::Index n = y.size();
    const Eigen::Index k = X.cols();
    Eigen::Index extra = 0;
    for (std::size_t d = 0; d < fe.size(); ++d) {
        extra += fe[d].group_count() - (d > 0 ? 1 : 0);
    }
    Matrix design(n, k + extra);
    design.leftCols(k) = X;
    Eigen::Index col = k;
    for (std::size_t d = 0; d < fe.size(); ++d) {
        int skip = d > 0 ? 0 : -1;  // drop the first level of every dimension after the first
        for (int level = 0; level < fe[d].group_count(); ++level) {
            if (level == skip) continue;
            for (Eigen::Index i = 0; i < n; ++i) {
                design(i, col) = fe[d].codes[static_cast<std::size_t>(i)] == level ? 1.0 : 0.0;
            }
            ++col;
        }
    }
    Vector beta = design.colPivHouseholderQr().solve(y);
    return beta.head(k);
}

}  // namespace gvcrank::oracle
