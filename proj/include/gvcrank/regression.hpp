#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "gvcrank/errors.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

/// One categorical dimension (fixed-effect or cluster): per-observation codes
/// plus the level labels. Codes follow first appearance, so relabeling ids
/// changes nothing downstream.
struct CategoricalDim {
    std::string name;
    std::vector<int> codes;
    std::vector<std::string> levels;

    long group_count() const { return static_cast<long>(levels.size()); }
};

inline CategoricalDim encode_dimension(const std::string& name,
                                       const std::vector<std::string>& ids) {
    CategoricalDim dim;
    dim.name = name;
    dim.codes.reserve(ids.size());
    std::unordered_map<std::string, int> index;
    for (const auto& id : ids) {
        if (id.empty()) throw DomainError("empty id in dimension '" + name + "'");
        auto [it, inserted] = index.try_emplace(id, static_cast<int>(dim.levels.size()));
        if (inserted) dim.levels.push_back(id);
        dim.codes.push_back(it->second);
    }
    return dim;
}

/// Estimation sample: outcome, regressors, fixed-effect dimensions to absorb,
/// and cluster dimensions for the covariance.
struct Sample {
    Vector y;
    Matrix X;
    std::vector<std::string> regressor_names;
    std::vector<CategoricalDim> fixed_effects;
    std::vector<CategoricalDim> clusters;

    long n() const { return static_cast<long>(y.size()); }

    void validate() const {
        if (X.rows() != y.size()) throw StructuralError("X rows != y length");
        if (static_cast<Eigen::Index>(regressor_names.size()) != X.cols()) {
            throw StructuralError("regressor_names length != X columns");
        }
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (std::isnan(y(i))) throw DomainError("missing value in outcome");
        }
        if (X.size() > 0 && X.hasNaN()) throw DomainError("missing value in regressors");
        for (const auto& dim : fixed_effects) {
            if (static_cast<Eigen::Index>(dim.codes.size()) != y.size()) {
                throw StructuralError("fixed-effect dimension '" + dim.name + "' length mismatch");
            }
        }
        for (const auto& dim : clusters) {
            if (static_cast<Eigen::Index>(dim.codes.size()) != y.size()) {
                throw StructuralError("cluster dimension '" + dim.name + "' length mismatch");
            }
        }
    }
};

struct WithinResult {
    Vector y;
    Matrix X;
    int sweeps = 0;
};

/// Demeans outcome and regressors by alternating projections over the
/// fixed-effect groups until every group mean is below tol in magnitude.
/// One dimension converges in a single sweep; intersecting subspaces make the
/// general case converge geometrically.
inline WithinResult fe_within(const Sample& sample, double tol = 1e-10, int max_sweeps = 1000) {
    sample.validate();
    if (sample.fixed_effects.empty()) throw DomainError("fe_within needs at least one FE dimension");
    WithinResult out{sample.y, sample.X, 0};
    const Eigen::Index n = out.y.size();
    const Eigen::Index k = out.X.cols();

    auto group_means = [&](const CategoricalDim& dim, const Vector& v) {
        std::vector<double> sums(static_cast<std::size_t>(dim.group_count()), 0.0);
        std::vector<long> counts(static_cast<std::size_t>(dim.group_count()), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums[static_cast<std::size_t>(dim.codes[static_cast<std::size_t>(i)])] += v(i);
            ++counts[static_cast<std::size_t>(dim.codes[static_cast<std::size_t>(i)])];
        }
        for (std::size_t g = 0; g < sums.size(); ++g) {
            if (counts[g] > 0) sums[g] /= static_cast<double>(counts[g]);
        }
        return sums;
    };
    auto demean = [&](const CategoricalDim& dim, Vector& v) {
        auto means = group_means(dim, v);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) -= means[static_cast<std::size_t>(dim.codes[static_cast<std::size_t>(i)])];
        }
    };
    auto max_abs_group_mean = [&]() {
        double worst = 0.0;
        for (const auto& dim : sample.fixed_effects) {
            auto check = [&](const Vector& v) {
                for (double m : group_means(dim, v)) worst = std::max(worst, std::abs(m));
            };
            check(out.y);
            for (Eigen::Index c = 0; c < k; ++c) {
                Vector col = out.X.col(c);
                check(col);
            }
        }
        return worst;
    };

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (const auto& dim : sample.fixed_effects) {
            demean(dim, out.y);
            for (Eigen::Index c = 0; c < k; ++c) {
                Vector col = out.X.col(c);
                demean(dim, col);
                out.X.col(c) = col;
            }
        }
        out.sweeps = sweep;
        if (max_abs_group_mean() <= tol) return out;
    }
    throw NumericalError("fixed-effect demeaning did not converge within " +
                         std::to_string(max_sweeps) + " sweeps");
}

struct OlsFit {
    Vector coef;                      // NaN at dropped columns
    std::vector<Eigen::Index> kept;   // retained column indices, ascending
    std::vector<std::string> dropped;
    Vector residuals;
    long n = 0;
    int rank = 0;
};

/// Least squares via column-pivoted QR. Collinear columns (pivot below 1e-8
/// relative) are dropped and reported, mirroring standard estimation software.
inline OlsFit ols_qr(const Vector& y, const Matrix& X,
                     const std::vector<std::string>& names) {
    OlsFit fit;
    fit.n = static_cast<long>(y.size());
    const Eigen::Index k = X.cols();
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    qr.setThreshold(1e-8);
    fit.rank = static_cast<int>(qr.rank());
    fit.coef = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
    if (fit.rank == 0) {
        for (Eigen::Index c = 0; c < k; ++c) fit.dropped.push_back(names[static_cast<std::size_t>(c)]);
        fit.residuals = y;
        return fit;
    }
    if (fit.rank == static_cast<int>(k)) {
        Vector b = qr.solve(y);
        fit.coef = b;
        for (Eigen::Index c = 0; c < k; ++c) fit.kept.push_back(c);
        fit.residuals = y - X * b;
        return fit;
    }
    // Refit on the independent columns chosen by pivoting.
    const auto& perm = qr.colsPermutation().indices();
    std::vector<Eigen::Index> kept;
    for (int r = 0; r < fit.rank; ++r) kept.push_back(perm(r));
    std::sort(kept.begin(), kept.end());
    Matrix Xk(X.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) Xk.col(static_cast<Eigen::Index>(j)) = X.col(kept[j]);
    Vector b = Xk.householderQr().solve(y);
    for (std::size_t j = 0; j < kept.size(); ++j) fit.coef(kept[j]) = b(static_cast<Eigen::Index>(j));
    fit.kept = kept;
    for (Eigen::Index c = 0; c < k; ++c) {
        if (std::find(kept.begin(), kept.end(), c) == kept.end()) {
            fit.dropped.push_back(names[static_cast<std::size_t>(c)]);
        }
    }
    fit.residuals = y - Xk * b;
    return fit;
}

struct CgmOptions {
    bool small_sample = true;  // per-term (n-1)/(n-k) * G/(G-1)
};

struct CgmResult {
    Matrix vcov;
    int negative_eigen_repairs = 0;     // eigenvalues floored at zero
    std::vector<long> cluster_counts;   // groups per single dimension
    std::vector<std::string> warnings;
};

/// Multiway cluster-robust covariance by inclusion-exclusion: over every
/// non-empty subset S of cluster dimensions, add (-1)^{|S|+1} times the
/// one-way sandwich clustered on the interaction of the dimensions in S.
/// Four dimensions produce 15 terms. The assembled matrix is symmetrized and
/// negative eigenvalues are floored at zero (repair count reported).
inline CgmResult cgm_multiway_vcov(const Matrix& X, const Vector& residuals,
                                   const std::vector<CategoricalDim>& dims,
                                   const CgmOptions& options = {}) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (residuals.size() != n) throw StructuralError("residuals length != X rows");
    if (dims.empty() || dims.size() > 4) {
        throw DomainError("cgm_multiway_vcov supports 1 to 4 cluster dimensions");
    }
    for (const auto& dim : dims) {
        if (static_cast<Eigen::Index>(dim.codes.size()) != n) {
            throw StructuralError("cluster dimension '" + dim.name + "' length mismatch");
        }
    }

    CgmResult result;
    Matrix xtx = X.transpose() * X;
    Matrix bread = Eigen::PartialPivLU<Matrix>(xtx).solve(Matrix::Identity(k, k));

    Matrix scores(n, k);  // score_i = x_i * e_i
    for (Eigen::Index i = 0; i < n; ++i) scores.row(i) = X.row(i) * residuals(i);

    const int d = static_cast<int>(dims.size());
    Matrix vcov = Matrix::Zero(k, k);
    for (int subset = 1; subset < (1 << d); ++subset) {
        // Interaction key: pack member-dimension codes into 16-bit lanes.
        std::unordered_map<std::uint64_t, Eigen::Index> group_of;
        std::vector<Eigen::RowVectorXd> group_sums;
        group_sums.reserve(64);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::uint64_t key = 0;
            for (int dd = 0; dd < d; ++dd) {
                if (!(subset & (1 << dd))) continue;
                auto code = static_cast<std::uint64_t>(dims[static_cast<std::size_t>(dd)]
                                                           .codes[static_cast<std::size_t>(i)]);
                if (code >= (1ull << 16)) throw DomainError("cluster dimension too large (>= 65536 groups)");
                key = (key << 16) | code;
            }
            auto [it, inserted] = group_of.try_emplace(key, static_cast<Eigen::Index>(group_sums.size()));
            if (inserted) group_sums.emplace_back(Eigen::RowVectorXd::Zero(k));
            group_sums[static_cast<std::size_t>(it->second)] += scores.row(i);
        }
        const auto groups = static_cast<long>(group_sums.size());
        Matrix meat = Matrix::Zero(k, k);
        for (const auto& s : group_sums) meat += s.transpose() * s;

        double c = 1.0;
        if (options.small_sample) {
            c = (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - static_cast<double>(k));
            if (groups > 1) {
                c *= static_cast<double>(groups) / (static_cast<double>(groups) - 1.0);
            }
        }
        if (groups <= 1) {
            std::string members;
            for (int dd = 0; dd < d; ++dd) {
                if (subset & (1 << dd)) {
                    if (!members.empty()) members += "*";
                    members += dims[static_cast<std::size_t>(dd)].name;
                }
            }
            result.warnings.push_back("cluster dimension '" + members +
                                      "' has a single cluster; term computed without G/(G-1)");
        }
        int popcount = 0;
        for (int dd = 0; dd < d; ++dd) popcount += (subset >> dd) & 1;
        double sign = (popcount % 2 == 1) ? 1.0 : -1.0;
        vcov += sign * c * (bread * meat * bread);
    }

    vcov = 0.5 * (vcov + vcov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(vcov);
    if (eig.eigenvalues().minCoeff() < 0.0) {
        Vector vals = eig.eigenvalues();
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
            if (vals(i) < 0.0) {
                vals(i) = 0.0;
                ++result.negative_eigen_repairs;
            }
        }
        vcov = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
    }
    result.vcov = vcov;
    for (const auto& dim : dims) result.cluster_counts.push_back(dim.group_count());
    return result;
}

/// Coefficients, cluster-robust covariance and fit diagnostics for a
/// fixed-effects regression.
struct RegressionResult {
    std::vector<std::string> names;
    Vector coef;  // NaN at dropped columns
    Matrix vcov;  // NaN rows/cols at dropped columns
    Vector se;
    double constant = std::numeric_limits<double>::quiet_NaN();
    double r2 = 0.0;
    double adj_r2 = 0.0;
    long n = 0;
    std::vector<long> cluster_counts;
    int vcov_repairs = 0;
    int fe_sweeps = 0;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;
};

/// Fixed-effects OLS with multiway cluster-robust errors: absorbs the FE
/// dimensions by demeaning, fits by QR, and computes the CGM covariance on
/// the retained regressors. R-squared is measured against the untransformed
/// outcome, with the absorbed FE levels counted in the adjustment
///   adj R2 = 1 - (1 - R2) (n - 1) / (n - p),  p = 1 + k + sum_d (G_d - 1).
inline RegressionResult fe_ols(const Sample& sample, const CgmOptions& cgm_options = {}) {
    sample.validate();
    if (sample.n() < 2) throw EstimationError("sample too small");

    RegressionResult result;
    result.names = sample.regressor_names;
    result.n = sample.n();

    Vector y = sample.y;
    Matrix X = sample.X;
    if (!sample.fixed_effects.empty()) {
        WithinResult within = fe_within(sample);
        y = within.y;
        X = within.X;
        result.fe_sweeps = within.sweeps;
    }

    OlsFit fit = ols_qr(y, X, sample.regressor_names);
    if (fit.kept.empty() && X.cols() > 0) {
        result.warnings.push_back("all regressors collinear after FE absorption");
    }
    result.coef = fit.coef;
    result.dropped = fit.dropped;
    for (const auto& name : fit.dropped) {
        result.warnings.push_back("dropped collinear regressor '" + name + "'");
    }

    const Eigen::Index k = X.cols();
    result.vcov = Matrix::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
    result.se = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
    if (!fit.kept.empty() && !sample.clusters.empty()) {
        Matrix Xk(X.rows(), static_cast<Eigen::Index>(fit.kept.size()));
        for (std::size_t j = 0; j < fit.kept.size(); ++j) {
            Xk.col(static_cast<Eigen::Index>(j)) = X.col(fit.kept[j]);
        }
        CgmResult cgm = cgm_multiway_vcov(Xk, fit.residuals, sample.clusters, cgm_options);
        result.cluster_counts = cgm.cluster_counts;
        result.vcov_repairs = cgm.negative_eigen_repairs;
        for (const auto& w : cgm.warnings) result.warnings.push_back(w);
        for (std::size_t a = 0; a < fit.kept.size(); ++a) {
            for (std::size_t b = 0; b < fit.kept.size(); ++b) {
                result.vcov(fit.kept[a], fit.kept[b]) =
                    cgm.vcov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
            result.se(fit.kept[a]) =
                std::sqrt(std::max(0.0, cgm.vcov(static_cast<Eigen::Index>(a),
                                                 static_cast<Eigen::Index>(a))));
        }
    }

    // Constant recovered from grand means; fit measured on the original outcome.
    double y_mean = sample.y.mean();
    double xb_mean = 0.0;
    for (Eigen::Index c : fit.kept) {
        xb_mean += sample.X.col(c).mean() * fit.coef(c);
    }
    result.constant = y_mean - xb_mean;

    double sst = (sample.y.array() - y_mean).square().sum();
    double ssr = fit.residuals.squaredNorm();
    result.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    double params = 1.0 + static_cast<double>(fit.kept.size());
    for (const auto& dim : sample.fixed_effects) {
        params += static_cast<double>(dim.group_count() - 1);
    }
    double denom = static_cast<double>(result.n) - params;
    result.adj_r2 = denom > 0.0
                        ? 1.0 - (1.0 - result.r2) * (static_cast<double>(result.n) - 1.0) / denom
                        : std::numeric_limits<double>::quiet_NaN();
    return result;
}

/// Two-sided normal p-value for a t statistic.
inline double normal_pvalue(double t) {
    return std::erfc(std::abs(t) / std::sqrt(2.0));
}

inline std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace gvcrank
