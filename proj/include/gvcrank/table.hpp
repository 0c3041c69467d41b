#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gvcrank/errors.hpp"

namespace gvcrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative tolerance for the gross-output accounting identity on
/// real-world tables (published tables carry rounding noise).
inline constexpr double kDefaultAccountingTol = 1e-2;

/// Relative tolerance applied to tables emitted by the equilibrium module,
/// which satisfy market clearing by construction.
inline constexpr double kSyntheticAccountingTol = 1e-8;

/// An input-output table in canonical in-memory form. flows(h, k) is the value
/// of deliveries from sector h to sector k. All downstream matrices share the
/// sector index fixed here.
struct RawIOTable {
    std::vector<std::string> sectors;
    Matrix flows;           // M x M
    Vector final_demand;    // length M
    Vector value_added;     // length M
    Vector gross_output;    // length M
    std::map<std::string, std::string> country_of;  // empty for single-country tables

    std::size_t size() const { return sectors.size(); }

    std::optional<std::size_t> index_of(const std::string& sector) const {
        for (std::size_t i = 0; i < sectors.size(); ++i) {
            if (sectors[i] == sector) return i;
        }
        return std::nullopt;
    }

    /// Country code of a sector, empty string when the table has none.
    std::string country(const std::string& sector) const {
        auto it = country_of.find(sector);
        return it == country_of.end() ? std::string() : it->second;
    }

    /// Industry part of a sector id ("DEU:C29" -> "C29"; plain ids unchanged).
    static std::string industry_part(const std::string& sector) {
        auto pos = sector.find(':');
        return pos == std::string::npos ? sector : sector.substr(pos + 1);
    }
};

/// Outcome of clean(): per-sector relative accounting residuals plus cleanup counters.
struct ValidationReport {
    std::vector<double> residuals;                 // |Y - (row sum of Z + F)| / max(1, Y)
    long clamped_cells = 0;                        // negative cells set to zero
    std::vector<std::string> zero_purchase_sectors;  // sectors with no intermediate purchases
    double tolerance = kDefaultAccountingTol;
    bool pass = false;

    double max_residual() const {
        double m = 0.0;
        for (double r : residuals) m = std::max(m, r);
        return m;
    }
};

/// Clamps negative cells to zero (Z, F, VA, Y), recomputes accounting residuals
/// against `tol`, and reports. Never throws: cleaning reports, it does not reject.
inline std::pair<RawIOTable, ValidationReport> clean(const RawIOTable& table,
                                                     double tol = kDefaultAccountingTol) {
    RawIOTable out = table;
    ValidationReport report;
    report.tolerance = tol;

    const Eigen::Index m = out.flows.rows();
    for (Eigen::Index k = 0; k < out.flows.cols(); ++k) {
        for (Eigen::Index h = 0; h < m; ++h) {
            if (out.flows(h, k) < 0.0) {
                out.flows(h, k) = 0.0;
                ++report.clamped_cells;
            }
        }
    }
    auto clamp_vec = [&report](Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (v(i) < 0.0) {
                v(i) = 0.0;
                ++report.clamped_cells;
            }
        }
    };
    clamp_vec(out.final_demand);
    clamp_vec(out.value_added);
    clamp_vec(out.gross_output);

    report.residuals.resize(static_cast<std::size_t>(m));
    for (Eigen::Index h = 0; h < m; ++h) {
        double supplied = out.flows.row(h).sum() + out.final_demand(h);
        double y = out.gross_output(h);
        report.residuals[static_cast<std::size_t>(h)] =
            std::abs(y - supplied) / std::max(1.0, y);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
        if (out.flows.col(k).sum() == 0.0) {
            report.zero_purchase_sectors.push_back(out.sectors[static_cast<std::size_t>(k)]);
        }
    }
    report.pass = report.max_residual() <= tol;
    return {std::move(out), report};
}

/// Sums flows, F, VA and Y within groups. The mapping must cover every sector.
/// Group order follows first appearance in the original sector order, so the
/// identity mapping returns an identical table.
inline RawIOTable aggregate_sectors(const RawIOTable& table,
                                    const std::map<std::string, std::string>& mapping) {
    const std::size_t m = table.size();
    std::vector<std::string> groups;
    std::unordered_map<std::string, std::size_t> group_index;
    std::vector<std::size_t> member_group(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto it = mapping.find(table.sectors[i]);
        if (it == mapping.end()) {
            throw CompletenessError("aggregation mapping misses sector '" + table.sectors[i] + "'");
        }
        auto [git, inserted] = group_index.try_emplace(it->second, groups.size());
        if (inserted) groups.push_back(it->second);
        member_group[i] = git->second;
    }

    const std::size_t g = groups.size();
    RawIOTable out;
    out.sectors = groups;
    out.flows = Matrix::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
    out.final_demand = Vector::Zero(static_cast<Eigen::Index>(g));
    out.value_added = Vector::Zero(static_cast<Eigen::Index>(g));
    out.gross_output = Vector::Zero(static_cast<Eigen::Index>(g));
    for (std::size_t h = 0; h < m; ++h) {
        const auto gh = static_cast<Eigen::Index>(member_group[h]);
        for (std::size_t k = 0; k < m; ++k) {
            out.flows(gh, static_cast<Eigen::Index>(member_group[k])) +=
                table.flows(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k));
        }
        out.final_demand(gh) += table.final_demand(static_cast<Eigen::Index>(h));
        out.value_added(gh) += table.value_added(static_cast<Eigen::Index>(h));
        out.gross_output(gh) += table.gross_output(static_cast<Eigen::Index>(h));
    }

    // A group keeps a country only when all members agree on one.
    for (std::size_t gi = 0; gi < g; ++gi) {
        std::string country;
        bool uniform = true, first = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (member_group[i] != gi) continue;
            std::string c = table.country(table.sectors[i]);
            if (first) {
                country = c;
                first = false;
            } else if (c != country) {
                uniform = false;
                break;
            }
        }
        if (uniform && !country.empty()) out.country_of[groups[gi]] = country;
    }
    return out;
}

/// Removes the listed sectors (rows and columns) from the table. Used to apply
/// an exclusion list before analysis; deliveries to or from excluded sectors
/// leave the accounting identity of the remaining rows, so re-validate with an
/// appropriate tolerance afterwards.
inline RawIOTable drop_sectors(const RawIOTable& table, const std::vector<std::string>& excluded) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (std::find(excluded.begin(), excluded.end(), table.sectors[i]) == excluded.end()) {
            keep.push_back(i);
        }
    }
    RawIOTable out;
    const auto n = static_cast<Eigen::Index>(keep.size());
    out.flows.resize(n, n);
    out.final_demand.resize(n);
    out.value_added.resize(n);
    out.gross_output.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]);
        out.sectors.push_back(table.sectors[keep[static_cast<std::size_t>(i)]]);
        out.final_demand(i) = table.final_demand(src);
        out.value_added(i) = table.value_added(src);
        out.gross_output(i) = table.gross_output(src);
        for (Eigen::Index j = 0; j < n; ++j) {
            out.flows(i, j) = table.flows(src, static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]));
        }
    }
    for (const auto& s : out.sectors) {
        auto it = table.country_of.find(s);
        if (it != table.country_of.end()) out.country_of[s] = it->second;
    }
    return out;
}

}  // namespace gvcrank
