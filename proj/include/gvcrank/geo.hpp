#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gvcrank/errors.hpp"
#include "gvcrank/rank.hpp"
#include "gvcrank/regression.hpp"

namespace gvcrank {

/// Country -> region assignment used for the Intraregion indicator.
struct RegionMap {
    std::map<std::string, std::string> region_of;

    std::string region(const std::string& country) const {
        auto it = region_of.find(country);
        return it == region_of.end() ? std::string() : it->second;
    }

    std::vector<std::string> members(const std::string& region) const {
        std::vector<std::string> out;
        for (const auto& [country, r] : region_of) {
            if (r == region) out.push_back(country);
        }
        return out;
    }

    /// Default trade blocs over WIOD country codes: the EU-28, NAFTA, and the
    /// ASEAN-plus-six grouping (Australia counts as part of the Asian bloc).
    static RegionMap builtin_default() {
        RegionMap map;
        const std::vector<std::string> eu = {
            "AUT", "BEL", "BGR", "HRV", "CYP", "CZE", "DNK", "EST", "FIN", "FRA",
            "DEU", "GRC", "HUN", "IRL", "ITA", "LVA", "LTU", "LUX", "MLT", "NLD",
            "POL", "PRT", "ROU", "SVK", "SVN", "ESP", "SWE", "GBR"};
        const std::vector<std::string> nafta = {"USA", "CAN", "MEX"};
        const std::vector<std::string> asean6 = {"CHN", "IDN", "IND", "JPN", "KOR", "TWN", "AUS"};
        for (const auto& c : eu) map.region_of[c] = "EU";
        for (const auto& c : nafta) map.region_of[c] = "NAFTA";
        for (const auto& c : asean6) map.region_of[c] = "ASEAN";
        return map;
    }

    /// JSON form: {"regions": {"EU": ["AUT", ...], ...}}
    static RegionMap from_json_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open region map " + path.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid region map JSON: " + std::string(e.what()));
        }
        if (!j.contains("regions") || !j["regions"].is_object()) {
            throw ConfigError("region map needs a top-level 'regions' object");
        }
        RegionMap map;
        for (auto it = j["regions"].begin(); it != j["regions"].end(); ++it) {
            for (const auto& country : *it) {
                map.region_of[country.get<std::string>()] = it.key();
            }
        }
        return map;
    }
};

/// Which pairs enter the pecking-order regression.
struct GeoScope {
    std::vector<std::string> destination_countries;
    bool manufacturing_only = false;
    std::vector<std::string> manufacturing_prefixes = {"C"};  // ISIC section C
    bool include_row_origins = true;   // keep the rest-of-world closure as an origin
    bool include_diagonal = true;      // keep own-sector pairs
    std::string row_code = "ROW";
};

struct GeoPremiumResult {
    RegressionResult regression;
    long zeros_excluded = 0;  // non-positive scores dropped before taking logs
    long pairs_considered = 0;
};

namespace detail {

inline bool has_prefix(const std::string& s, const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes) {
        if (s.rfind(p, 0) == 0) return true;
    }
    return false;
}

}  // namespace detail

/// Regresses log scores on Domestic and Intraregion indicators with
/// origin-industry and destination-industry fixed effects, clustered four ways
/// on origin country, origin industry, destination country and destination
/// industry. Non-positive scores cannot enter the log and are counted out.
inline GeoPremiumResult geo_premium(const RankMatrix& rank, const RegionMap& regions,
                                    const GeoScope& scope) {
    if (scope.destination_countries.empty()) throw ConfigError("empty destination-country scope");
    const auto m = static_cast<Eigen::Index>(rank.size());

    struct SectorInfo {
        std::string country, industry;
        bool manufacturing;
    };
    std::vector<SectorInfo> info;
    info.reserve(static_cast<std::size_t>(m));
    for (const auto& sector : rank.sectors) {
        SectorInfo si;
        si.country = rank.country(sector);
        if (si.country.empty()) {
            throw CompletenessError("geo_premium needs country labels; sector '" + sector +
                                    "' has none");
        }
        si.industry = RawIOTable::industry_part(sector);
        si.manufacturing = detail::has_prefix(si.industry, scope.manufacturing_prefixes);
        info.push_back(si);
    }

    auto in_scope_dest = [&](const SectorInfo& si) {
        return std::find(scope.destination_countries.begin(), scope.destination_countries.end(),
                         si.country) != scope.destination_countries.end();
    };

    std::vector<double> y;
    std::vector<double> domestic, intraregion;
    std::vector<std::string> origin_country, origin_industry, dest_country, dest_industry;
    GeoPremiumResult result;

    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& dk = info[static_cast<std::size_t>(k)];
        if (!in_scope_dest(dk)) continue;
        if (scope.manufacturing_only && !dk.manufacturing) continue;
        for (Eigen::Index h = 0; h < m; ++h) {
            const auto& oh = info[static_cast<std::size_t>(h)];
            if (!scope.include_row_origins && oh.country == scope.row_code) continue;
            if (!scope.include_diagonal && h == k) continue;
            if (scope.manufacturing_only && !oh.manufacturing) continue;
            ++result.pairs_considered;
            double v = rank.values(h, k);
            if (!(v > 0.0)) {  // zero, negative or NaN: no log
                ++result.zeros_excluded;
                continue;
            }
            y.push_back(std::log(v));
            bool dom = oh.country == dk.country;
            std::string origin_region = regions.region(oh.country);
            bool intra = !dom && !origin_region.empty() && origin_region == regions.region(dk.country);
            domestic.push_back(dom ? 1.0 : 0.0);
            intraregion.push_back(intra ? 1.0 : 0.0);
            origin_country.push_back(oh.country);
            origin_industry.push_back(oh.industry);
            dest_country.push_back(dk.country);
            dest_industry.push_back(dk.industry);
        }
    }
    if (y.empty()) throw EstimationError("geo_premium: scope selects no usable pairs");

    Sample sample;
    const auto n = static_cast<Eigen::Index>(y.size());
    sample.y = Eigen::Map<const Vector>(y.data(), n);
    sample.X.resize(n, 2);
    sample.X.col(0) = Eigen::Map<const Vector>(domestic.data(), n);
    sample.X.col(1) = Eigen::Map<const Vector>(intraregion.data(), n);
    sample.regressor_names = {"Domestic", "Intraregion"};
    sample.fixed_effects.push_back(encode_dimension("origin_industry", origin_industry));
    sample.fixed_effects.push_back(encode_dimension("dest_industry", dest_industry));
    sample.clusters.push_back(encode_dimension("origin_country", origin_country));
    sample.clusters.push_back(encode_dimension("origin_industry", origin_industry));
    sample.clusters.push_back(encode_dimension("dest_country", dest_country));
    sample.clusters.push_back(encode_dimension("dest_industry", dest_industry));

    result.regression = fe_ols(sample);
    return result;
}

/// Fixed-width report: coefficient rows with stars, standard errors in
/// parentheses, then the fit block.
inline std::string format_geo_report(const GeoPremiumResult& result, const std::string& title) {
    const auto& reg = result.regression;
    char buf[128];
    std::string out;
    out += title + "\n";
    out += std::string(title.size(), '-') + "\n";
    auto coef_row = [&](const std::string& name, double coef, double se, bool with_stars) {
        if (std::isnan(coef)) {
            std::snprintf(buf, sizeof(buf), "%-14s %12s\n", name.c_str(), "(dropped)");
            out += buf;
            return;
        }
        std::string stars;
        if (with_stars && !std::isnan(se) && se > 0.0) {
            stars = significance_stars(normal_pvalue(coef / se));
        }
        std::snprintf(buf, sizeof(buf), "%-14s %12.3f%-3s\n", name.c_str(), coef, stars.c_str());
        out += buf;
        if (!std::isnan(se)) {
            std::snprintf(buf, sizeof(buf), "%-14s %11s(%.3f)\n", "", "", se);
            out += buf;
        }
    };
    for (std::size_t i = 0; i < reg.names.size(); ++i) {
        coef_row(reg.names[i], reg.coef(static_cast<Eigen::Index>(i)),
                 reg.se(static_cast<Eigen::Index>(i)), true);
    }
    coef_row("Constant", reg.constant, std::numeric_limits<double>::quiet_NaN(), false);
    std::snprintf(buf, sizeof(buf), "%-22s %12ld\n", "N. obs.", reg.n);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12ld\n", "Zeros excluded", result.zeros_excluded);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12.3f\n", "Adj. R squared", reg.adj_r2);
    out += buf;
    out += "Origin/destination industry FE: yes; multiway clustered errors: yes\n";
    out += "Stars: *** p<.01, ** p<.05, * p<.1 (normal approximation)\n";
    return out;
}

inline nlohmann::json geo_result_to_json(const GeoPremiumResult& result) {
    const auto& reg = result.regression;
    nlohmann::json j;
    j["n"] = reg.n;
    j["zeros_excluded"] = result.zeros_excluded;
    j["pairs_considered"] = result.pairs_considered;
    j["adj_r2"] = reg.adj_r2;
    j["r2"] = reg.r2;
    j["constant"] = reg.constant;
    j["cluster_counts"] = reg.cluster_counts;
    j["vcov_repairs"] = reg.vcov_repairs;
    j["warnings"] = reg.warnings;
    j["dropped"] = reg.dropped;
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t i = 0; i < reg.names.size(); ++i) {
        nlohmann::json c;
        c["name"] = reg.names[i];
        double b = reg.coef(static_cast<Eigen::Index>(i));
        double se = reg.se(static_cast<Eigen::Index>(i));
        if (std::isnan(b)) {
            c["dropped"] = true;
        } else {
            c["coef"] = b;
            // Both readings of a log-point premium: the raw coefficient and
            // the implied multiplicative factor.
            c["exp_coef"] = std::exp(b);
            if (!std::isnan(se)) {
                c["se"] = se;
                c["t"] = b / se;
                c["p_normal"] = normal_pvalue(b / se);
            }
        }
        coefs.push_back(c);
    }
    j["coefficients"] = coefs;
    return j;
}

}  // namespace gvcrank
