#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "gvcrank/csv.hpp"
#include "gvcrank/errors.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

/// Describes where the non-flow blocks live in a dense square CSV: which
/// column labels hold final demand, which row labels hold value added, and the
/// label of the gross-output row or column. Everything else is the flow block.
struct DenseLayout {
    std::vector<std::string> final_demand_columns;
    std::vector<std::string> value_added_rows;
    std::string gross_output_row;     // exactly one of row/column must be set
    std::string gross_output_column;
    std::string country;              // optional country code applied to all sectors

    static DenseLayout from_json(const nlohmann::json& j) {
        DenseLayout layout;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            if (key == "final_demand_columns") {
                layout.final_demand_columns = it->get<std::vector<std::string>>();
            } else if (key == "value_added_rows") {
                layout.value_added_rows = it->get<std::vector<std::string>>();
            } else if (key == "gross_output") {
                for (auto git = it->begin(); git != it->end(); ++git) {
                    if (git.key() == "row") layout.gross_output_row = git->get<std::string>();
                    else if (git.key() == "column") layout.gross_output_column = git->get<std::string>();
                    else throw ConfigError("unknown layout field 'gross_output." + git.key() + "'");
                }
            } else if (key == "country") {
                layout.country = it->get<std::string>();
            } else {
                throw ConfigError("unknown layout field '" + key + "'");
            }
        }
        layout.check();
        return layout;
    }

    static DenseLayout from_json_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open layout file " + path.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid layout JSON in " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

    void check() const {
        if (final_demand_columns.empty()) throw ConfigError("layout: final_demand_columns is empty");
        if (value_added_rows.empty()) throw ConfigError("layout: value_added_rows is empty");
        const bool has_row = !gross_output_row.empty();
        const bool has_col = !gross_output_column.empty();
        if (has_row == has_col) {
            throw ConfigError("layout: exactly one of gross_output.row / gross_output.column required");
        }
    }
};

/// Loads a dense square table: first row holds column labels, first column row
/// labels. Sector order follows the file's row order. Negative cells are kept;
/// clean() is a separate step.
inline RawIOTable load_dense_csv(const std::filesystem::path& path, const DenseLayout& layout) {
    layout.check();
    auto rows = csv::read_file(path);
    if (rows.size() < 2 || rows[0].size() < 2) {
        throw StructuralError("dense table needs a header row and at least one data row");
    }

    const auto& header = rows[0];
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (!col_of.emplace(header[c], c).second) {
            throw DuplicateKeyError("duplicate column label '" + header[c] + "'");
        }
    }

    auto is_fd_col = [&](const std::string& label) {
        return std::find(layout.final_demand_columns.begin(), layout.final_demand_columns.end(),
                         label) != layout.final_demand_columns.end();
    };
    auto is_va_row = [&](const std::string& label) {
        return std::find(layout.value_added_rows.begin(), layout.value_added_rows.end(), label) !=
               layout.value_added_rows.end();
    };

    std::vector<std::string> sector_cols;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string& label = header[c];
        if (!is_fd_col(label) && label != layout.gross_output_column) sector_cols.push_back(label);
    }

    std::vector<std::string> sectors;
    std::vector<std::size_t> sector_rows;
    std::vector<std::size_t> va_rows;
    std::size_t go_row = 0;
    bool have_go_row = false;
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].empty() || (rows[r].size() == 1 && rows[r][0].empty())) continue;
        const std::string& label = rows[r][0];
        if (!row_of.emplace(label, r).second) {
            throw DuplicateKeyError("duplicate row label '" + label + "'");
        }
        if (is_va_row(label)) {
            va_rows.push_back(r);
        } else if (label == layout.gross_output_row) {
            go_row = r;
            have_go_row = true;
        } else {
            sectors.push_back(label);
            sector_rows.push_back(r);
        }
    }
    if (va_rows.empty()) throw StructuralError("no value-added row found");
    if (!layout.gross_output_row.empty() && !have_go_row) {
        throw StructuralError("gross-output row '" + layout.gross_output_row + "' not found");
    }

    if (sectors.size() != sector_cols.size() ||
        std::set<std::string>(sectors.begin(), sectors.end()) !=
            std::set<std::string>(sector_cols.begin(), sector_cols.end())) {
        throw StructuralError("flow block is not square: " + std::to_string(sectors.size()) +
                              " sector rows vs " + std::to_string(sector_cols.size()) +
                              " sector columns");
    }

    const auto m = static_cast<Eigen::Index>(sectors.size());
    RawIOTable table;
    table.sectors = sectors;
    table.flows.resize(m, m);
    table.final_demand = Vector::Zero(m);
    table.value_added = Vector::Zero(m);
    table.gross_output = Vector::Zero(m);

    auto cell = [&](std::size_t r, const std::string& col_label) {
        auto it = col_of.find(col_label);
        if (it == col_of.end()) {
            throw StructuralError("column '" + col_label + "' not found");
        }
        std::size_t c = it->second;
        if (c >= rows[r].size()) {
            throw StructuralError("row '" + rows[r][0] + "' is short: no value for column '" +
                                  col_label + "'");
        }
        return csv::parse_number(rows[r][c], r + 1, c + 1);
    };

    for (Eigen::Index h = 0; h < m; ++h) {
        std::size_t r = sector_rows[static_cast<std::size_t>(h)];
        for (Eigen::Index k = 0; k < m; ++k) {
            table.flows(h, k) = cell(r, sectors[static_cast<std::size_t>(k)]);
        }
        for (const auto& fd : layout.final_demand_columns) {
            table.final_demand(h) += cell(r, fd);
        }
        if (!layout.gross_output_column.empty()) {
            table.gross_output(h) = cell(r, layout.gross_output_column);
        }
    }
    for (std::size_t r : va_rows) {
        for (Eigen::Index k = 0; k < m; ++k) {
            table.value_added(k) += cell(r, sectors[static_cast<std::size_t>(k)]);
        }
    }
    if (have_go_row) {
        for (Eigen::Index k = 0; k < m; ++k) {
            table.gross_output(k) = cell(go_row, sectors[static_cast<std::size_t>(k)]);
        }
    }
    if (!layout.country.empty()) {
        for (const auto& s : table.sectors) table.country_of[s] = layout.country;
    }
    return table;
}

namespace detail {

inline std::string make_sector_id(const std::string& country, const std::string& industry) {
    return country.empty() ? industry : country + ":" + industry;
}

}  // namespace detail

/// Loads the long (origin, destination, value) format plus its sector sidecar.
/// The sidecar defines the sector universe; pairs absent from the flow file
/// default to zero. Sector order is lexicographic by (country, industry).
inline RawIOTable load_long_csv(const std::filesystem::path& flows_path,
                                const std::filesystem::path& sectors_path) {
    static const std::vector<std::string> kFlowHeader = {
        "origin_country", "origin_industry", "dest_country", "dest_industry", "value"};
    static const std::vector<std::string> kSectorHeader = {
        "country", "industry", "value_added", "final_demand", "gross_output"};

    auto sector_rows = csv::read_file(sectors_path);
    if (sector_rows.empty() || sector_rows[0] != kSectorHeader) {
        throw StructuralError("sector sidecar must start with header "
                              "country,industry,value_added,final_demand,gross_output");
    }

    // (country, industry) pairs sorted lexicographically define the index.
    std::vector<std::pair<std::string, std::string>> keys;
    struct SectorData {
        double va, fd, go;
    };
    std::map<std::pair<std::string, std::string>, SectorData> data;
    for (std::size_t r = 1; r < sector_rows.size(); ++r) {
        const auto& row = sector_rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 5) {
            throw ParseError("expected 5 columns, got " + std::to_string(row.size()), r + 1, 1);
        }
        std::pair<std::string, std::string> key{row[0], row[1]};
        SectorData sd{csv::parse_number(row[2], r + 1, 3), csv::parse_number(row[3], r + 1, 4),
                      csv::parse_number(row[4], r + 1, 5)};
        if (!data.emplace(key, sd).second) {
            throw DuplicateKeyError("duplicate sector row for " +
                                    detail::make_sector_id(row[0], row[1]));
        }
    }
    for (const auto& [key, sd] : data) keys.push_back(key);

    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (std::size_t i = 0; i < keys.size(); ++i) index[keys[i]] = i;

    const auto m = static_cast<Eigen::Index>(keys.size());
    RawIOTable table;
    table.flows = Matrix::Zero(m, m);
    table.final_demand.resize(m);
    table.value_added.resize(m);
    table.gross_output.resize(m);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& sd = data[keys[i]];
        table.sectors.push_back(detail::make_sector_id(keys[i].first, keys[i].second));
        table.value_added(static_cast<Eigen::Index>(i)) = sd.va;
        table.final_demand(static_cast<Eigen::Index>(i)) = sd.fd;
        table.gross_output(static_cast<Eigen::Index>(i)) = sd.go;
        if (!keys[i].first.empty()) table.country_of[table.sectors.back()] = keys[i].first;
    }

    auto flow_rows = csv::read_file(flows_path);
    if (flow_rows.empty() || flow_rows[0] != kFlowHeader) {
        throw StructuralError("flow file must start with header "
                              "origin_country,origin_industry,dest_country,dest_industry,value");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t r = 1; r < flow_rows.size(); ++r) {
        const auto& row = flow_rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 5) {
            throw ParseError("expected 5 columns, got " + std::to_string(row.size()), r + 1, 1);
        }
        auto oit = index.find({row[0], row[1]});
        if (oit == index.end()) {
            throw CompletenessError("no sector sidecar entry for origin " +
                                    detail::make_sector_id(row[0], row[1]));
        }
        auto dit = index.find({row[2], row[3]});
        if (dit == index.end()) {
            throw CompletenessError("no sector sidecar entry for destination " +
                                    detail::make_sector_id(row[2], row[3]));
        }
        if (!seen.emplace(oit->second, dit->second).second) {
            throw DuplicateKeyError("duplicate flow row for pair " +
                                    detail::make_sector_id(row[0], row[1]) + " -> " +
                                    detail::make_sector_id(row[2], row[3]));
        }
        table.flows(static_cast<Eigen::Index>(oit->second), static_cast<Eigen::Index>(dit->second)) =
            csv::parse_number(row[4], r + 1, 5);
    }
    return table;
}

/// Canonical on-disk form: nonzero flows in long format plus the sector
/// sidecar. Values use shortest round-trip formatting, so save followed by
/// load reproduces the table bit for bit.
inline void save_long_csv(const RawIOTable& table, const std::filesystem::path& flows_path,
                          const std::filesystem::path& sectors_path) {
    auto split = [&](const std::string& sector) -> std::pair<std::string, std::string> {
        std::string country = table.country(sector);
        if (country.empty()) return {"", sector};
        return {country, RawIOTable::industry_part(sector)};
    };

    std::string sectors_out = "country,industry,value_added,final_demand,gross_output\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto [country, industry] = split(table.sectors[i]);
        sectors_out += csv::quote_if_needed(country) + "," + csv::quote_if_needed(industry) + "," +
                       format_double(table.value_added(static_cast<Eigen::Index>(i))) + "," +
                       format_double(table.final_demand(static_cast<Eigen::Index>(i))) + "," +
                       format_double(table.gross_output(static_cast<Eigen::Index>(i))) + "\n";
    }

    std::string flows_out = "origin_country,origin_industry,dest_country,dest_industry,value\n";
    for (std::size_t h = 0; h < table.size(); ++h) {
        auto [oc, oi] = split(table.sectors[h]);
        for (std::size_t k = 0; k < table.size(); ++k) {
            double v = table.flows(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k));
            if (v == 0.0) continue;
            auto [dc, di] = split(table.sectors[k]);
            flows_out += csv::quote_if_needed(oc) + "," + csv::quote_if_needed(oi) + "," +
                         csv::quote_if_needed(dc) + "," + csv::quote_if_needed(di) + "," +
                         format_double(v) + "\n";
        }
    }
    write_file_atomic(sectors_path, sectors_out);
    write_file_atomic(flows_path, flows_out);
}

/// Reads an exclusion list: one sector id per line, '#' comments allowed.
inline std::vector<std::string> load_exclusion_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open exclusion list " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        out.push_back(line.substr(start));
    }
    return out;
}

}  // namespace gvcrank
