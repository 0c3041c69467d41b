#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "gvcrank/csv.hpp"
#include "gvcrank/parallel.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

/// Technology matrix: g(h, k) is the cost share of input h within sector k's
/// intermediate bundle. Columns of buyers with no intermediate purchases stay
/// all-zero, so such sectors pass shocks through with weight zero.
inline Matrix build_G(const RawIOTable& table) {
    const Eigen::Index m = table.flows.rows();
    Matrix g = Matrix::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double total = table.flows.col(k).sum();
        if (total > 0.0) g.col(k) = table.flows.col(k) / total;
    }
    return g;
}

/// Which primary-factor payments enter the denominator of alpha.
enum class AlphaDenominator {
    IntermediatesPlusValueAdded,  // default: value added proxies all primary factors
    IntermediatesPlusLabor,       // caller supplies the labor (primary factor) cost vector
};

/// Intermediate-input cost share alpha_k = intermediates / (intermediates + VA_k).
/// Sectors with a zero denominator get alpha_k = 0.
inline Vector compute_alpha(const RawIOTable& table) {
    const Eigen::Index m = table.flows.cols();
    Vector alpha = Vector::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double intermediates = table.flows.col(k).sum();
        double denom = intermediates + table.value_added(k);
        if (denom > 0.0) alpha(k) = intermediates / denom;
    }
    return alpha;
}

/// Labor-only variant: the denominator is intermediates plus the supplied
/// primary-factor cost, excluding profits bundled into published value added.
inline Vector compute_alpha(const RawIOTable& table, const Vector& labor_cost) {
    const Eigen::Index m = table.flows.cols();
    if (labor_cost.size() != m) throw StructuralError("labor_cost length != sector count");
    Vector alpha = Vector::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double intermediates = table.flows.col(k).sum();
        double denom = intermediates + labor_cost(k);
        if (denom > 0.0) alpha(k) = intermediates / denom;
    }
    return alpha;
}

/// Direct requirements d(h, k) = Z(h, k) / Y_k. Zero-output buyers yield a zero
/// column and a warning when a sink is provided.
inline Matrix direct_requirements(const RawIOTable& table,
                                  std::vector<std::string>* warnings = nullptr) {
    const Eigen::Index m = table.flows.rows();
    Matrix d = Matrix::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double y = table.gross_output(k);
        if (y > 0.0) {
            d.col(k) = table.flows.col(k) / y;
        } else if (warnings) {
            warnings->push_back("sector '" + table.sectors[static_cast<std::size_t>(k)] +
                                "' has zero gross output; direct-requirements column set to zero");
        }
    }
    return d;
}

/// The model objects derived from one table, sharing its sector index.
struct TechNetwork {
    std::vector<std::string> sectors;
    std::map<std::string, std::string> country_of;
    Matrix G;      // column-stochastic technology shares
    Vector alpha;  // intermediate-input cost shares, diag of A
    Matrix D;      // direct requirements

    std::size_t size() const { return sectors.size(); }
};

inline TechNetwork build_network(const RawIOTable& table,
                                 std::vector<std::string>* warnings = nullptr) {
    TechNetwork net;
    net.sectors = table.sectors;
    net.country_of = table.country_of;
    net.G = build_G(table);
    net.alpha = compute_alpha(table);
    net.D = direct_requirements(table, warnings);
    return net;
}

/// Which weight defines an edge when thresholding.
enum class EdgeWeight { TechShare, DirectRequirement };

inline const Matrix& edge_weights(const TechNetwork& net, EdgeWeight w) {
    return w == EdgeWeight::TechShare ? net.G : net.D;
}

struct DegreeSummary {
    double mean = 0.0;
    long min = 0;
    long max = 0;
    std::string argmin;
    std::string argmax;
};

struct DegreeStats {
    std::vector<long> in_degree;               // number of input industries per buyer
    std::vector<long> out_degree;              // number of buying industries per supplier
    std::vector<double> weighted_out_degree;   // sum of outgoing edge weights
    DegreeSummary in;
    DegreeSummary out;
};

namespace detail {

inline DegreeSummary summarize_degrees(const std::vector<long>& deg,
                                       const std::vector<std::string>& sectors) {
    DegreeSummary s;
    if (deg.empty()) return s;
    std::size_t imin = 0, imax = 0;
    long total = 0;
    for (std::size_t i = 0; i < deg.size(); ++i) {
        total += deg[i];
        if (deg[i] < deg[imin]) imin = i;
        if (deg[i] > deg[imax]) imax = i;
    }
    s.mean = static_cast<double>(total) / static_cast<double>(deg.size());
    s.min = deg[imin];
    s.max = deg[imax];
    s.argmin = sectors[imin];
    s.argmax = sectors[imax];
    return s;
}

}  // namespace detail

/// Counts edges h->k with weight strictly above the threshold. Self-loops are
/// counted: a sector buying its own output is a real transaction in I-O data.
/// At threshold 0 this is exactly the nonzero pattern of Z.
inline DegreeStats degree_stats(const TechNetwork& net, double threshold = 0.0,
                                EdgeWeight weight = EdgeWeight::TechShare) {
    const Matrix& w = edge_weights(net, weight);
    const Eigen::Index m = w.rows();
    DegreeStats stats;
    stats.in_degree.assign(static_cast<std::size_t>(m), 0);
    stats.out_degree.assign(static_cast<std::size_t>(m), 0);
    stats.weighted_out_degree.assign(static_cast<std::size_t>(m), 0.0);
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index h = 0; h < m; ++h) {
            if (w(h, k) > threshold) {
                ++stats.in_degree[static_cast<std::size_t>(k)];
                ++stats.out_degree[static_cast<std::size_t>(h)];
                stats.weighted_out_degree[static_cast<std::size_t>(h)] += w(h, k);
            }
        }
    }
    stats.in = detail::summarize_degrees(stats.in_degree, net.sectors);
    stats.out = detail::summarize_degrees(stats.out_degree, net.sectors);
    return stats;
}

struct NetworkSummary {
    long edge_count = 0;            // directed edges above threshold (self-loops included)
    double density = 0.0;           // edge_count / (M * (M - 1))
    double average_path_length = 0.0;  // mean BFS hop count over reachable ordered pairs
    long reachable_pairs = 0;
    long unreachable_pairs = 0;     // ordered pairs (u, v), u != v, with no directed path
};

/// Unweighted directed shortest paths on the thresholded pattern. Unreachable
/// pairs are excluded from the mean and reported separately.
inline NetworkSummary network_summary(const TechNetwork& net, double threshold = 0.0,
                                      EdgeWeight weight = EdgeWeight::TechShare) {
    const Matrix& w = edge_weights(net, weight);
    const std::size_t m = static_cast<std::size_t>(w.rows());
    NetworkSummary summary;

    std::vector<std::vector<std::uint32_t>> adj(m);
    for (std::size_t h = 0; h < m; ++h) {
        for (std::size_t k = 0; k < m; ++k) {
            if (w(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)) > threshold) {
                ++summary.edge_count;
                adj[h].push_back(static_cast<std::uint32_t>(k));
            }
        }
    }
    if (m > 1) {
        summary.density = static_cast<double>(summary.edge_count) /
                          (static_cast<double>(m) * static_cast<double>(m - 1));
    }

    // BFS per source; each source writes its own slot, then a sequential reduce.
    std::vector<std::int64_t> dist_sum(m, 0);
    std::vector<std::int64_t> reached(m, 0);
    parallel_for(m, [&](std::size_t src) {
        std::vector<std::int32_t> dist(m, -1);
        std::deque<std::uint32_t> queue;
        dist[src] = 0;
        queue.push_back(static_cast<std::uint32_t>(src));
        while (!queue.empty()) {
            std::uint32_t u = queue.front();
            queue.pop_front();
            for (std::uint32_t v : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (std::size_t v = 0; v < m; ++v) {
            if (v != src && dist[v] > 0) {
                dist_sum[src] += dist[v];
                ++reached[src];
            }
        }
    });
    std::int64_t total_dist = 0, total_reached = 0;
    for (std::size_t i = 0; i < m; ++i) {
        total_dist += dist_sum[i];
        total_reached += reached[i];
    }
    summary.reachable_pairs = total_reached;
    summary.unreachable_pairs =
        static_cast<std::int64_t>(m) * static_cast<std::int64_t>(m > 0 ? m - 1 : 0) - total_reached;
    if (total_reached > 0) {
        summary.average_path_length =
            static_cast<double>(total_dist) / static_cast<double>(total_reached);
    }
    return summary;
}

/// Graphviz DOT export with deterministic node and edge order; same network,
/// same bytes. Edge attribute `weight` carries the technology share.
inline void export_dot(const TechNetwork& net, double threshold,
                       const std::filesystem::path& path,
                       EdgeWeight weight = EdgeWeight::TechShare) {
    const Matrix& w = edge_weights(net, weight);
    const std::size_t m = net.size();
    std::string out = "digraph gvc {\n";
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        q += '"';
        return q;
    };
    for (std::size_t i = 0; i < m; ++i) {
        out += "  " + quote(net.sectors[i]) + ";\n";
    }
    for (std::size_t h = 0; h < m; ++h) {
        for (std::size_t k = 0; k < m; ++k) {
            double v = w(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k));
            if (v > threshold) {
                out += "  " + quote(net.sectors[h]) + " -> " + quote(net.sectors[k]) +
                       " [weight=" + format_double(v) + "];\n";
            }
        }
    }
    out += "}\n";
    write_file_atomic(path, out);
}

/// Writes a square matrix as CSV with sector ids on both axes.
inline void save_matrix_csv(const Matrix& m, const std::vector<std::string>& sectors,
                            const std::filesystem::path& path) {
    std::string out = "sector";
    for (const auto& s : sectors) out += "," + csv::quote_if_needed(s);
    out += "\n";
    for (Eigen::Index h = 0; h < m.rows(); ++h) {
        out += csv::quote_if_needed(sectors[static_cast<std::size_t>(h)]);
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            double v = m(h, k);
            out += ",";
            if (!std::isnan(v)) out += format_double(v);
        }
        out += "\n";
    }
    write_file_atomic(path, out);
}

/// Writes a vector as two-column CSV (sector, value).
inline void save_vector_csv(const Vector& v, const std::vector<std::string>& sectors,
                            const std::string& value_name, const std::filesystem::path& path) {
    std::string out = "sector," + value_name + "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += csv::quote_if_needed(sectors[static_cast<std::size_t>(i)]) + ",";
        if (!std::isnan(v(i))) out += format_double(v(i));
        out += "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace gvcrank
