#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gvcrank/errors.hpp"

namespace gvcrank {

/// Mid-ranks: 1-based ranks with ties replaced by the average rank of the
/// tied run. Half-integers, so exact in binary floating point.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

/// Pearson correlation in the covariance form with left-to-right accumulation.
/// Kept in this exact shape so independent reimplementations of the same
/// formula agree bit for bit.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw DomainError("pearson needs two equal-length vectors, n >= 2");
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    double vx = dn * sxx - sx * sx;
    double vy = dn * syy - sy * sy;
    if (vx <= 0.0 || vy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (dn * sxy - sx * sy) / (std::sqrt(vx) * std::sqrt(vy));
}

/// Spearman's rho: Pearson correlation of mid-ranks. NaN when either rank
/// vector has zero variance.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("spearman_rho needs two equal-length vectors, n >= 2");
    }
    auto rx = midranks(x);
    auto ry = midranks(y);
    return pearson(rx, ry);
}

namespace detail {

/// Counts inversions in `seq` by merge sort. O(n log n).
inline std::int64_t merge_count_inversions(std::vector<double>& seq) {
    const std::size_t n = seq.size();
    std::vector<double> buffer(n);
    std::int64_t inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            std::size_t mid = lo + width;
            std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, out = lo;
            while (i < mid && j < hi) {
                if (seq[j] < seq[i]) {
                    inversions += static_cast<std::int64_t>(mid - i);
                    buffer[out++] = seq[j++];
                } else {
                    buffer[out++] = seq[i++];
                }
            }
            while (i < mid) buffer[out++] = seq[i++];
            while (j < hi) buffer[out++] = seq[j++];
            std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
                      buffer.begin() + static_cast<std::ptrdiff_t>(hi),
                      seq.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return inversions;
}

/// Sum of t*(t-1)/2 over runs of equal values in a sorted vector.
inline std::int64_t tied_pairs(std::vector<double> sorted) {
    std::sort(sorted.begin(), sorted.end());
    std::int64_t total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        auto t = static_cast<std::int64_t>(j - i + 1);
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    return total;
}

}  // namespace detail

/// Kendall's tau-b with tie correction, via sorting plus a merge-sort
/// inversion count. Sorting by (x, y) makes the y-inversion count exactly the
/// number of strictly discordant pairs. NaN when either vector is all ties.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) {
        throw DomainError("kendall_tau_b needs two equal-length vectors, n >= 2");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    std::int64_t ties_x = 0;    // pairs tied in x
    std::int64_t ties_both = 0; // pairs tied in both
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            auto t = static_cast<std::int64_t>(j - i + 1);
            ties_x += t * (t - 1) / 2;
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
                auto u = static_cast<std::int64_t>(b - a + 1);
                ties_both += u * (u - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }
    std::vector<double> y_sorted(n);
    for (std::size_t i = 0; i < n; ++i) y_sorted[i] = y[order[i]];
    std::int64_t discordant = detail::merge_count_inversions(y_sorted);
    std::int64_t ties_y = detail::tied_pairs(std::vector<double>(y.begin(), y.end()));

    std::int64_t numerator = n0 - ties_x - ties_y + ties_both - 2 * discordant;  // P - Q
    std::int64_t dx = n0 - ties_x;
    std::int64_t dy = n0 - ties_y;
    if (dx <= 0 || dy <= 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(numerator) /
           (std::sqrt(static_cast<double>(dx)) * std::sqrt(static_cast<double>(dy)));
}

}  // namespace gvcrank
