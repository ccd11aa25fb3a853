#include "qkdrisk/ks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qkdrisk/errors.hpp"

namespace qkdrisk {

namespace {

// D for a pooled, sorted, labeled arrangement: label true = first sample.
double d_from_labels(const std::vector<double>& pooled, const std::vector<bool>& is_a,
                     std::size_t n, std::size_t m) {
    const std::size_t total = pooled.size();
    double d = 0.0;
    std::size_t ia = 0, ib = 0, i = 0;
    while (i < total) {
        double v = pooled[i];
        while (i < total && pooled[i] == v) {
            if (is_a[i])
                ++ia;
            else
                ++ib;
            ++i;
        }
        double diff = std::abs(static_cast<double>(ia) / static_cast<double>(n) -
                               static_cast<double>(ib) / static_cast<double>(m));
        d = std::max(d, diff);
    }
    return d;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("ks_statistic: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const std::size_t n = sa.size(), m = sb.size();
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < n || ib < m) {
        double v = (ia < n && (ib >= m || sa[ia] <= sb[ib])) ? sa[ia] : sb[ib];
        while (ia < n && sa[ia] == v) ++ia;
        while (ib < m && sb[ib] == v) ++ib;
        double diff = std::abs(static_cast<double>(ia) / static_cast<double>(n) -
                               static_cast<double>(ib) / static_cast<double>(m));
        d = std::max(d, diff);
    }
    return d;
}

double ks_pvalue_asymptotic(double d, std::size_t n, std::size_t m) {
    if (n < 1 || m < 1) throw DataError("ks_pvalue_asymptotic: n, m must be >= 1");
    double ne = static_cast<double>(n) * static_cast<double>(m) /
                (static_cast<double>(n) + static_cast<double>(m));
    double sq = std::sqrt(ne);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;

    double sum = 0.0;
    double sign = 1.0;
    bool truncated = false;
    for (int j = 1; j <= 1000; ++j) {
        double term = std::exp(-2.0 * lambda * lambda * static_cast<double>(j) *
                               static_cast<double>(j));
        sum += sign * term;
        if (term < 1e-12) {
            truncated = true;
            break;
        }
        sign = -sign;
    }
    // the series does not settle for lambda near 0 (d near 0); that is the
    // no-separation case, p = 1
    if (!truncated) return 1.0;
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_pvalue_exact_small(double d, std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw DataError("ks_pvalue_exact_small: empty sample");
    if (n + m > 16)
        throw ConfigError("ks_pvalue_exact_small: n+m = " + std::to_string(n + m) + " exceeds 16");

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());

    const std::size_t total = n + m;
    std::vector<bool> is_a(total);
    std::uint64_t count_ge = 0, count_all = 0;

    // iterate every n-subset of positions via bitmask
    const std::uint32_t full = 1u << total;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
        for (std::size_t i = 0; i < total; ++i) is_a[i] = (mask >> i) & 1u;
        ++count_all;
        if (d_from_labels(pooled, is_a, n, m) >= d - 1e-12) ++count_ge;
    }
    return static_cast<double>(count_ge) / static_cast<double>(count_all);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    KsResult r;
    r.n = a.size();
    r.m = b.size();
    r.d_statistic = ks_statistic(a, b);
    r.p_value = ks_pvalue_asymptotic(r.d_statistic, r.n, r.m);
    return r;
}

}  // namespace qkdrisk
