#ifndef HSIBAND_TESTS_ORACLES_HPP
#define HSIBAND_TESTS_ORACLES_HPP

// Reference computations that share no code with the library: direct
// probability-space summation with std::map, long double accumulation.

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace hsiband::testing {

inline long double oracle_entropy(const std::vector<int>& x) {
    std::map<int, long double> p;
    for (int v : x) p[v] += 1.0L / x.size();
    long double h = 0.0L;
    for (auto& [v, pv] : p) h -= pv * std::log2(pv);
    return h;
}

inline long double oracle_mutual_information(const std::vector<int>& x, const std::vector<int>& y) {
    const long double n = static_cast<long double>(x.size());
    std::map<int, long double> px, py;
    std::map<std::pair<int, int>, long double> pxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        px[x[i]] += 1.0L / n;
        py[y[i]] += 1.0L / n;
        pxy[{x[i], y[i]}] += 1.0L / n;
    }
    long double mi = 0.0L;
    for (auto& [xy, p] : pxy) mi += p * std::log2(p / (px[xy.first] * py[xy.second]));
    return mi;
}

/// Greedy mRMR order: relevance to `classes` minus mean MI with the bands
/// already picked; ties (within 1e-12) go to the lower index.
inline std::vector<std::size_t> oracle_mrmr(const std::vector<std::vector<int>>& bands,
                                            const std::vector<int>& classes, std::size_t m) {
    const std::size_t n = bands.size();
    std::vector<std::size_t> order;
    std::vector<bool> taken(n, false);
    while (order.size() < m) {
        std::size_t best = n;
        long double best_score = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (taken[b]) continue;
            long double red = 0;
            for (auto s : order) red += oracle_mutual_information(bands[b], bands[s]);
            const long double score = oracle_mutual_information(bands[b], classes) -
                                      (order.empty() ? 0 : red / static_cast<long double>(order.size()));
            if (best == n || score > best_score + 1e-12L) {
                best = b;
                best_score = score;
            }
        }
        taken[best] = true;
        order.push_back(best);
    }
    return order;
}

}  // namespace hsiband::testing

#endif  // HSIBAND_TESTS_ORACLES_HPP
