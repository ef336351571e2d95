#ifndef HSIBAND_INFOTHEORY_HPP
#define HSIBAND_INFOTHEORY_HPP

// Plug-in (histogram) estimates of entropy and mutual information, in bits,
// plus the Fano bracket on classification error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hsiband/errors.hpp"

namespace hsiband {

struct Histogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    static Histogram from_counts(std::vector<std::uint64_t> counts) {
        Histogram h;
        h.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        h.counts = std::move(counts);
        return h;
    }
};

/// Co-occurrence counts, stored row-major over (x, y).
class JointHistogram {
public:
    JointHistogram() = default;
    JointHistogram(std::size_t x_symbols, std::size_t y_symbols)
        : nx_(x_symbols), ny_(y_symbols), counts_(x_symbols * y_symbols, 0) {}

    static JointHistogram from_counts(std::size_t x_symbols, std::size_t y_symbols,
                                      std::vector<std::uint64_t> counts) {
        if (counts.size() != x_symbols * y_symbols)
            throw domain_error("JointHistogram: count table has the wrong size");
        JointHistogram j;
        j.nx_ = x_symbols;
        j.ny_ = y_symbols;
        j.total_ = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        j.counts_ = std::move(counts);
        return j;
    }

    std::size_t x_symbols() const noexcept { return nx_; }
    std::size_t y_symbols() const noexcept { return ny_; }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t at(std::size_t x, std::size_t y) const { return counts_.at(x * ny_ + y); }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }

    void add(std::size_t x, std::size_t y, std::uint64_t n = 1) {
        counts_[x * ny_ + y] += n;
        total_ += n;
    }

    Histogram marginal_x() const {
        std::vector<std::uint64_t> m(nx_, 0);
        for (std::size_t x = 0; x < nx_; ++x)
            for (std::size_t y = 0; y < ny_; ++y) m[x] += counts_[x * ny_ + y];
        return Histogram{std::move(m), total_};
    }
    Histogram marginal_y() const {
        std::vector<std::uint64_t> m(ny_, 0);
        for (std::size_t x = 0; x < nx_; ++x)
            for (std::size_t y = 0; y < ny_; ++y) m[y] += counts_[x * ny_ + y];
        return Histogram{std::move(m), total_};
    }
    JointHistogram transpose() const {
        JointHistogram t(ny_, nx_);
        for (std::size_t x = 0; x < nx_; ++x)
            for (std::size_t y = 0; y < ny_; ++y) t.counts_[y * nx_ + x] = counts_[x * ny_ + y];
        t.total_ = total_;
        return t;
    }

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

struct FanoBounds {
    double lower = 0.0;
    double upper = 0.0;
    double conditional_entropy = 0.0;
    std::size_t class_count = 0;
};

namespace detail {

// Sums in ascending order so that the result depends only on the multiset of
// terms, not on the traversal order of the table.
inline double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

inline double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
    if (total == 0) throw domain_error("entropy: histogram is empty");
    const double n = static_cast<double>(total);
    std::vector<double> terms;
    terms.reserve(counts.size());
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        terms.push_back(-p * std::log2(p));
    }
    return std::max(0.0, ordered_sum(terms)) + 0.0;
}

}  // namespace detail

inline double entropy(const Histogram& h) { return detail::entropy_of_counts(h.counts, h.total); }

inline double joint_entropy(const JointHistogram& j) {
    return detail::entropy_of_counts(j.counts(), j.total());
}

/// Symbol histogram of the masked positions of `x`. An empty mask selects all.
template <class T>
Histogram histogram(std::span<const T> x, std::span<const std::uint8_t> mask = {}) {
    if (!mask.empty() && mask.size() != x.size())
        throw domain_error("histogram: mask length differs from sequence length");
    std::size_t symbols = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (mask.empty() || mask[i]) symbols = std::max(symbols, static_cast<std::size_t>(x[i]) + 1);
    Histogram h{std::vector<std::uint64_t>(symbols, 0), 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        ++h.counts[static_cast<std::size_t>(x[i])];
        ++h.total;
    }
    return h;
}

/// Co-occurrence counts of (x[i], y[i]) over positions where mask[i] != 0.
/// Alphabet sizes default to max symbol + 1 over the masked positions.
template <class T, class U>
JointHistogram joint_histogram(std::span<const T> x, std::span<const U> y,
                               std::span<const std::uint8_t> mask, std::size_t x_symbols = 0,
                               std::size_t y_symbols = 0) {
    if (x.size() != y.size()) throw domain_error("joint_histogram: sequence lengths differ");
    if (mask.size() != x.size()) throw domain_error("joint_histogram: mask length differs");
    bool any = false;
    std::size_t mx = 0;
    std::size_t my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!mask[i]) continue;
        any = true;
        mx = std::max(mx, static_cast<std::size_t>(x[i]) + 1);
        my = std::max(my, static_cast<std::size_t>(y[i]) + 1);
    }
    if (!any) throw domain_error("joint_histogram: mask selects no positions");
    if (x_symbols < mx) x_symbols = mx;
    if (y_symbols < my) y_symbols = my;
    JointHistogram j(x_symbols, y_symbols);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (mask[i]) j.add(static_cast<std::size_t>(x[i]), static_cast<std::size_t>(y[i]));
    return j;
}

/// I(X;Y) = sum p(x,y) log2(p(x,y) / (p(x) p(y))). Exactly symmetric under
/// transposition of the table.
inline double mutual_information(const JointHistogram& j) {
    if (j.total() == 0) throw domain_error("mutual_information: histogram is empty");
    const auto px = j.marginal_x();
    const auto py = j.marginal_y();
    const double n = static_cast<double>(j.total());
    std::vector<double> terms;
    for (std::size_t x = 0; x < j.x_symbols(); ++x) {
        if (px.counts[x] == 0) continue;
        const double nx = static_cast<double>(px.counts[x]);
        for (std::size_t y = 0; y < j.y_symbols(); ++y) {
            const auto c = j.at(x, y);
            if (c == 0) continue;
            const double nxy = static_cast<double>(c);
            const double ratio = (nxy * n) / (nx * static_cast<double>(py.counts[y]));
            terms.push_back(nxy / n * std::log2(ratio));
        }
    }
    return std::max(0.0, detail::ordered_sum(terms)) + 0.0;
}

template <class T, class U>
double mutual_information(std::span<const T> x, std::span<const U> y,
                          std::span<const std::uint8_t> mask) {
    return mutual_information(joint_histogram(x, y, mask));
}

/// H(C|X) = H(C) - I(C;X), clamped at zero against estimation noise.
inline double conditional_entropy(double class_entropy, double mutual_info) {
    if (class_entropy < 0.0) throw domain_error("conditional_entropy: H(C) must be nonnegative");
    return std::max(0.0, class_entropy - mutual_info);
}

/// Fano bracket: lower = max(0, (H(C|X) - 1) / log2 Nc), upper = H(C|X) / log2 Nc.
inline FanoBounds fano_bounds(double conditional, std::size_t class_count) {
    if (class_count < 2) throw domain_error("fano_bounds: need at least two classes");
    if (conditional < 0.0) throw domain_error("fano_bounds: conditional entropy must be nonnegative");
    const double denom = std::log2(static_cast<double>(class_count));
    return FanoBounds{std::max(0.0, (conditional - 1.0) / denom), conditional / denom, conditional,
                      class_count};
}

/// Selection score: the clamped Fano lower bound for a given H(C) and I(C;X).
inline double fano_error_score(double class_entropy, double mutual_info, std::size_t class_count) {
    return fano_bounds(conditional_entropy(class_entropy, mutual_info), class_count).lower;
}

}  // namespace hsiband

#endif  // HSIBAND_INFOTHEORY_HPP
