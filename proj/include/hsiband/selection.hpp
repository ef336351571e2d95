#ifndef HSIBAND_SELECTION_HPP
#define HSIBAND_SELECTION_HPP

// Band selection: information-gain ranking, mRMR forward ordering, the Fano
// error-probability wrapper, and the two filter baselines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsiband/classifier.hpp"
#include "hsiband/diagnostics.hpp"
#include "hsiband/errors.hpp"
#include "hsiband/evaluation.hpp"
#include "hsiband/infotheory.hpp"
#include "hsiband/ingest.hpp"
#include "hsiband/text.hpp"

namespace hsiband {

enum class SelectionMethod { hybrid, ig, mi_filter };

inline std::string to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::hybrid: return "hybrid";
        case SelectionMethod::ig: return "ig";
        case SelectionMethod::mi_filter: return "mi-filter";
    }
    return "unknown";
}

inline SelectionMethod parse_method(std::string_view name) {
    if (name == "hybrid") return SelectionMethod::hybrid;
    if (name == "ig") return SelectionMethod::ig;
    if (name == "mi-filter" || name == "mi_filter") return SelectionMethod::mi_filter;
    throw parameter_error("unknown selection method '" + std::string(name) + "'");
}

struct BandScore {
    std::size_t band = 0;
    double score = 0.0;  // I(band; C) in bits

    friend bool operator==(const BandScore&, const BandScore&) = default;
};

struct SelectionConfig {
    /// Signed tolerance of the acceptance rule; negative values admit bands
    /// whose score is slightly worse than the current one.
    double threshold = 0.0;
    std::size_t stage1_keep = 100;
    std::size_t target_bands = 80;
    std::size_t levels = 256;
    SvmParams svm;
    std::uint64_t seed = 0;
    double fraction = 0.5;

    void validate() const {
        if (!std::isfinite(threshold)) throw parameter_error("SelectionConfig: threshold must be finite");
        if (stage1_keep == 0) throw parameter_error("SelectionConfig: stage1_keep must be positive");
        if (target_bands == 0) throw parameter_error("SelectionConfig: target_bands must be positive");
        if (target_bands > stage1_keep)
            throw parameter_error("SelectionConfig: target_bands must not exceed stage1_keep");
        if (levels < 2) throw parameter_error("SelectionConfig: levels must be >= 2");
        if (!(fraction > 0.0 && fraction < 1.0))
            throw parameter_error("SelectionConfig: fraction must lie in (0, 1)");
        svm.validate();
    }
};

/// One examined candidate. `mutual_info` is I(C; GT_est) for the subset that
/// includes the candidate and `pe` the resulting error score.
struct TraceRecord {
    std::size_t step = 0;
    std::size_t candidate = 0;
    double mutual_info = 0.0;
    double pe = 0.0;
    bool accepted = false;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SelectionResult {
    SelectionMethod method = SelectionMethod::hybrid;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> retained;
    std::vector<TraceRecord> trace;
};

/// Raised when scoring fails mid-run; carries everything decided so far.
class selection_aborted : public std::runtime_error {
public:
    selection_aborted(const std::string& what, SelectionResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const SelectionResult& partial() const noexcept { return partial_; }

private:
    SelectionResult partial_;
};

namespace detail {

inline std::vector<level_t> compact(std::span<const level_t> values, std::span<const std::uint8_t> mask) {
    std::vector<level_t> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask[i]) out.push_back(values[i]);
    return out;
}

inline double mutual_information_full(std::span<const level_t> a, std::span<const level_t> b,
                                      std::size_t a_symbols, std::size_t b_symbols) {
    JointHistogram j(a_symbols, b_symbols);
    for (std::size_t i = 0; i < a.size(); ++i) j.add(a[i], b[i]);
    return mutual_information(j);
}

inline std::size_t class_symbols(const GroundTruth& gt) {
    return gt.classes().empty() ? std::size_t{1} : std::size_t{gt.classes().back()} + 1;
}

inline void check_mask(const HyperCube& cube, const GroundTruth& gt, std::span<const std::uint8_t> mask) {
    if (gt.pixels() != cube.pixels()) throw dimension_error("ground truth and cube sizes differ");
    if (mask.size() != cube.pixels()) throw parameter_error("mask size differs from cube size");
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }))
        throw parameter_error("mask selects no pixels");
}

}  // namespace detail

/// I(band; C) for every band over the masked pixels, sorted by descending
/// score; equal scores keep ascending band order.
inline std::vector<BandScore> rank_by_ig(const HyperCube& cube, const GroundTruth& gt,
                                         std::span<const std::uint8_t> mask) {
    detail::check_mask(cube, gt, mask);
    const auto classes = detail::compact(gt.labels(), mask);
    std::vector<BandScore> scores(cube.bands());
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        const auto values = detail::compact(cube.band(b), mask);
        scores[b] = {b, detail::mutual_information_full(values, classes, cube.levels(),
                                                        detail::class_symbols(gt))};
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const BandScore& a, const BandScore& b) { return a.score > b.score; });
    return scores;
}

/// Keeps the first `keep` entries of a ranking.
inline std::vector<BandScore> stage1_cut(std::span<const BandScore> ranked, std::size_t keep) {
    if (keep == 0) throw parameter_error("stage1_cut: keep must be at least 1");
    if (keep > ranked.size()) {
        warn("stage1_cut: keep=" + std::to_string(keep) + " exceeds the " +
             std::to_string(ranked.size()) + " ranked bands; keeping all");
        keep = ranked.size();
    }
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep)};
}

inline std::vector<std::size_t> band_indices(std::span<const BandScore> scores) {
    std::vector<std::size_t> out(scores.size());
    std::transform(scores.begin(), scores.end(), out.begin(), [](const BandScore& s) { return s.band; });
    return out;
}

/// Greedy mRMR forward order of `m` bands drawn from `candidates`. Each step
/// picks the band maximizing relevance I(g; C) minus its mean MI with the
/// bands already picked. All terms use the masked pixels; ties go to the
/// lower band index, with scores within 1e-12 (relative) counted as equal.
inline std::vector<std::size_t> mrmr_order(std::span<const std::size_t> candidates, const HyperCube& cube,
                                           const GroundTruth& gt, std::span<const std::uint8_t> mask,
                                           std::size_t m) {
    if (m > candidates.size()) throw parameter_error("mrmr_order: m exceeds the candidate count");
    detail::check_mask(cube, gt, mask);
    const auto classes = detail::compact(gt.labels(), mask);
    const std::size_t class_symbols = detail::class_symbols(gt);

    const std::size_t n = candidates.size();
    std::vector<std::vector<level_t>> values(n);
    std::vector<double> relevance(n);
    for (std::size_t k = 0; k < n; ++k) {
        values[k] = detail::compact(cube.band(candidates[k]), mask);
        relevance[k] = detail::mutual_information_full(values[k], classes, cube.levels(), class_symbols);
    }

    std::vector<double> redundancy(n, 0.0);
    std::vector<bool> taken(n, false);
    std::vector<std::size_t> order;
    order.reserve(m);
    std::size_t last = n;
    for (std::size_t step = 0; step < m; ++step) {
        std::size_t best = n;
        double best_score = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (taken[k]) continue;
            if (last != n)
                redundancy[k] += detail::mutual_information_full(values[last], values[k], cube.levels(),
                                                                 cube.levels());
            const double score =
                step == 0 ? relevance[k] : relevance[k] - redundancy[k] / static_cast<double>(step);
            const double slack = 1e-12 * std::max(1.0, std::abs(best_score));
            if (best == n || score > best_score + slack ||
                (score >= best_score - slack && candidates[k] < candidates[best])) {
                best = k;
                best_score = score;
            }
        }
        taken[best] = true;
        order.push_back(candidates[best]);
        last = best;
    }
    return order;
}

/// Error score and I(C; GT_est) of one candidate subset.
struct SubsetScore {
    double mutual_info = 0.0;
    double pe = 0.0;
};

using subset_scorer = std::function<SubsetScore(std::span<const std::size_t>)>;

/// Acceptance rule of the wrapper: strict decrease below the retained score
/// shifted by the threshold.
constexpr bool accepts(double pe_new, double pe_retained, double threshold) noexcept {
    return pe_new < pe_retained - threshold;
}

/// Wrapper loop shared by the classifier-backed and replayed scorers. Starts
/// from the first ordered band and tries every later band in order, stopping
/// once `max_bands` are retained.
inline SelectionResult wrapper_select(std::span<const std::size_t> ordered, const subset_scorer& score,
                                      double threshold, std::size_t max_bands) {
    if (ordered.empty()) throw parameter_error("wrapper: ordered band list is empty");
    if (max_bands == 0) throw parameter_error("wrapper: max_bands must be positive");
    SelectionResult result;
    result.threshold = threshold;

    std::vector<std::size_t> subset{ordered.front()};
    SubsetScore current;
    try {
        current = score(subset);
    } catch (const std::exception& e) {
        throw selection_aborted(std::string("wrapper: scoring failed: ") + e.what(), result);
    }
    result.retained = subset;
    result.trace.push_back({0, ordered.front(), current.mutual_info, current.pe, true});

    for (std::size_t k = 1; k < ordered.size() && result.retained.size() < max_bands; ++k) {
        subset.push_back(ordered[k]);
        SubsetScore next;
        try {
            next = score(subset);
        } catch (const std::exception& e) {
            throw selection_aborted(std::string("wrapper: scoring failed: ") + e.what(), result);
        }
        const bool ok = accepts(next.pe, current.pe, threshold);
        result.trace.push_back({k, ordered[k], next.mutual_info, next.pe, ok});
        if (ok) {
            current = next;
            result.retained.push_back(ordered[k]);
        } else {
            subset.pop_back();
        }
    }
    return result;
}

/// Fano wrapper: GT_est for a subset is the SVM prediction over all labeled
/// pixels after training on the train half; its score is the clamped Fano
/// lower bound (H(C) - I(C; GT_est) - 1) / log2 Nc.
inline SelectionResult fano_wrapper(std::span<const std::size_t> ordered, const HyperCube& cube,
                                    const GroundTruth& gt, const PixelSplit& split,
                                    const SelectionConfig& cfg) {
    cfg.validate();
    const auto labeled = gt.labeled_mask();
    detail::check_mask(cube, gt, labeled);
    const std::size_t nc = gt.num_classes();
    if (nc < 2) throw domain_error("fano_wrapper: need at least two classes");
    const auto truth = masked_labels(gt, labeled);
    const double class_entropy = entropy(histogram(std::span<const label_t>(truth)));

    auto scorer = [&](std::span<const std::size_t> subset) {
        const auto field = build_gt_est(cube, subset, split, gt, cfg.svm, cfg.seed);
        const double mi = mutual_information(gt.labels(), std::span<const label_t>(field),
                                             std::span<const std::uint8_t>(labeled));
        return SubsetScore{mi, fano_error_score(class_entropy, mi, nc)};
    };
    auto result = wrapper_select(ordered, scorer, cfg.threshold, cfg.target_bands);
    result.method = SelectionMethod::hybrid;
    result.seed = cfg.seed;
    return result;
}

/// IG ranking, stage-1 cut, mRMR ordering and Fano wrapper on a given split.
/// Relevance and redundancy are estimated over every labeled pixel.
inline SelectionResult run_hybrid(const HyperCube& cube, const GroundTruth& gt, const PixelSplit& split,
                                  const SelectionConfig& cfg) {
    cfg.validate();
    const auto labeled = gt.labeled_mask();
    const auto ranked = rank_by_ig(cube, gt, labeled);
    const auto candidates = band_indices(stage1_cut(ranked, cfg.stage1_keep));
    const auto ordered = mrmr_order(candidates, cube, gt, labeled, candidates.size());
    return fano_wrapper(ordered, cube, gt, split, cfg);
}

inline SelectionResult run_hybrid(const HyperCube& cube, const GroundTruth& gt, const SelectionConfig& cfg) {
    cfg.validate();
    return run_hybrid(cube, gt, split_labeled(gt, cfg.fraction, cfg.seed), cfg);
}

/// Top-n IG bands as a selection result (no rejections in the trace).
inline SelectionResult select_ig(const HyperCube& cube, const GroundTruth& gt, std::size_t n) {
    if (n == 0 || n > cube.bands()) throw parameter_error("select_ig: n must lie in [1, bands]");
    const auto labeled = gt.labeled_mask();
    const auto ranked = rank_by_ig(cube, gt, labeled);
    SelectionResult r;
    r.method = SelectionMethod::ig;
    for (std::size_t k = 0; k < n; ++k) {
        r.retained.push_back(ranked[k].band);
        r.trace.push_back({k, ranked[k].band, ranked[k].score, 0.0, true});
    }
    return r;
}

struct BaselineIgResult {
    std::vector<std::size_t> bands;
    Accuracy accuracy;
};

inline BaselineIgResult baseline_ig(const HyperCube& cube, const GroundTruth& gt, const PixelSplit& split,
                                    std::size_t n, const SvmParams& svm, std::uint64_t seed = 0) {
    auto sel = select_ig(cube, gt, n);
    BaselineIgResult out{std::move(sel.retained), {}};
    out.accuracy = evaluate_subset(cube, gt, split, out.bands, svm, seed);
    return out;
}

/// Band-average estimate of the ground truth: the pixel-wise sum of the
/// selected bands, min-max re-quantized to the cube's level count.
inline std::vector<level_t> band_average_estimate(const HyperCube& cube, std::span<const std::size_t> bands) {
    if (bands.empty()) throw parameter_error("band_average_estimate: no bands");
    std::vector<std::uint32_t> sums(cube.pixels(), 0);
    for (auto b : bands) {
        const auto plane = cube.band(b);
        for (std::size_t p = 0; p < sums.size(); ++p) sums[p] += plane[p];
    }
    return quantize_band(std::span<const std::uint32_t>(sums), cube.levels());
}

/// Filter baseline: bands are taken in descending I(band; C) order and kept
/// iff I(C; GT_est(S + b)) > I(C; GT_est(S)) + threshold, where GT_est is the
/// band-average estimate and I(C; GT_est(empty)) = 0.
inline SelectionResult baseline_mi_filter(const HyperCube& cube, const GroundTruth& gt, double threshold,
                                          std::size_t max_bands) {
    if (!std::isfinite(threshold)) throw parameter_error("baseline_mi_filter: threshold must be finite");
    if (max_bands == 0) throw parameter_error("baseline_mi_filter: max_bands must be positive");
    const auto labeled = gt.labeled_mask();
    const auto ranked = rank_by_ig(cube, gt, labeled);
    const std::size_t nc = gt.num_classes();
    const auto truth = masked_labels(gt, labeled);
    const double class_entropy = entropy(histogram(std::span<const label_t>(truth)));

    SelectionResult result;
    result.method = SelectionMethod::mi_filter;
    result.threshold = threshold;
    std::vector<std::uint32_t> sums(cube.pixels(), 0);
    std::vector<std::uint32_t> trial(cube.pixels());
    double current = 0.0;
    for (std::size_t k = 0; k < ranked.size() && result.retained.size() < max_bands; ++k) {
        const auto plane = cube.band(ranked[k].band);
        for (std::size_t p = 0; p < sums.size(); ++p) trial[p] = sums[p] + plane[p];
        const auto estimate = quantize_band(std::span<const std::uint32_t>(trial), cube.levels());
        const double mi = mutual_information(gt.labels(), std::span<const level_t>(estimate),
                                             std::span<const std::uint8_t>(labeled));
        const double pe = nc >= 2 ? fano_error_score(class_entropy, mi, nc) : 0.0;
        const bool ok = mi > current + threshold;
        result.trace.push_back({k, ranked[k].band, mi, pe, ok});
        if (ok) {
            current = mi;
            sums.swap(trial);
            result.retained.push_back(ranked[k].band);
        }
    }
    return result;
}

// --- trace files -----------------------------------------------------------

inline void write_trace(std::ostream& out, const SelectionResult& r) {
    out << "# hsiband-trace 1 method=" << to_string(r.method)
        << " threshold=" << text::format_double(r.threshold) << " seed=" << r.seed << '\n';
    out << "step,candidate,mutual_info,pe,accepted\n";
    for (const auto& t : r.trace)
        out << t.step << ',' << t.candidate << ',' << text::format_double(t.mutual_info) << ','
            << text::format_double(t.pe) << ',' << (t.accepted ? 1 : 0) << '\n';
}

inline void write_retained(std::ostream& out, const SelectionResult& r) {
    for (auto b : r.retained) out << b << '\n';
}

/// Parses a trace written by write_trace; retained bands are the accepted
/// candidates in trace order.
inline SelectionResult read_trace(std::istream& in) {
    SelectionResult r;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# hsiband-trace 1", 0) != 0)
        throw format_error("trace: missing '# hsiband-trace 1' header");
    for (const auto& field : text::split(line.substr(17), ' ')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "method") r.method = parse_method(value);
        else if (key == "threshold") r.threshold = text::parse_double(value);
        else if (key == "seed") r.seed = text::parse_int<std::uint64_t>(value);
    }
    if (!std::getline(in, line) || text::trim(line) != "step,candidate,mutual_info,pe,accepted")
        throw format_error("trace: missing column header");
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 5) throw format_error("trace: expected 5 fields in '" + line + "'");
        TraceRecord t{text::parse_int<std::size_t>(f[0]), text::parse_int<std::size_t>(f[1]),
                      text::parse_double(f[2]), text::parse_double(f[3]), text::parse_int<int>(f[4]) != 0};
        if (t.accepted) r.retained.push_back(t.candidate);
        r.trace.push_back(t);
    }
    return r;
}

}  // namespace hsiband

#endif  // HSIBAND_SELECTION_HPP
