#ifndef HSIBAND_EVALUATION_HPP
#define HSIBAND_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hsiband/classifier.hpp"
#include "hsiband/errors.hpp"
#include "hsiband/ingest.hpp"

namespace hsiband {

/// Percentages in [0, 100].
struct Accuracy {
    double overall = 0.0;
    double mean_per_class = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
};

/// Overall accuracy and the unweighted mean of per-class recalls, over
/// the classes present in `truth`.
inline Accuracy score_predictions(std::span<const label_t> truth, std::span<const label_t> predicted) {
    if (truth.size() != predicted.size())
        throw parameter_error("score_predictions: truth and prediction lengths differ");
    if (truth.empty()) throw parameter_error("score_predictions: nothing to score");
    std::map<label_t, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
    Accuracy a;
    a.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [ok, n] = per_class[truth[i]];
        ++n;
        if (truth[i] == predicted[i]) {
            ++ok;
            ++a.correct;
        }
    }
    a.overall = 100.0 * static_cast<double>(a.correct) / static_cast<double>(a.total);
    double sum = 0.0;
    for (const auto& [label, counts] : per_class)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    a.mean_per_class = 100.0 * sum / static_cast<double>(per_class.size());
    return a;
}

/// Trains on the train half with the given bands and scores the test half.
inline Accuracy evaluate_subset(const HyperCube& cube, const GroundTruth& gt, const PixelSplit& split,
                                std::span<const std::size_t> bands, const SvmParams& svm,
                                std::uint64_t seed) {
    if (bands.empty()) throw parameter_error("evaluate_subset: band subset is empty");
    const auto model = svm_train(extract_features(cube, bands, split.train),
                                 masked_labels(gt, split.train), svm, seed);
    const auto predicted = svm_predict(model, extract_features(cube, bands, split.test));
    return score_predictions(masked_labels(gt, split.test), predicted);
}

}  // namespace hsiband

#endif  // HSIBAND_EVALUATION_HPP
