#ifndef HSIBAND_CLASSIFIER_HPP
#define HSIBAND_CLASSIFIER_HPP

// Multiclass C-SVM with an RBF kernel: one binary machine per class pair,
// each trained by SMO with second-order working-set selection, combined by
// majority vote.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <list>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsiband/diagnostics.hpp"
#include "hsiband/errors.hpp"
#include "hsiband/ingest.hpp"
#include "hsiband/random.hpp"
#include "hsiband/text.hpp"

namespace hsiband {

struct SvmParams {
    double c = 100.0;
    double gamma = 0.5;
    /// Stopping tolerance on the maximal KKT violation.
    double tolerance = 1e-3;
    /// Iteration cap per binary machine; hitting it clears the convergence flag.
    std::size_t max_iterations = 10'000'000;
    /// Kernel row cache budget per binary machine.
    std::size_t cache_bytes = std::size_t{256} << 20;

    void validate() const {
        if (!(c > 0.0)) throw parameter_error("SvmParams: C must be positive");
        if (!(gamma > 0.0)) throw parameter_error("SvmParams: gamma must be positive");
        if (!(tolerance > 0.0)) throw parameter_error("SvmParams: tolerance must be positive");
        if (max_iterations == 0) throw parameter_error("SvmParams: max_iterations must be positive");
    }
};

/// Dense row-major samples x features.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows * cols)
            throw dimension_error("FeatureMatrix: value count does not match shape");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * cols_, cols_);
    }
    std::span<double> row(std::size_t i) { return std::span<double>(values_).subspan(i * cols_, cols_); }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    std::span<const double> values() const noexcept { return values_; }

    FeatureMatrix transposed() const {
        FeatureMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Feature rows for the masked pixels (row-major scan order), one column per
/// band in `bands`, with levels scaled to [0, 1] by 1 / (levels - 1).
inline FeatureMatrix extract_features(const HyperCube& cube, std::span<const std::size_t> bands,
                                      std::span<const std::uint8_t> mask) {
    if (mask.size() != cube.pixels()) throw parameter_error("extract_features: mask size mismatch");
    std::vector<bool> seen(cube.bands(), false);
    for (auto b : bands) {
        if (b >= cube.bands()) throw parameter_error("extract_features: band index out of range");
        if (seen[b]) throw parameter_error("extract_features: duplicate band " + std::to_string(b));
        seen[b] = true;
    }
    std::vector<std::size_t> pixels;
    for (std::size_t p = 0; p < mask.size(); ++p)
        if (mask[p]) pixels.push_back(p);
    if (pixels.empty()) throw parameter_error("extract_features: mask selects no pixels");

    const double scale = 1.0 / static_cast<double>(cube.levels() - 1);
    FeatureMatrix x(pixels.size(), bands.size());
    for (std::size_t j = 0; j < bands.size(); ++j) {
        const auto plane = cube.band(bands[j]);
        for (std::size_t i = 0; i < pixels.size(); ++i)
            x(i, j) = static_cast<double>(plane[pixels[i]]) * scale;
    }
    return x;
}

/// Labels of the masked pixels in the same order as extract_features rows.
inline std::vector<label_t> masked_labels(const GroundTruth& gt, std::span<const std::uint8_t> mask) {
    if (mask.size() != gt.pixels()) throw parameter_error("masked_labels: mask size mismatch");
    std::vector<label_t> y;
    const auto labels = gt.labels();
    for (std::size_t p = 0; p < mask.size(); ++p)
        if (mask[p]) y.push_back(labels[p]);
    return y;
}

/// Binary machine separating `positive` (+1) from `negative` (-1):
/// f(x) = sum_k coef[k] * K(sv[k], x) - rho, with coef = alpha * y.
struct PairMachine {
    label_t positive = 0;
    label_t negative = 0;
    std::vector<std::size_t> support;  // indices into SvmModel::support_vectors
    std::vector<double> coef;
    double rho = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
};

struct SvmModel {
    std::vector<label_t> classes;
    double c = 0.0;
    double gamma = 0.0;
    std::size_t dims = 0;
    /// Provenance of the feature columns; empty when trained on raw matrices.
    std::vector<std::size_t> bands;
    /// Level-to-feature scale used by extract_features (1 / (levels - 1)).
    double feature_scale = 1.0;
    /// Unique support vectors, row-major n_sv x dims.
    std::vector<double> support_vectors;
    std::vector<PairMachine> machines;

    std::size_t num_support_vectors() const noexcept {
        return dims == 0 ? 0 : support_vectors.size() / dims;
    }
    bool converged() const noexcept {
        return std::all_of(machines.begin(), machines.end(),
                           [](const PairMachine& m) { return m.converged; });
    }
};

namespace detail {

// Row cache for Q_ij = y_i y_j K(x_i, x_j); least recently used rows are
// evicted once the byte budget is exhausted.
class kernel_rows {
public:
    kernel_rows(const std::vector<double>& x, std::size_t n, std::size_t dims,
                const std::vector<signed char>& y, double gamma, std::size_t budget_bytes)
        : x_(x), n_(n), dims_(dims), y_(y), gamma_(gamma), rows_(n), where_(n) {
        sq_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < dims; ++d) s += x[i * dims + d] * x[i * dims + d];
            sq_[i] = s;
        }
        const std::size_t row_bytes = std::max<std::size_t>(1, n * sizeof(float));
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    }

    const float* row(std::size_t i) {
        if (!rows_[i].empty()) {
            lru_.splice(lru_.end(), lru_, where_[i]);
            return rows_[i].data();
        }
        if (lru_.size() >= capacity_) {
            const std::size_t victim = lru_.front();
            lru_.pop_front();
            std::vector<float>().swap(rows_[victim]);
        }
        auto& r = rows_[i];
        r.resize(n_);
        const double* xi = &x_[i * dims_];
        for (std::size_t j = 0; j < n_; ++j) {
            const double* xj = &x_[j * dims_];
            double dot = 0.0;
            for (std::size_t d = 0; d < dims_; ++d) dot += xi[d] * xj[d];
            const double k = std::exp(-gamma_ * std::max(0.0, sq_[i] + sq_[j] - 2.0 * dot));
            r[j] = static_cast<float>(y_[i] * y_[j] * k);
        }
        lru_.push_back(i);
        where_[i] = std::prev(lru_.end());
        return r.data();
    }

private:
    const std::vector<double>& x_;
    std::size_t n_;
    std::size_t dims_;
    const std::vector<signed char>& y_;
    double gamma_;
    std::vector<double> sq_;
    std::vector<std::vector<float>> rows_;
    std::list<std::size_t> lru_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::size_t capacity_ = 0;
};

struct binary_solution {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

// Dual: min 1/2 a'Qa - e'a  s.t. 0 <= a <= C, y'a = 0.
// `order` fixes the scan order of working-set selection; ties resolve to the
// last qualifying index in that order.
inline binary_solution solve_binary(const std::vector<double>& x, std::size_t n, std::size_t dims,
                                    const std::vector<signed char>& y, const SvmParams& p,
                                    const std::vector<std::size_t>& order) {
    constexpr double tau = 1e-12;
    const double inf = std::numeric_limits<double>::infinity();
    const double c = p.c;
    kernel_rows q(x, n, dims, y, p.gamma, p.cache_bytes);

    binary_solution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto& alpha = sol.alpha;
    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    std::size_t iter = 0;
    for (; iter < p.max_iterations; ++iter) {
        double gmax = -inf;
        double gmax2 = -inf;
        std::size_t i = n;
        for (auto t : order) {
            if (y[t] == 1) {
                if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
            } else {
                if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
            }
        }
        if (i == n) break;
        const float* qi = q.row(i);

        std::size_t j = n;
        double best = inf;
        for (auto t : order) {
            double diff = 0.0;
            double quad = 0.0;
            if (y[t] == 1) {
                if (lower(t)) continue;
                gmax2 = std::max(gmax2, grad[t]);
                diff = gmax + grad[t];
                quad = 2.0 - 2.0 * y[i] * qi[t];
            } else {
                if (upper(t)) continue;
                gmax2 = std::max(gmax2, -grad[t]);
                diff = gmax - grad[t];
                quad = 2.0 + 2.0 * y[i] * qi[t];
            }
            if (diff > 0.0) {
                const double obj = -(diff * diff) / (quad > 0.0 ? quad : tau);
                if (obj <= best) { best = obj; j = t; }
            }
        }
        if (gmax + gmax2 < p.tolerance || j == n) break;
        const float* qj = q.row(j);
        qi = q.row(i);  // may have been evicted by the fetch of row j

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * qi[j];
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
            }
        } else {
            double quad = 2.0 - 2.0 * qi[j];
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t k = 0; k < n; ++k) grad[k] += qi[k] * di + qj[k] * dj;
    }
    sol.iterations = iter;
    sol.converged = iter < p.max_iterations;

    double ub = inf;
    double lb = -inf;
    double sum_free = 0.0;
    std::size_t free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    sol.rho = free > 0 ? sum_free / static_cast<double>(free) : (ub + lb) / 2.0;
    return sol;
}

}  // namespace detail

/// Trains one binary machine per unordered class pair. The seed permutes the
/// scan order of working-set selection, so identical inputs and seed give a
/// bit-identical model. Hitting the iteration cap returns the model with
/// converged() == false instead of throwing.
inline SvmModel svm_train(const FeatureMatrix& x, std::span<const label_t> y, const SvmParams& params,
                          std::uint64_t seed) {
    params.validate();
    if (x.rows() != y.size()) throw parameter_error("svm_train: row count differs from label count");
    std::vector<label_t> classes(y.begin(), y.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) throw domain_error("svm_train: need at least two distinct labels");

    std::map<label_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);

    const std::size_t dims = x.cols();
    SvmModel model;
    model.classes = classes;
    model.c = params.c;
    model.gamma = params.gamma;
    model.dims = dims;

    std::vector<std::size_t> global_to_sv(x.rows(), std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> sv_rows;
    struct raw_machine {
        PairMachine machine;
        std::vector<std::size_t> rows;
    };
    std::vector<raw_machine> raw;

    rng_engine rng(seed);
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            const auto& pos = members[classes[a]];
            const auto& neg = members[classes[b]];
            const std::size_t n = pos.size() + neg.size();
            std::vector<std::size_t> rows;
            rows.reserve(n);
            rows.insert(rows.end(), pos.begin(), pos.end());
            rows.insert(rows.end(), neg.begin(), neg.end());
            std::vector<double> buf(n * dims);
            std::vector<signed char> ys(n);
            for (std::size_t k = 0; k < n; ++k) {
                const auto r = x.row(rows[k]);
                std::copy(r.begin(), r.end(), buf.begin() + static_cast<std::ptrdiff_t>(k * dims));
                ys[k] = k < pos.size() ? 1 : -1;
            }
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(order), rng);

            auto sol = detail::solve_binary(buf, n, dims, ys, params, order);
            if (!sol.converged)
                warn("svm_train: machine " + std::to_string(classes[a]) + " vs " +
                     std::to_string(classes[b]) + " stopped at the iteration cap");

            raw_machine rm;
            rm.machine.positive = classes[a];
            rm.machine.negative = classes[b];
            rm.machine.rho = sol.rho;
            rm.machine.converged = sol.converged;
            rm.machine.iterations = sol.iterations;
            for (std::size_t k = 0; k < n; ++k) {
                if (sol.alpha[k] <= 0.0) continue;
                rm.rows.push_back(rows[k]);
                rm.machine.coef.push_back(sol.alpha[k] * ys[k]);
                if (global_to_sv[rows[k]] == std::numeric_limits<std::size_t>::max()) {
                    global_to_sv[rows[k]] = 0;
                    sv_rows.push_back(rows[k]);
                }
            }
            raw.push_back(std::move(rm));
        }
    }

    std::sort(sv_rows.begin(), sv_rows.end());
    model.support_vectors.reserve(sv_rows.size() * dims);
    for (std::size_t s = 0; s < sv_rows.size(); ++s) {
        global_to_sv[sv_rows[s]] = s;
        const auto r = x.row(sv_rows[s]);
        model.support_vectors.insert(model.support_vectors.end(), r.begin(), r.end());
    }
    for (auto& rm : raw) {
        for (auto r : rm.rows) rm.machine.support.push_back(global_to_sv[r]);
        model.machines.push_back(std::move(rm.machine));
    }
    return model;
}

namespace detail {

inline void check_columns(const SvmModel& m, const FeatureMatrix& x) {
    if (x.rows() > 0 && x.cols() != m.dims)
        throw parameter_error("svm_predict: matrix has " + std::to_string(x.cols()) +
                              " columns, model expects " + std::to_string(m.dims));
}

inline void kernel_against_support(const SvmModel& m, std::span<const double> row,
                                   std::vector<double>& out) {
    const std::size_t nsv = m.num_support_vectors();
    out.resize(nsv);
    for (std::size_t s = 0; s < nsv; ++s) {
        const double* sv = &m.support_vectors[s * m.dims];
        double d2 = 0.0;
        for (std::size_t d = 0; d < m.dims; ++d) {
            const double diff = sv[d] - row[d];
            d2 += diff * diff;
        }
        out[s] = std::exp(-m.gamma * d2);
    }
}

inline double decision_value(const PairMachine& pm, const std::vector<double>& k) {
    double f = 0.0;
    for (std::size_t t = 0; t < pm.support.size(); ++t) f += pm.coef[t] * k[pm.support[t]];
    return f - pm.rho;
}

}  // namespace detail

/// Pairwise votes per class (in model.classes order) for each row.
inline std::vector<std::vector<std::uint32_t>> svm_votes(const SvmModel& m, const FeatureMatrix& x) {
    detail::check_columns(m, x);
    std::unordered_map<label_t, std::size_t> slot;
    for (std::size_t k = 0; k < m.classes.size(); ++k) slot[m.classes[k]] = k;
    std::vector<std::vector<std::uint32_t>> votes(x.rows(), std::vector<std::uint32_t>(m.classes.size(), 0));
    std::vector<double> k;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        detail::kernel_against_support(m, x.row(i), k);
        for (const auto& pm : m.machines)
            ++votes[i][slot[detail::decision_value(pm, k) > 0.0 ? pm.positive : pm.negative]];
    }
    return votes;
}

/// Majority vote over all pairwise machines; ties go to the lowest label.
inline std::vector<label_t> svm_predict(const SvmModel& m, const FeatureMatrix& x) {
    const auto votes = svm_votes(m, x);
    std::vector<label_t> out(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < votes[i].size(); ++k)
            if (votes[i][k] > votes[i][best]) best = k;
        out[i] = m.classes[best];
    }
    return out;
}

/// Trains on the train-mask pixels and predicts every labeled pixel. The
/// returned field has one entry per pixel, 0 where the ground truth is 0.
inline std::vector<label_t> build_gt_est(const HyperCube& cube, std::span<const std::size_t> bands,
                                         const PixelSplit& split, const GroundTruth& gt,
                                         const SvmParams& params, std::uint64_t seed) {
    if (bands.empty()) throw parameter_error("build_gt_est: band subset is empty");
    const auto train_x = extract_features(cube, bands, split.train);
    const auto train_y = masked_labels(gt, split.train);
    const auto model = svm_train(train_x, train_y, params, seed);

    const auto labeled = gt.labeled_mask();
    const auto predicted = svm_predict(model, extract_features(cube, bands, labeled));
    std::vector<label_t> field(gt.pixels(), 0);
    std::size_t k = 0;
    for (std::size_t p = 0; p < labeled.size(); ++p)
        if (labeled[p]) field[p] = predicted[k++];
    return field;
}

// --- model persistence -----------------------------------------------------

inline constexpr int svm_model_format_version = 1;

inline void save_model(std::ostream& out, const SvmModel& m) {
    using text::format_double;
    out << "hsiband-svm " << svm_model_format_version << '\n';
    out << "c " << format_double(m.c) << '\n';
    out << "gamma " << format_double(m.gamma) << '\n';
    out << "dims " << m.dims << '\n';
    out << "feature_scale " << format_double(m.feature_scale) << '\n';
    out << "bands " << m.bands.size();
    for (auto b : m.bands) out << ' ' << b;
    out << "\nclasses " << m.classes.size();
    for (auto c : m.classes) out << ' ' << c;
    out << "\nsupport_vectors " << m.num_support_vectors() << '\n';
    for (std::size_t s = 0; s < m.num_support_vectors(); ++s) {
        for (std::size_t d = 0; d < m.dims; ++d)
            out << (d ? " " : "") << format_double(m.support_vectors[s * m.dims + d]);
        out << '\n';
    }
    out << "machines " << m.machines.size() << '\n';
    for (const auto& pm : m.machines) {
        out << "pair " << pm.positive << ' ' << pm.negative << ' ' << format_double(pm.rho) << ' '
            << (pm.converged ? 1 : 0) << ' ' << pm.iterations << ' ' << pm.support.size() << '\n';
        for (std::size_t t = 0; t < pm.support.size(); ++t)
            out << pm.support[t] << ' ' << format_double(pm.coef[t]) << '\n';
    }
    out << "end\n";
}

inline SvmModel load_model(std::istream& in) {
    auto expect = [&](const std::string& key) {
        std::string word;
        if (!(in >> word) || word != key)
            throw format_error("svm model: expected '" + key + "', found '" + word + "'");
    };
    auto read_token = [&]() {
        std::string t;
        if (!(in >> t)) throw format_error("svm model: unexpected end of input");
        return t;
    };
    auto read_size = [&]() { return text::parse_int<std::size_t>(read_token()); };
    auto read_double = [&]() { return text::parse_double(read_token()); };

    expect("hsiband-svm");
    const int version = text::parse_int<int>(read_token());
    if (version != svm_model_format_version)
        throw format_error("svm model: unsupported format version " + std::to_string(version));
    SvmModel m;
    expect("c");
    m.c = read_double();
    expect("gamma");
    m.gamma = read_double();
    expect("dims");
    m.dims = read_size();
    expect("feature_scale");
    m.feature_scale = read_double();
    expect("bands");
    m.bands.resize(read_size());
    for (auto& b : m.bands) b = read_size();
    expect("classes");
    m.classes.resize(read_size());
    for (auto& c : m.classes) c = text::parse_int<label_t>(read_token());
    expect("support_vectors");
    const std::size_t nsv = read_size();
    m.support_vectors.resize(nsv * m.dims);
    for (auto& v : m.support_vectors) v = read_double();
    expect("machines");
    m.machines.resize(read_size());
    for (auto& pm : m.machines) {
        expect("pair");
        pm.positive = text::parse_int<label_t>(read_token());
        pm.negative = text::parse_int<label_t>(read_token());
        pm.rho = read_double();
        pm.converged = read_size() != 0;
        pm.iterations = read_size();
        const std::size_t count = read_size();
        pm.support.resize(count);
        pm.coef.resize(count);
        for (std::size_t t = 0; t < count; ++t) {
            pm.support[t] = read_size();
            if (pm.support[t] >= nsv) throw format_error("svm model: support index out of range");
            pm.coef[t] = read_double();
        }
    }
    expect("end");
    return m;
}

// --- hyperparameter search -------------------------------------------------

struct GridPoint {
    double c = 0.0;
    double gamma = 0.0;
    double accuracy = 0.0;  // percent, averaged over folds
};

struct GridSearchResult {
    SvmParams best;
    std::vector<GridPoint> points;
};

/// Stratified k-fold cross-validation over the C x gamma grid. Ties keep the
/// earliest grid point.
inline GridSearchResult grid_search(const FeatureMatrix& x, std::span<const label_t> y,
                                    const SvmParams& base, std::uint64_t seed,
                                    std::vector<double> cs = {1, 10, 100, 1000},
                                    std::vector<double> gammas = {0.1, 0.5, 1, 2},
                                    std::size_t folds = 5) {
    if (folds < 2) throw parameter_error("grid_search: need at least two folds");
    if (x.rows() != y.size()) throw parameter_error("grid_search: row count differs from label count");

    std::vector<std::size_t> fold(y.size());
    {
        std::map<label_t, std::vector<std::size_t>> members;
        for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
        rng_engine rng(derive_seed(seed, 0xf01d));
        std::size_t offset = 0;
        for (auto& [label, idx] : members) {
            shuffle(std::span<std::size_t>(idx), rng);
            for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = (k + offset) % folds;
            offset += idx.size();
        }
    }

    auto subset = [&](bool training, std::size_t f) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            if ((fold[i] == f) != training) rows.push_back(i);
        FeatureMatrix m(rows.size(), x.cols());
        std::vector<label_t> labels(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto r = x.row(rows[k]);
            std::copy(r.begin(), r.end(), m.row(k).begin());
            labels[k] = y[rows[k]];
        }
        return std::pair{std::move(m), std::move(labels)};
    };

    GridSearchResult result;
    double best_acc = -1.0;
    for (double c : cs) {
        for (double g : gammas) {
            SvmParams p = base;
            p.c = c;
            p.gamma = g;
            std::size_t correct = 0;
            std::size_t total = 0;
            for (std::size_t f = 0; f < folds; ++f) {
                auto [tx, ty] = subset(true, f);
                auto [vx, vy] = subset(false, f);
                if (vy.empty()) continue;
                const auto model = svm_train(tx, ty, p, derive_seed(seed, f));
                const auto pred = svm_predict(model, vx);
                for (std::size_t k = 0; k < vy.size(); ++k) correct += pred[k] == vy[k];
                total += vy.size();
            }
            const double acc = total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0;
            result.points.push_back({c, g, acc});
            if (acc > best_acc) {
                best_acc = acc;
                result.best = p;
            }
        }
    }
    return result;
}

}  // namespace hsiband

#endif  // HSIBAND_CLASSIFIER_HPP
