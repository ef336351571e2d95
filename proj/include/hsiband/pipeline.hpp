#ifndef HSIBAND_PIPELINE_HPP
#define HSIBAND_PIPELINE_HPP

// Experiment orchestration: one selection run per (threshold, repeat),
// accuracy at each band-count checkpoint over prefixes of that run, and
// CSV / Markdown renderings of the resulting accuracy table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hsiband/evaluation.hpp"
#include "hsiband/ingest.hpp"
#include "hsiband/random.hpp"
#include "hsiband/selection.hpp"
#include "hsiband/text.hpp"

namespace hsiband {

/// Band counts at which the wrapper tables are read out.
inline const std::vector<std::size_t> wrapper_checkpoints{2,  3,  4,  12, 14, 18, 20, 25, 35,
                                                          36, 40, 45, 50, 53, 60, 70, 75, 80};
/// Band counts of the information-gain filter table.
inline const std::vector<std::size_t> filter_checkpoints{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 70, 80};
inline const std::vector<double> default_thresholds{-0.02, -0.005, -0.0035, 0.0};

struct ExperimentSpec {
    SelectionMethod method = SelectionMethod::hybrid;
    std::vector<double> thresholds = default_thresholds;
    std::vector<std::size_t> band_counts = wrapper_checkpoints;
    std::size_t repeats = 5;
    std::uint64_t base_seed = 0;
    std::string cube_path;
    std::string descriptor_path;
    std::string gt_path;
    /// threshold, target_bands and seed are overridden per run.
    SelectionConfig selection;

    void validate() const {
        if (repeats == 0) throw parameter_error("ExperimentSpec: repeats must be at least 1");
        if (band_counts.empty()) throw parameter_error("ExperimentSpec: no band-count checkpoints");
        if (band_counts.front() == 0) throw parameter_error("ExperimentSpec: checkpoints must be positive");
        if (!std::is_sorted(band_counts.begin(), band_counts.end()) ||
            std::adjacent_find(band_counts.begin(), band_counts.end()) != band_counts.end())
            throw parameter_error("ExperimentSpec: checkpoints must be strictly ascending");
        if (method != SelectionMethod::ig && thresholds.empty())
            throw parameter_error("ExperimentSpec: no thresholds");
        for (double th : thresholds)
            if (!std::isfinite(th)) throw parameter_error("ExperimentSpec: thresholds must be finite");
        if (!(selection.fraction > 0.0 && selection.fraction < 1.0))
            throw parameter_error("ExperimentSpec: fraction must lie in (0, 1)");
        selection.svm.validate();
    }

    std::size_t max_bands() const { return band_counts.back(); }
};

struct Dataset {
    HyperCube cube;
    GroundTruth gt;
};

/// Loads and quantizes a cube and its ground truth. An empty descriptor
/// path defaults to the cube path with ".hdr" appended.
inline Dataset load_dataset(const std::filesystem::path& cube_path, std::filesystem::path descriptor_path,
                            const std::filesystem::path& gt_path, std::size_t levels) {
    if (descriptor_path.empty()) descriptor_path = cube_path.string() + ".hdr";
    Dataset d{quantize(load_cube(cube_path, descriptor_path), levels), load_ground_truth(gt_path)};
    if (d.gt.rows() != d.cube.rows() || d.gt.cols() != d.cube.cols())
        throw dimension_error("ground truth is " + std::to_string(d.gt.rows()) + "x" +
                              std::to_string(d.gt.cols()) + " but the cube is " +
                              std::to_string(d.cube.rows()) + "x" + std::to_string(d.cube.cols()));
    return d;
}

/// Split and SVM seed of repeat `r`.
constexpr std::uint64_t repeat_seed(std::uint64_t base_seed, std::size_t r) noexcept {
    return base_seed + r;
}

struct ReportCell {
    /// Overall test accuracy (%) of each repeat that reached the checkpoint.
    std::vector<double> samples;
    std::vector<double> mean_per_class_samples;

    bool empty() const noexcept { return samples.empty(); }
    double mean() const {
        if (samples.empty()) return 0.0;
        double s = 0.0;
        for (double v : samples) s += v;
        return s / static_cast<double>(samples.size());
    }
    /// Sample standard deviation; 0 for a single sample.
    double stddev() const {
        if (samples.size() < 2) return 0.0;
        const double m = mean();
        double s = 0.0;
        for (double v : samples) s += (v - m) * (v - m);
        return std::sqrt(s / static_cast<double>(samples.size() - 1));
    }
    double mean_per_class() const {
        if (mean_per_class_samples.empty()) return 0.0;
        double s = 0.0;
        for (double v : mean_per_class_samples) s += v;
        return s / static_cast<double>(mean_per_class_samples.size());
    }
};

/// One selection run and its checkpoint accuracies.
struct RunRecord {
    std::size_t column = 0;
    double threshold = 0.0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> retained;
    /// Parallel to EvalReport::band_counts; nullopt where the run stalled.
    std::vector<std::optional<Accuracy>> accuracies;
};

struct EvalReport {
    SelectionMethod method = SelectionMethod::hybrid;
    std::vector<std::string> columns;
    std::vector<double> thresholds;
    std::vector<std::size_t> band_counts;
    std::size_t repeats = 0;
    std::uint64_t base_seed = 0;
    std::string dataset_hash;
    std::map<std::string, std::string> params;
    /// cells[row][column], rows follow band_counts.
    std::vector<std::vector<ReportCell>> cells;
    /// achieved[column][repeat]: retained band count of that run.
    std::vector<std::vector<std::size_t>> achieved;
    std::vector<std::string> notes;
    std::vector<RunRecord> runs;
};

inline std::string dataset_hash(const HyperCube& cube, const GroundTruth& gt) {
    fnv1a64 h;
    const std::uint64_t dims[4] = {cube.rows(), cube.cols(), cube.bands(), cube.levels()};
    h.update(dims, sizeof dims);
    h.update(cube.data());
    h.update(gt.labels());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
    return buf;
}

namespace detail {

inline std::string column_name(SelectionMethod m, double th) {
    return m == SelectionMethod::ig ? std::string("ig") : "Th=" + text::format_double(th);
}

inline std::string spec_fingerprint(const ExperimentSpec& spec, const std::string& hash) {
    std::ostringstream s;
    s << to_string(spec.method) << '|' << hash << '|' << spec.selection.stage1_keep << '|'
      << text::format_double(spec.selection.fraction) << '|' << text::format_double(spec.selection.svm.c)
      << '|' << text::format_double(spec.selection.svm.gamma) << '|'
      << text::format_double(spec.selection.svm.tolerance) << '|' << spec.selection.svm.max_iterations;
    for (auto n : spec.band_counts) s << ',' << n;
    return s.str();
}

inline nlohmann::json to_json(const RunRecord& r, const std::string& fingerprint) {
    nlohmann::json j;
    j["fingerprint"] = fingerprint;
    j["threshold"] = r.threshold;
    j["repeat"] = r.repeat;
    j["seed"] = r.seed;
    j["retained"] = r.retained;
    auto cells = nlohmann::json::array();
    for (const auto& a : r.accuracies) {
        if (a) cells.push_back({{"overall", a->overall}, {"mean_per_class", a->mean_per_class},
                                {"correct", a->correct}, {"total", a->total}});
        else cells.push_back(nullptr);
    }
    j["accuracies"] = cells;
    return j;
}

inline RunRecord from_json(const nlohmann::json& j) {
    RunRecord r;
    r.threshold = j.at("threshold").get<double>();
    r.repeat = j.at("repeat").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.retained = j.at("retained").get<std::vector<std::size_t>>();
    for (const auto& c : j.at("accuracies")) {
        if (c.is_null()) {
            r.accuracies.emplace_back();
        } else {
            Accuracy a;
            a.overall = c.at("overall").get<double>();
            a.mean_per_class = c.at("mean_per_class").get<double>();
            a.correct = c.at("correct").get<std::size_t>();
            a.total = c.at("total").get<std::size_t>();
            r.accuracies.emplace_back(a);
        }
    }
    return r;
}

inline SelectionResult run_method(const ExperimentSpec& spec, const HyperCube& cube, const GroundTruth& gt,
                                  const PixelSplit& split, double threshold, std::uint64_t seed) {
    switch (spec.method) {
        case SelectionMethod::hybrid: {
            SelectionConfig cfg = spec.selection;
            cfg.threshold = threshold;
            cfg.seed = seed;
            cfg.target_bands = spec.max_bands();
            return run_hybrid(cube, gt, split, cfg);
        }
        case SelectionMethod::ig:
            return select_ig(cube, gt, std::min(spec.max_bands(), cube.bands()));
        case SelectionMethod::mi_filter:
            return baseline_mi_filter(cube, gt, threshold, spec.max_bands());
    }
    throw parameter_error("unknown selection method");
}

inline std::vector<std::optional<Accuracy>> evaluate_prefixes(const ExperimentSpec& spec, const HyperCube& cube,
                                                              const GroundTruth& gt, const PixelSplit& split,
                                                              std::span<const std::size_t> retained,
                                                              std::uint64_t seed) {
    std::vector<std::optional<Accuracy>> out;
    for (auto n : spec.band_counts) {
        if (retained.size() < n) {
            out.emplace_back();
            continue;
        }
        out.emplace_back(evaluate_subset(cube, gt, split, retained.first(n), spec.selection.svm, seed));
    }
    return out;
}

inline void assemble(EvalReport& report) {
    const std::size_t rows = report.band_counts.size();
    const std::size_t cols = report.columns.size();
    report.cells.assign(rows, std::vector<ReportCell>(cols));
    report.achieved.assign(cols, std::vector<std::size_t>(report.repeats, 0));
    for (const auto& run : report.runs) {
        report.achieved[run.column][run.repeat] = run.retained.size();
        for (std::size_t i = 0; i < rows; ++i) {
            if (!run.accuracies[i]) continue;
            report.cells[i][run.column].samples.push_back(run.accuracies[i]->overall);
            report.cells[i][run.column].mean_per_class_samples.push_back(run.accuracies[i]->mean_per_class);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t i = 0; i < rows; ++i) {
            const auto reached = report.cells[i][c].samples.size();
            if (reached < report.repeats)
                report.notes.push_back(report.columns[c] + ": checkpoint " +
                                       std::to_string(report.band_counts[i]) + " reached in " +
                                       std::to_string(reached) + "/" + std::to_string(report.repeats) +
                                       " runs");
        }
    }
}

inline std::map<std::string, std::string> spec_params(const ExperimentSpec& spec) {
    const auto& s = spec.selection;
    return {{"levels", std::to_string(s.levels)},
            {"stage1_keep", std::to_string(s.stage1_keep)},
            {"fraction", text::format_double(s.fraction)},
            {"svm_c", text::format_double(s.svm.c)},
            {"svm_gamma", text::format_double(s.svm.gamma)},
            {"svm_tol", text::format_double(s.svm.tolerance)},
            {"svm_max_iter", std::to_string(s.svm.max_iterations)}};
}

}  // namespace detail

/// Runs the method once per (threshold, repeat) up to the largest checkpoint
/// and scores every checkpoint on a prefix of that run. Repeat r uses split
/// and SVM seed base_seed + r. When `run_log` is given, runs already recorded
/// there for an identical spec are reused and new runs are appended as JSON
/// lines.
inline EvalReport run_experiment(const ExperimentSpec& spec, const HyperCube& cube, const GroundTruth& gt,
                                 const std::filesystem::path& run_log = {}) {
    spec.validate();
    if (spec.method == SelectionMethod::hybrid && spec.max_bands() > spec.selection.stage1_keep)
        throw parameter_error("run_experiment: largest checkpoint exceeds stage1_keep");

    EvalReport report;
    report.method = spec.method;
    report.band_counts = spec.band_counts;
    report.repeats = spec.repeats;
    report.base_seed = spec.base_seed;
    report.dataset_hash = dataset_hash(cube, gt);
    report.params = detail::spec_params(spec);
    if (spec.method == SelectionMethod::ig) {
        report.thresholds = {0.0};
    } else {
        report.thresholds = spec.thresholds;
    }
    for (double th : report.thresholds) report.columns.push_back(detail::column_name(spec.method, th));

    const auto fingerprint = detail::spec_fingerprint(spec, report.dataset_hash);
    std::map<std::pair<std::string, std::uint64_t>, RunRecord> cached;  // (threshold, seed)
    if (!run_log.empty() && std::filesystem::exists(run_log)) {
        std::ifstream in(run_log);
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("fingerprint") || j["fingerprint"] != fingerprint) continue;
            auto r = detail::from_json(j);
            if (r.accuracies.size() != spec.band_counts.size()) continue;
            cached[{text::format_double(r.threshold), r.seed}] = std::move(r);
        }
    }
    std::ofstream log;
    if (!run_log.empty()) {
        log.open(run_log, std::ios::app);
        if (!log) throw io_error("cannot open run log: " + run_log.string());
    }

    for (std::size_t c = 0; c < report.thresholds.size(); ++c) {
        const double th = report.thresholds[c];
        for (std::size_t r = 0; r < spec.repeats; ++r) {
            const auto seed = repeat_seed(spec.base_seed, r);
            if (auto it = cached.find({text::format_double(th), seed}); it != cached.end()) {
                RunRecord rec = it->second;
                rec.column = c;
                rec.repeat = r;
                report.runs.push_back(std::move(rec));
                continue;
            }
            const auto split = split_labeled(gt, spec.selection.fraction, seed);
            RunRecord rec;
            rec.column = c;
            rec.threshold = th;
            rec.repeat = r;
            rec.seed = seed;
            rec.retained = detail::run_method(spec, cube, gt, split, th, seed).retained;
            rec.accuracies = detail::evaluate_prefixes(spec, cube, gt, split, rec.retained, seed);
            if (log.is_open()) log << detail::to_json(rec, fingerprint).dump() << '\n' << std::flush;
            report.runs.push_back(std::move(rec));
        }
    }
    detail::assemble(report);
    return report;
}

/// Re-evaluates a recorded selection trace as a one-column, one-repeat
/// report. The split and SVM seed come from the trace.
inline EvalReport replay_trace(const ExperimentSpec& spec, const HyperCube& cube, const GroundTruth& gt,
                               const SelectionResult& trace) {
    spec.validate();
    EvalReport report;
    report.method = trace.method;
    report.band_counts = spec.band_counts;
    report.repeats = 1;
    report.base_seed = trace.seed;
    report.dataset_hash = dataset_hash(cube, gt);
    report.params = detail::spec_params(spec);
    report.thresholds = {trace.method == SelectionMethod::ig ? 0.0 : trace.threshold};
    report.columns = {detail::column_name(trace.method, report.thresholds[0])};

    const auto split = split_labeled(gt, spec.selection.fraction, trace.seed);
    RunRecord rec;
    rec.threshold = report.thresholds[0];
    rec.seed = trace.seed;
    rec.retained = trace.retained;
    rec.accuracies = detail::evaluate_prefixes(spec, cube, gt, split, rec.retained, trace.seed);
    report.runs.push_back(std::move(rec));
    detail::assemble(report);
    return report;
}

// --- report rendering ------------------------------------------------------

namespace detail {

inline std::string csv_header(const EvalReport& r) {
    std::string s = "# method=" + to_string(r.method) + " repeats=" + std::to_string(r.repeats) +
                    " base_seed=" + std::to_string(r.base_seed) + " dataset=" + r.dataset_hash;
    for (const auto& [k, v] : r.params) s += " " + k + "=" + v;
    return s;
}

inline std::string render_csv(const EvalReport& r) {
    std::ostringstream out;
    out << csv_header(r) << '\n' << "bands";
    for (const auto& c : r.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < r.band_counts.size(); ++i) {
        out << r.band_counts[i];
        for (const auto& cell : r.cells[i]) {
            out << ',';
            if (!cell.empty()) out << text::format_fixed(cell.mean(), 2);
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_csv_long(const EvalReport& r) {
    std::ostringstream out;
    out << csv_header(r) << '\n' << "column,bands,mean,std,mean_per_class,reached,repeats\n";
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
        for (std::size_t i = 0; i < r.band_counts.size(); ++i) {
            const auto& cell = r.cells[i][c];
            out << r.columns[c] << ',' << r.band_counts[i] << ',';
            if (!cell.empty())
                out << text::format_fixed(cell.mean(), 4) << ',' << text::format_fixed(cell.stddev(), 4) << ','
                    << text::format_fixed(cell.mean_per_class(), 4);
            else
                out << ",,";
            out << ',' << cell.samples.size() << ',' << r.repeats << '\n';
        }
    }
    return out.str();
}

inline std::string render_markdown(const EvalReport& r) {
    std::ostringstream out;
    out << "Accuracy (%) of " << to_string(r.method) << " selection, mean ± std over " << r.repeats
        << (r.repeats == 1 ? " run" : " runs") << " (base seed " << r.base_seed << ", dataset `"
        << r.dataset_hash << "`)\n\n";
    out << "| Bands |";
    for (const auto& c : r.columns) out << ' ' << c << " |";
    out << "\n|---:|";
    for (std::size_t c = 0; c < r.columns.size(); ++c) out << "---:|";
    out << '\n';
    for (std::size_t i = 0; i < r.band_counts.size(); ++i) {
        out << "| " << r.band_counts[i] << " |";
        for (const auto& cell : r.cells[i]) {
            if (cell.empty()) {
                out << "  |";
                continue;
            }
            out << ' ' << text::format_fixed(cell.mean(), 2) << " ± " << text::format_fixed(cell.stddev(), 2);
            if (cell.samples.size() < r.repeats) out << " (" << cell.samples.size() << '/' << r.repeats << ')';
            out << " |";
        }
        out << '\n';
    }
    out << "\nRetained bands per run:";
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
        out << ' ' << r.columns[c] << " [";
        for (std::size_t k = 0; k < r.achieved[c].size(); ++k) out << (k ? " " : "") << r.achieved[c][k];
        out << ']';
    }
    out << '\n';
    if (!r.notes.empty()) {
        out << "\nBlank or partial cells:\n";
        for (const auto& n : r.notes) out << "- " << n << '\n';
    }
    return out.str();
}

}  // namespace detail

/// Renders a report as "csv" (thresholds as columns, band counts as rows,
/// mean accuracy per cell), "csv-long" (one line per cell with std and
/// reach counts) or "markdown".
inline std::string emit_report(const EvalReport& r, std::string_view format) {
    if (format == "csv") return detail::render_csv(r);
    if (format == "csv-long") return detail::render_csv_long(r);
    if (format == "markdown" || format == "md") return detail::render_markdown(r);
    throw parameter_error("emit_report: unknown format '" + std::string(format) + "'");
}

inline void write_report(const std::filesystem::path& path, const EvalReport& r, std::string_view format) {
    const auto body = emit_report(r, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write report: " + path.string());
    out << body;
    if (!out) throw io_error("write failed: " + path.string());
}

// --- flat key=value configuration -------------------------------------------

/// Reads `key = value` lines; '#' starts a comment. Keys are normalized to
/// lower case with '_' replaced by '-'. Later keys override earlier ones.
inline std::vector<std::pair<std::string, std::string>> read_kv_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (text::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw format_error(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key(text::trim(std::string_view(line).substr(0, eq)));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) {
            return ch == '_' ? '-' : static_cast<char>(std::tolower(ch));
        });
        if (key.empty()) throw format_error(path.string() + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::string(text::trim(std::string_view(line).substr(eq + 1))));
    }
    return out;
}

template <class T>
std::vector<T> parse_list(std::string_view s) {
    std::vector<T> out;
    for (const auto& part : text::split(s, ',')) {
        if (part.empty()) continue;
        if constexpr (std::is_floating_point_v<T>) out.push_back(text::parse_double(part));
        else out.push_back(text::parse_int<T>(part));
    }
    return out;
}

/// Applies config entries onto `spec`; unknown keys are rejected.
inline void apply_config(ExperimentSpec& spec, const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [key, value] : kv) {
        auto& s = spec.selection;
        if (key == "method") spec.method = parse_method(value);
        else if (key == "thresholds") spec.thresholds = parse_list<double>(value);
        else if (key == "band-counts") spec.band_counts = parse_list<std::size_t>(value);
        else if (key == "repeats") spec.repeats = text::parse_int<std::size_t>(value);
        else if (key == "base-seed") spec.base_seed = text::parse_int<std::uint64_t>(value);
        else if (key == "cube") spec.cube_path = value;
        else if (key == "header") spec.descriptor_path = value;
        else if (key == "gt") spec.gt_path = value;
        else if (key == "levels") s.levels = text::parse_int<std::size_t>(value);
        else if (key == "stage1-keep") s.stage1_keep = text::parse_int<std::size_t>(value);
        else if (key == "fraction") s.fraction = text::parse_double(value);
        else if (key == "svm-c") s.svm.c = text::parse_double(value);
        else if (key == "svm-gamma") s.svm.gamma = text::parse_double(value);
        else if (key == "svm-tol") s.svm.tolerance = text::parse_double(value);
        else if (key == "svm-max-iter") s.svm.max_iterations = text::parse_int<std::size_t>(value);
        else throw parameter_error("unknown experiment key '" + key + "'");
    }
}

inline ExperimentSpec read_experiment_spec(const std::filesystem::path& path) {
    ExperimentSpec spec;
    apply_config(spec, read_kv_config(path));
    spec.validate();
    return spec;
}

}  // namespace hsiband

#endif  // HSIBAND_PIPELINE_HPP
