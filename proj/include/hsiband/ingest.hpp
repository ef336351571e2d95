#ifndef HSIBAND_INGEST_HPP
#define HSIBAND_INGEST_HPP

// Loading of band-sequential radiance cubes and ground-truth maps,
// per-band quantization to discrete levels, and stratified pixel splits.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsiband/diagnostics.hpp"
#include "hsiband/errors.hpp"
#include "hsiband/random.hpp"

namespace hsiband {

using level_t = std::uint16_t;
using label_t = std::uint16_t;

/// One byte per pixel, nonzero = selected. Pixels are enumerated row-major.
using PixelMask = std::vector<std::uint8_t>;

inline constexpr label_t default_max_label = 16;

struct CubeDims {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    bool big_endian = false;

    std::size_t pixels() const noexcept { return rows * cols; }
    std::size_t values() const noexcept { return rows * cols * bands; }
};

/// Signed 16-bit radiances, band-sequential: values[b * rows * cols + r * cols + c].
struct RawCube {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    std::vector<std::int16_t> values;

    std::size_t pixels() const noexcept { return rows * cols; }
    std::span<const std::int16_t> band(std::size_t b) const {
        return std::span<const std::int16_t>(values).subspan(b * pixels(), pixels());
    }
};

/// Quantized band stack. Every stored level lies in [0, levels - 1].
class HyperCube {
public:
    HyperCube() = default;
    HyperCube(std::size_t rows, std::size_t cols, std::size_t bands, std::size_t levels,
              std::vector<level_t> data)
        : rows_(rows), cols_(cols), bands_(bands), levels_(levels), data_(std::move(data)) {
        if (rows == 0 || cols == 0 || bands == 0)
            throw dimension_error("HyperCube: rows, cols and bands must be positive");
        if (levels < 2 || levels > 65536)
            throw parameter_error("HyperCube: levels must be in [2, 65536]");
        if (data_.size() != rows * cols * bands)
            throw dimension_error("HyperCube: data length does not match rows*cols*bands");
        for (level_t v : data_)
            if (v >= levels) throw parameter_error("HyperCube: level out of range");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t bands() const noexcept { return bands_; }
    std::size_t levels() const noexcept { return levels_; }
    std::size_t pixels() const noexcept { return rows_ * cols_; }

    std::span<const level_t> band(std::size_t b) const {
        if (b >= bands_) throw parameter_error("HyperCube: band index out of range");
        return std::span<const level_t>(data_).subspan(b * pixels(), pixels());
    }
    std::span<const level_t> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t bands_ = 0;
    std::size_t levels_ = 0;
    std::vector<level_t> data_;
};

/// Per-pixel class labels; 0 marks pixels that are not classified.
class GroundTruth {
public:
    GroundTruth() = default;
    GroundTruth(std::size_t rows, std::size_t cols, std::vector<label_t> labels,
                label_t max_label = default_max_label)
        : rows_(rows), cols_(cols), labels_(std::move(labels)) {
        if (labels_.size() != rows * cols)
            throw dimension_error("GroundTruth: label count does not match rows*cols");
        std::vector<bool> present(std::size_t{max_label} + 1, false);
        for (label_t v : labels_) {
            if (v > max_label)
                throw format_error("GroundTruth: label " + std::to_string(v) +
                                   " exceeds maximum " + std::to_string(max_label));
            present[v] = true;
        }
        for (std::size_t l = 1; l < present.size(); ++l)
            if (present[l]) classes_.push_back(static_cast<label_t>(l));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t pixels() const noexcept { return rows_ * cols_; }
    std::span<const label_t> labels() const noexcept { return labels_; }

    /// Number of distinct nonzero labels (Nc).
    std::size_t num_classes() const noexcept { return classes_.size(); }
    /// Distinct nonzero labels, ascending.
    const std::vector<label_t>& classes() const noexcept { return classes_; }

    std::size_t labeled_count() const {
        return static_cast<std::size_t>(
            std::count_if(labels_.begin(), labels_.end(), [](label_t v) { return v != 0; }));
    }
    PixelMask labeled_mask() const {
        PixelMask mask(labels_.size());
        std::transform(labels_.begin(), labels_.end(), mask.begin(),
                       [](label_t v) { return static_cast<std::uint8_t>(v != 0); });
        return mask;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<label_t> labels_;
    std::vector<label_t> classes_;
};

struct PixelSplit {
    PixelMask train;
    PixelMask test;
    std::uint64_t seed = 0;
    double fraction = 0.5;
    std::vector<std::string> warnings;

    std::size_t train_count() const {
        return static_cast<std::size_t>(std::count(train.begin(), train.end(), 1));
    }
    std::size_t test_count() const {
        return static_cast<std::size_t>(std::count(test.begin(), test.end(), 1));
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline long long parse_integer(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    if (t.empty()) throw format_error(std::string(what) + ": empty integer field");
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(t, &used);
    } catch (const std::exception&) {
        throw format_error(std::string(what) + ": not an integer: '" + t + "'");
    }
    if (used != t.size()) throw format_error(std::string(what) + ": not an integer: '" + t + "'");
    return value;
}

}  // namespace detail

/// Reads the sidecar descriptor of a raw cube. Accepts `key = value` lines
/// with keys rows/lines, cols/samples, bands and byte_order ("little", "big",
/// or ENVI's 0/1). ENVI `interleave` and `data type` keys are checked when
/// present; anything else is ignored.
inline CubeDims read_cube_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open cube descriptor: " + path.string());
    CubeDims dims;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = detail::lower(detail::trim(std::string_view(line).substr(0, eq)));
        const std::string value = detail::lower(detail::trim(std::string_view(line).substr(eq + 1)));
        if (key == "rows" || key == "lines") {
            dims.rows = static_cast<std::size_t>(detail::parse_integer(value, "descriptor rows"));
        } else if (key == "cols" || key == "samples") {
            dims.cols = static_cast<std::size_t>(detail::parse_integer(value, "descriptor cols"));
        } else if (key == "bands") {
            dims.bands = static_cast<std::size_t>(detail::parse_integer(value, "descriptor bands"));
        } else if (key == "byte_order" || key == "byte order") {
            if (value == "little" || value == "0") dims.big_endian = false;
            else if (value == "big" || value == "1") dims.big_endian = true;
            else throw format_error("descriptor: unknown byte order '" + value + "'");
        } else if (key == "interleave") {
            if (value != "bsq") throw format_error("descriptor: only bsq interleave is supported");
        } else if (key == "data type" || key == "data_type") {
            if (value != "2" && value != "int16")
                throw format_error("descriptor: only signed 16-bit data is supported");
        }
    }
    if (dims.rows == 0 || dims.cols == 0 || dims.bands == 0)
        throw format_error("descriptor must declare positive rows, cols and bands: " + path.string());
    return dims;
}

inline void write_cube_descriptor(const std::filesystem::path& path, const CubeDims& dims) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write cube descriptor: " + path.string());
    out << "rows = " << dims.rows << "\ncols = " << dims.cols << "\nbands = " << dims.bands
        << "\nbyte_order = " << (dims.big_endian ? "big" : "little") << '\n';
}

inline RawCube load_cube(const std::filesystem::path& path, const CubeDims& dims) {
    if (dims.rows == 0 || dims.cols == 0 || dims.bands == 0)
        throw dimension_error("load_cube: dimensions must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open cube: " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    const std::size_t expected = dims.values() * 2;
    if (size != expected)
        throw dimension_error("cube " + path.string() + " has " + std::to_string(size) +
                              " bytes, expected " + std::to_string(expected) + " for " +
                              std::to_string(dims.rows) + "x" + std::to_string(dims.cols) + "x" +
                              std::to_string(dims.bands));

    std::vector<unsigned char> bytes(size);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw io_error("short read on cube: " + path.string());

    RawCube cube{dims.rows, dims.cols, dims.bands, std::vector<std::int16_t>(dims.values())};
    for (std::size_t i = 0; i < cube.values.size(); ++i) {
        const unsigned lo = bytes[2 * i + (dims.big_endian ? 1 : 0)];
        const unsigned hi = bytes[2 * i + (dims.big_endian ? 0 : 1)];
        cube.values[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
    return cube;
}

inline RawCube load_cube(const std::filesystem::path& path,
                         const std::filesystem::path& descriptor) {
    return load_cube(path, read_cube_descriptor(descriptor));
}

/// Writes little-endian band-sequential int16.
inline void save_cube(const std::filesystem::path& path, const RawCube& cube) {
    if (cube.values.size() != cube.rows * cube.cols * cube.bands)
        throw dimension_error("save_cube: value count does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write cube: " + path.string());
    std::vector<unsigned char> bytes(cube.values.size() * 2);
    for (std::size_t i = 0; i < cube.values.size(); ++i) {
        const auto u = static_cast<std::uint16_t>(cube.values[i]);
        bytes[2 * i] = static_cast<unsigned char>(u & 0xff);
        bytes[2 * i + 1] = static_cast<unsigned char>(u >> 8);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failed: " + path.string());
}

namespace detail {

inline GroundTruth parse_ground_truth_csv(std::istream& in, label_t max_label) {
    std::vector<label_t> labels;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::size_t count = 0;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            const long long v = parse_integer(field, "ground truth");
            if (v < 0 || v > max_label)
                throw format_error("ground truth label " + std::to_string(v) + " outside [0, " +
                                   std::to_string(max_label) + "]");
            labels.push_back(static_cast<label_t>(v));
            ++count;
        }
        if (rows == 0) cols = count;
        else if (count != cols)
            throw format_error("ground truth row " + std::to_string(rows + 1) + " has " +
                               std::to_string(count) + " columns, expected " + std::to_string(cols));
        ++rows;
    }
    if (rows == 0 || cols == 0) throw format_error("ground truth file is empty");
    return GroundTruth(rows, cols, std::move(labels), max_label);
}

inline std::string next_pnm_token(std::istream& in) {
    std::string token;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(c);
    }
    return token;
}

inline GroundTruth parse_ground_truth_pgm(std::istream& in, label_t max_label) {
    const std::string magic = next_pnm_token(in);
    const auto cols = static_cast<std::size_t>(parse_integer(next_pnm_token(in), "pgm width"));
    const auto rows = static_cast<std::size_t>(parse_integer(next_pnm_token(in), "pgm height"));
    const long long maxval = parse_integer(next_pnm_token(in), "pgm maxval");
    if (rows == 0 || cols == 0) throw format_error("pgm: empty image");
    if (maxval < 1 || maxval > 255) throw format_error("pgm: only 8-bit images are supported");

    std::vector<label_t> labels(rows * cols);
    if (magic == "P5") {
        std::vector<unsigned char> bytes(labels.size());
        if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
            throw format_error("pgm: truncated pixel data");
        std::copy(bytes.begin(), bytes.end(), labels.begin());
    } else {
        for (auto& v : labels) {
            const std::string token = next_pnm_token(in);
            if (token.empty()) throw format_error("pgm: truncated pixel data");
            v = static_cast<label_t>(parse_integer(token, "pgm pixel"));
        }
    }
    for (label_t v : labels)
        if (v > max_label)
            throw format_error("ground truth label " + std::to_string(v) + " outside [0, " +
                               std::to_string(max_label) + "]");
    return GroundTruth(rows, cols, std::move(labels), max_label);
}

}  // namespace detail

/// Loads a label map from CSV (one line per row) or 8-bit PGM (P5 or P2),
/// detected from the file's magic bytes.
inline GroundTruth load_ground_truth(const std::filesystem::path& path,
                                     label_t max_label = default_max_label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open ground truth: " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.clear();
    in.seekg(0);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2'))
        return detail::parse_ground_truth_pgm(in, max_label);
    return detail::parse_ground_truth_csv(in, max_label);
}

inline void save_ground_truth_csv(const std::filesystem::path& path, const GroundTruth& gt) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write ground truth: " + path.string());
    const auto labels = gt.labels();
    for (std::size_t r = 0; r < gt.rows(); ++r) {
        for (std::size_t c = 0; c < gt.cols(); ++c) {
            if (c) out << ',';
            out << labels[r * gt.cols() + c];
        }
        out << '\n';
    }
}

/// Min-max maps one band onto [0, levels - 1]. When the band spans at least
/// `levels` distinct integer values the mapping is
/// floor((v - min) * levels / (max - min + 1)); narrower bands are stretched
/// with round((v - min) * (levels - 1) / (max - min)) so both extremes are
/// reached. Constant bands map to 0.
template <class T>
std::vector<level_t> quantize_band(std::span<const T> values, std::size_t levels) {
    if (levels < 2 || levels > 65536) throw parameter_error("quantize: levels must be in [2, 65536]");
    std::vector<level_t> out(values.size(), 0);
    if (values.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const auto lo = static_cast<long long>(*lo_it);
    const auto hi = static_cast<long long>(*hi_it);
    if (lo == hi) return out;
    const long long span = hi - lo;
    const auto L = static_cast<long long>(levels);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long long offset = static_cast<long long>(values[i]) - lo;
        long long level = span + 1 >= L ? offset * L / (span + 1)
                                        : (2 * offset * (L - 1) + span) / (2 * span);
        out[i] = static_cast<level_t>(std::clamp(level, 0LL, L - 1));
    }
    return out;
}

inline HyperCube quantize(const RawCube& raw, std::size_t levels) {
    if (levels < 2) throw parameter_error("quantize: levels must be >= 2");
    if (raw.rows == 0 || raw.cols == 0 || raw.bands == 0 ||
        raw.values.size() != raw.rows * raw.cols * raw.bands)
        throw dimension_error("quantize: malformed raw cube");
    std::vector<level_t> data;
    data.reserve(raw.values.size());
    for (std::size_t b = 0; b < raw.bands; ++b) {
        auto q = quantize_band(raw.band(b), levels);
        data.insert(data.end(), q.begin(), q.end());
    }
    return HyperCube(raw.rows, raw.cols, raw.bands, levels, std::move(data));
}

/// Stratified random split of the labeled pixels: for every class,
/// round(fraction * class size) pixels go to train and the rest to test.
/// Classes with fewer than two pixels go entirely to train.
inline PixelSplit split_labeled(const GroundTruth& gt, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw parameter_error("split_labeled: fraction must lie in (0, 1)");
    PixelSplit split;
    split.seed = seed;
    split.fraction = fraction;
    split.train.assign(gt.pixels(), 0);
    split.test.assign(gt.pixels(), 0);

    std::map<label_t, std::vector<std::size_t>> by_class;
    const auto labels = gt.labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 0) by_class[labels[i]].push_back(i);

    rng_engine rng(seed);
    for (auto& [label, members] : by_class) {
        if (members.size() < 2) {
            std::string msg = "class " + std::to_string(label) + " has " +
                              std::to_string(members.size()) +
                              " labeled pixel(s); assigned entirely to train";
            warn(msg);
            split.warnings.push_back(std::move(msg));
            for (auto p : members) split.train[p] = 1;
            continue;
        }
        shuffle(std::span<std::size_t>(members), rng);
        const auto n_train = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(members.size())));
        for (std::size_t k = 0; k < members.size(); ++k)
            (k < n_train ? split.train : split.test)[members[k]] = 1;
    }
    return split;
}

/// Audit export: one line per labeled pixel with its assigned half.
inline void write_split_csv(const std::filesystem::path& path, const PixelSplit& split,
                            const GroundTruth& gt) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write split: " + path.string());
    out << "pixel,row,col,label,set\n";
    const auto labels = gt.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!split.train[i] && !split.test[i]) continue;
        out << i << ',' << i / gt.cols() << ',' << i % gt.cols() << ',' << labels[i] << ','
            << (split.train[i] ? "train" : "test") << '\n';
    }
}

}  // namespace hsiband

#endif  // HSIBAND_INGEST_HPP
